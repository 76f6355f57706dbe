use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crystal_hydro::lattice::build_scaled_graph;
use crystal_hydro::pde::{l1_distance, solve_fd, Identity, Response, TorusField, TorusGrid};
use crystal_hydro::realization::{DiffusionMatrix, Realization};
use crystal_hydro::stochastic::{
    density_from_sites, sample_product, simulate, site_coordinates, stream_rng, DensityEstimator, Process, Purpose,
};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::profile::ProfileExpr;
use crate::realize::realize;

/// One `(N, t)` cell of the experiment.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub scale: usize,
    pub time: f64,
    pub estimator: DensityEstimator,
    /// Mean over replicas of `‖ρ̂_r − ρ‖_{L¹}`.
    pub mean_l1: f64,
    /// Standard error of `mean_l1`.
    pub se_l1: f64,
    /// `‖mean_r ρ̂_r − ρ‖_{L¹}`.
    pub ensemble_l1: f64,
    /// Jackknife standard error of `ensemble_l1`.
    pub ensemble_se: f64,
    /// Mean number of jumps per replica up to the last time.
    pub mean_events: f64,
    /// Summed simulation time of this scale's replicas.
    pub wall_seconds: f64,
    pub ensemble_density: TorusField,
    /// The PDE solution block-averaged onto the estimator grid.
    pub pde: TorusField,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub process: &'static str,
    pub harmonic_diffusion: DiffusionMatrix,
    /// `c·D`, the matrix handed to the PDE solver.
    pub pde_diffusion: DiffusionMatrix,
    pub rows: Vec<ConvergenceRow>,
}

/// Default PDE grid resolution by dimension.
pub fn default_pde_resolution(d: usize) -> usize {
    match d {
        1 => 256,
        2 => 64,
        _ => 16,
    }
}

pub fn response_of(process: &Process) -> &dyn Response {
    match process {
        Process::Exclusion => &Identity,
        Process::ZeroRange(t) => t,
    }
}

/// `ρ₀` sampled at the cell centres of `grid`, in physical coordinates.
pub fn sample_profile(grid: &TorusGrid, expr: &ProfileExpr) -> Result<TorusField, HarnessError> {
    check_profile_dimension(expr, grid.dimension())?;
    let field = grid.sample(|p| expr.eval(p.coords().as_slice()))?;
    if let Some(v) = field.values().iter().find(|v| !v.is_finite()) {
        return Err(HarnessError::Invalid(format!("initial profile takes the non-finite value {v}")));
    }
    Ok(field)
}

pub fn check_profile_dimension(expr: &ProfileExpr, d: usize) -> Result<(), HarnessError> {
    if expr.dimension_used() > d {
        return Err(HarnessError::Invalid(format!("profile uses x{} but the lattice has dimension {d}", expr.dimension_used())));
    }
    Ok(())
}

struct ReplicaOutcome {
    scale_index: usize,
    densities: Vec<TorusField>,
    events: u64,
    seconds: f64,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn average(fields: &[&TorusField]) -> Result<TorusField, HarnessError> {
    let grid = fields[0].grid().clone();
    let mut acc = vec![0.0; grid.cell_count()];
    for f in fields {
        for (a, v) in acc.iter_mut().zip(f.values()) {
            *a += v;
        }
    }
    let n = fields.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(TorusField::new(grid, acc)?)
}

fn jackknife_l1(fields: &[&TorusField], pde: &TorusField) -> Result<f64, HarnessError> {
    let r = fields.len();
    if r < 2 {
        return Ok(0.0);
    }
    let grid = fields[0].grid().clone();
    let mut total = vec![0.0; grid.cell_count()];
    for f in fields {
        for (a, v) in total.iter_mut().zip(f.values()) {
            *a += v;
        }
    }
    let mut leave_out = Vec::with_capacity(r);
    for f in fields {
        let vals = total.iter().zip(f.values()).map(|(s, v)| (s - v) / (r - 1) as f64).collect();
        leave_out.push(l1_distance(&TorusField::new(grid.clone(), vals)?, pde)?);
    }
    let mean = leave_out.iter().sum::<f64>() / r as f64;
    let ss: f64 = leave_out.iter().map(|x| (x - mean).powi(2)).sum();
    Ok(((r - 1) as f64 / r as f64 * ss).sqrt())
}

/// Simulates every `(N, replica)` pair and compares with the PDE.
///
/// The PDE coefficient is `c·D_h`, where `D_h` comes from the harmonic
/// realization for the realization's lattice group and `c` is the process
/// factor. Replica `r` at scale `N` draws its initial state from stream
/// `(seed, r, Initial, N)` and its dynamics from `(seed, r, Dynamics, N)`,
/// so results do not depend on scheduling.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport, HarnessError> {
    cfg.validate()?;
    let spec = cfg.lattice_spec()?;
    let expr = cfg.profile()?;
    let process = cfg.process()?;
    let rl = realize(&spec, cfg.basis.as_deref(), cfg.realization)?;
    let r: &Realization = &rl.realization;
    let d = r.basis().dimension();
    check_profile_dimension(&expr, d)?;
    let pde_d = DiffusionMatrix::new(rl.harmonic_diffusion.matrix() * process.diffusion_factor())?;
    let response = response_of(&process);

    let mut times = cfg.times.clone();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let horizon = *times.last().expect("validated nonempty");

    // PDE once per (estimator resolution, time)
    let base_m = cfg.pde_resolution.unwrap_or_else(|| default_pde_resolution(d));
    let mut pde: BTreeMap<usize, Vec<TorusField>> = BTreeMap::new();
    for &n in &cfg.scales {
        let m = cfg.estimator.for_scale(n).resolution();
        if pde.contains_key(&m) {
            continue;
        }
        let fine = m * base_m.div_ceil(m);
        let grid = TorusGrid::new(r.basis().clone(), fine)?;
        let rho0 = sample_profile(&grid, &expr)?;
        let fields = times
            .iter()
            .map(|&t| Ok(solve_fd(&rho0, &pde_d, response, t, None)?.coarsen(fine / m)?))
            .collect::<Result<Vec<_>, HarnessError>>()?;
        pde.insert(m, fields);
    }

    let graphs = cfg
        .scales
        .iter()
        .map(|&n| {
            let sg = build_scaled_graph(r.graph_arc().clone(), n)?;
            let sites = site_coordinates(&sg, r);
            Ok((sg, sites))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let jobs: Vec<(usize, usize)> =
        (0..cfg.scales.len()).flat_map(|i| (0..cfg.replicas).map(move |rep| (i, rep))).collect();
    let profile = |p: &crystal_hydro::realization::TorusPoint| expr.eval(p.coords().as_slice());
    let outcomes = jobs
        .par_iter()
        .map(|&(i, rep)| {
            let start = Instant::now();
            let n = cfg.scales[i];
            let (sg, sites) = &graphs[i];
            let mut rng = stream_rng(cfg.seed, rep as u64, Purpose::Initial, n as u64);
            let initial = sample_product(&profile, sg, r, &process, &mut rng)?;
            let sim = simulate(sg, &initial, &process, horizon, &times, cfg.seed, rep as u64)?;
            let estimator = cfg.estimator.for_scale(n);
            let densities = sim
                .snapshots
                .iter()
                .map(|s| Ok(density_from_sites(&s.configuration, sites, r, &estimator)?))
                .collect::<Result<Vec<_>, HarnessError>>()?;
            Ok(ReplicaOutcome { scale_index: i, densities, events: sim.event_count, seconds: start.elapsed().as_secs_f64() })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut rows = Vec::new();
    for (i, &n) in cfg.scales.iter().enumerate() {
        let mine: Vec<&ReplicaOutcome> = outcomes.iter().filter(|o| o.scale_index == i).collect();
        let estimator = cfg.estimator.for_scale(n);
        let (mean_events, _) = mean_and_se(&mine.iter().map(|o| o.events as f64).collect::<Vec<_>>());
        let wall_seconds = mine.iter().map(|o| o.seconds).sum();
        for (k, &t) in times.iter().enumerate() {
            let target = &pde[&estimator.resolution()][k];
            let fields: Vec<&TorusField> = mine.iter().map(|o| &o.densities[k]).collect();
            let l1s = fields.iter().map(|f| l1_distance(f, target)).collect::<Result<Vec<_>, _>>()?;
            let (mean_l1, se_l1) = mean_and_se(&l1s);
            let ensemble_density = average(&fields)?;
            rows.push(ConvergenceRow {
                scale: n,
                time: t,
                estimator,
                mean_l1,
                se_l1,
                ensemble_l1: l1_distance(&ensemble_density, target)?,
                ensemble_se: jackknife_l1(&fields, target)?,
                mean_events,
                wall_seconds,
                ensemble_density,
                pde: target.clone(),
            });
        }
    }
    Ok(ConvergenceReport {
        process: process.name(),
        harmonic_diffusion: rl.harmonic_diffusion,
        pde_diffusion: pde_d,
        rows,
    })
}

impl ConvergenceReport {
    pub fn rows_for(&self, time: f64) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.time == time)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "process: {}", self.process);
        let _ = writeln!(out, "harmonic D: {:?}", rows_of(self.harmonic_diffusion.matrix()));
        let _ = writeln!(out, "PDE D:      {:?}", rows_of(self.pde_diffusion.matrix()));
        let _ = writeln!(
            out,
            "{:>6} {:>8} {:>4} {:>10} {:>10} {:>12} {:>10} {:>12} {:>9}",
            "N", "t", "M", "mean_l1", "se", "ensemble_l1", "jack_se", "events", "wall_s"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>6} {:>8} {:>4} {:>10.5} {:>10.5} {:>12.5} {:>10.5} {:>12.0} {:>9.2}",
                r.scale,
                r.time,
                r.estimator.resolution(),
                r.mean_l1,
                r.se_l1,
                r.ensemble_l1,
                r.ensemble_se,
                r.mean_events,
                r.wall_seconds
            );
        }
        out
    }

    /// Deterministic summary table (no timings).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["N", "t", "estimator_M", "mean_l1", "se_l1", "ensemble_l1", "ensemble_se", "mean_events"])?;
        for r in &self.rows {
            w.write_record([
                r.scale.to_string(),
                format!("{:?}", r.time),
                r.estimator.resolution().to_string(),
                format!("{:?}", r.mean_l1),
                format!("{:?}", r.se_l1),
                format!("{:?}", r.ensemble_l1),
                format!("{:?}", r.ensemble_se),
                format!("{:?}", r.mean_events),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `convergence.csv`, `diffusion.csv`, `timing.csv` and the
    /// per-row density and PDE fields into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(std::fs::File::create(dir.join("convergence.csv"))?)?;

        let mut w = csv::Writer::from_path(dir.join("diffusion.csv"))?;
        w.write_record(["i", "j", "harmonic", "pde"])?;
        let (h, p) = (self.harmonic_diffusion.matrix(), self.pde_diffusion.matrix());
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                w.write_record([i.to_string(), j.to_string(), format!("{:?}", h[(i, j)]), format!("{:?}", p[(i, j)])])?;
            }
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("timing.csv"))?;
        w.write_record(["N", "wall_seconds"])?;
        let mut seen = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.scale) {
                seen.push(r.scale);
                w.write_record([r.scale.to_string(), format!("{:.3}", r.wall_seconds)])?;
            }
        }
        w.flush()?;

        let mut time_index: Vec<f64> = self.rows.iter().map(|r| r.time).collect();
        time_index.sort_by(f64::total_cmp);
        time_index.dedup();
        let mut written = Vec::new();
        for r in &self.rows {
            let k = time_index.iter().position(|&t| t == r.time).expect("time present");
            r.ensemble_density.write_csv(std::fs::File::create(dir.join(format!("density_N{}_t{k}.csv", r.scale)))?)?;
            let name = format!("pde_M{}_t{k}.csv", r.estimator.resolution());
            if !written.contains(&name) {
                r.pde.write_csv(std::fs::File::create(dir.join(&name))?)?;
                written.push(name);
            }
        }
        Ok(())
    }
}

fn rows_of(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}
