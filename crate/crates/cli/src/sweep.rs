use std::path::Path;

use crystal_hydro::lattice::build_scaled_graph;
use crystal_hydro::pde::TorusField;
use crystal_hydro::realization::TorusPoint;
use crystal_hydro::stochastic::{
    density_from_sites, sample_product, simulate, site_coordinates, stream_rng, DensityEstimator, Process, Purpose,
    SimResult,
};
use rayon::prelude::*;

use crate::converge::check_profile_dimension;
use crate::error::HarnessError;
use crate::profile::ProfileExpr;
use crate::realize::RealizedLattice;

/// Parameters of a plain replica sweep at one scale.
#[derive(Debug, Clone)]
pub struct SweepParams {
    pub scale: usize,
    pub times: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub estimator: DensityEstimator,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub times: Vec<f64>,
    pub runs: Vec<SimResult>,
    /// Replica-averaged density at each time.
    pub densities: Vec<TorusField>,
}

pub fn run_sweep(
    rl: &RealizedLattice,
    process: &Process,
    profile: &ProfileExpr,
    params: &SweepParams,
) -> Result<SweepResult, HarnessError> {
    let r = &rl.realization;
    check_profile_dimension(profile, r.basis().dimension())?;
    if params.replicas == 0 {
        return Err(HarnessError::Invalid("replicas must be at least 1".into()));
    }
    if params.times.is_empty() || params.times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(HarnessError::Invalid(format!("times must be finite and nonnegative, got {:?}", params.times)));
    }
    let mut times = params.times.clone();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let horizon = *times.last().expect("nonempty");
    let sg = build_scaled_graph(r.graph_arc().clone(), params.scale)?;
    let sites = site_coordinates(&sg, r);
    let f = |p: &TorusPoint| profile.eval(p.coords().as_slice());
    let runs = (0..params.replicas)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(params.seed, rep as u64, Purpose::Initial, params.scale as u64);
            let initial = sample_product(&f, &sg, r, process, &mut rng)?;
            Ok(simulate(&sg, &initial, process, horizon, &times, params.seed, rep as u64)?)
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mut densities = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let mut acc: Option<Vec<f64>> = None;
        let mut grid = None;
        for run in &runs {
            let field = density_from_sites(&run.snapshots[k].configuration, &sites, r, &params.estimator)?;
            let vals = acc.get_or_insert_with(|| vec![0.0; field.values().len()]);
            vals.iter_mut().zip(field.values()).for_each(|(a, v)| *a += v);
            grid.get_or_insert_with(|| field.grid().clone());
        }
        let mut vals = acc.expect("at least one replica");
        vals.iter_mut().for_each(|v| *v /= runs.len() as f64);
        densities.push(TorusField::new(grid.expect("at least one replica"), vals)?);
    }
    Ok(SweepResult { times, runs, densities })
}

impl SweepResult {
    /// `trajectory.csv` (occupied sites only) and `density.csv`.
    pub fn write_outputs(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("trajectory.csv"))?;
        w.write_record(["replica", "t", "vertex", "occupation"])?;
        for run in &self.runs {
            for snap in &run.snapshots {
                for (x, &k) in snap.configuration.occupation().iter().enumerate() {
                    if k > 0 {
                        w.write_record([run.replica.to_string(), format!("{:?}", snap.time), x.to_string(), k.to_string()])?;
                    }
                }
            }
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("density.csv"))?;
        let d = self.densities[0].grid().dimension();
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("cell_{i}")));
        header.push("value".into());
        w.write_record(&header)?;
        for (t, field) in self.times.iter().zip(&self.densities) {
            for (i, v) in field.values().iter().enumerate() {
                let mut row = vec![format!("{t:?}")];
                row.extend(field.grid().cell_coords(i).iter().map(ToString::to_string));
                row.push(format!("{v:?}"));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
