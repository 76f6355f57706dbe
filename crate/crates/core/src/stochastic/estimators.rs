use nalgebra::DVector;

use super::simulate::SimResult;
use super::thermo::ThermoTables;
use super::Configuration;
use crate::lattice::{ball_offsets, ScaledGraph};
use crate::pde::{TorusField, TorusGrid};
use crate::realization::{scaled_position, Realization};
use crate::{Error, Result};

/// How `π^N` is turned into a density on the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityEstimator {
    /// Particle counts per cell of an `M^d` grid, normalised so that a
    /// configuration with constant occupation `c` gives `c`.
    Grid { resolution: usize },
    /// `⟨π^N, χ_{z,ε}⟩` at the cell centres of an `M^d` grid, where `χ` is
    /// the normalised indicator of the ℓ¹ ball of radius `ε` in fractional
    /// coordinates (volume fraction `(2ε)^d / d!`).
    Ball { radius: f64, resolution: usize },
}

impl DensityEstimator {
    pub fn resolution(&self) -> usize {
        match *self {
            DensityEstimator::Grid { resolution } | DensityEstimator::Ball { resolution, .. } => resolution,
        }
    }
}

/// Fractional torus coordinates of every vertex of `X_N` under `Φ_N`.
pub fn site_coordinates(sg: &ScaledGraph, r: &Realization) -> Vec<DVector<f64>> {
    (0..sg.vertex_count())
        .map(|flat| {
            let (v0, sigma) = sg.vertex_parts(flat);
            scaled_position(r, sg.scale(), v0, &sigma).fractional().clone()
        })
        .collect()
}

/// Empirical density of one configuration.
pub fn empirical_density(
    cfg: &Configuration,
    sg: &ScaledGraph,
    r: &Realization,
    estimator: &DensityEstimator,
) -> Result<TorusField> {
    let sites = site_coordinates(sg, r);
    density_from_sites(cfg, &sites, r, estimator)
}

/// [`empirical_density`] with precomputed [`site_coordinates`].
pub fn density_from_sites(
    cfg: &Configuration,
    sites: &[DVector<f64>],
    r: &Realization,
    estimator: &DensityEstimator,
) -> Result<TorusField> {
    if cfg.len() != sites.len() {
        return Err(Error::InvalidArgument("configuration does not match the site list".into()));
    }
    let grid = TorusGrid::new(r.basis().clone(), estimator.resolution())?;
    let nv = sites.len() as f64;
    let d = grid.dimension();
    let mut values = vec![0.0; grid.cell_count()];
    match *estimator {
        DensityEstimator::Grid { .. } => {
            let scale = grid.cell_count() as f64 / nv;
            for (x, s) in sites.iter().enumerate() {
                let k = cfg.get(x);
                if k > 0 {
                    values[grid.locate(s)] += k as f64 * scale;
                }
            }
        }
        DensityEstimator::Ball { radius, .. } => {
            if !(radius > 0.0 && radius <= 0.5) {
                return Err(Error::InvalidArgument(format!("ball radius must lie in (0, 1/2], got {radius}")));
            }
            let fraction = (2.0 * radius).powi(d as i32) / (1..=d).product::<usize>() as f64;
            let scale = 1.0 / (fraction * nv);
            let occupied: Vec<(&DVector<f64>, f64)> =
                sites.iter().enumerate().filter(|(x, _)| cfg.get(*x) > 0).map(|(x, s)| (s, cfg.get(x) as f64)).collect();
            for (i, v) in values.iter_mut().enumerate() {
                let z = grid.center_fractional(i);
                let mass: f64 = occupied
                    .iter()
                    .filter(|(s, _)| {
                        let dist: f64 = s.iter().zip(z.iter()).map(|(a, b)| {
                            let t = (a - b).abs();
                            t.min(1.0 - t)
                        }).sum();
                        dist <= radius
                    })
                    .map(|(_, k)| k)
                    .sum();
                *v = mass * scale;
            }
        }
    }
    TorusField::new(grid, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplacementReport {
    /// `(t, mean V)` per snapshot.
    pub per_snapshot: Vec<(f64, f64)>,
    pub time_average: f64,
    /// Word-metric radius `R = εN` of the averaging balls.
    pub radius: f64,
}

/// Space-time average of `V = |g̃ − Ψ(η̄)|` along a zero-range trajectory.
///
/// For each `σ ∈ Γ_N` and `v₀ ∈ V₀`, `g̃` averages `g(η)` over the sites
/// `(v₀, σ + τ)` with word length `|τ| ≤ εN`, and `η̄` averages `η` over all
/// vertices of those fundamental domains.
pub fn replacement_diagnostic(
    traj: &SimResult,
    sg: &ScaledGraph,
    t: &ThermoTables,
    epsilon: f64,
) -> Result<ReplacementReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let radius = epsilon * sg.scale() as f64;
    let offsets: Vec<usize> = ball_offsets(sg.dimension(), sg.scale(), radius).iter().map(|o| sg.cell_of(o)).collect();
    let cells = sg.cell_count();
    let nv = sg.base().vertex_count();
    let ball = offsets.len() as f64;
    let mut per_snapshot = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        let eta = snap.configuration.occupation();
        if eta.len() != sg.vertex_count() {
            return Err(Error::InvalidArgument("snapshot does not match the scaled graph".into()));
        }
        let mut cell_eta = vec![0.0; cells];
        let mut site_g = vec![0.0; eta.len()];
        for (x, &k) in eta.iter().enumerate() {
            cell_eta[x / nv] += k as f64;
            site_g[x] = t.rate().g(k);
        }
        let mut total = 0.0;
        for c in 0..cells {
            let sigma = sg.cell_element(c);
            let members: Vec<usize> = offsets
                .iter()
                .map(|&o| sg.cell_of(&sigma.add(&sg.cell_element(o))))
                .collect();
            let eta_bar = members.iter().map(|&m| cell_eta[m]).sum::<f64>() / (ball * nv as f64);
            let psi = t.fugacity(eta_bar)?;
            for v0 in 0..nv {
                let g_tilde = members.iter().map(|&m| site_g[m * nv + v0]).sum::<f64>() / ball;
                total += (g_tilde - psi).abs();
            }
        }
        per_snapshot.push((snap.time, total / (cells * nv) as f64));
    }
    let time_average = if per_snapshot.is_empty() {
        0.0
    } else {
        per_snapshot.iter().map(|p| p.1).sum::<f64>() / per_snapshot.len() as f64
    };
    Ok(ReplacementReport { per_snapshot, time_average, radius })
}
