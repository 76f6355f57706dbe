use std::collections::HashMap;
use std::sync::Arc;

use super::config::{Configuration, Process};
use super::thermo::ThermoTables;
use crate::lattice::{build_scaled_graph, QuotientGraph, ScaledGraph};
use crate::{Error, Result};

const MAX_EXCLUSION_SITES: usize = 12;
const MAX_ZERO_RANGE_SITES: usize = 6;
const MAX_ZERO_RANGE_PARTICLES: u32 = 4;

/// `max_η |Σ_η' ν(η') L(η', η)|` for the product measure of `process` on
/// `X_N`, by enumerating the state space.
///
/// Exclusion uses Bernoulli(`density`) on all of `{0,1}^{V_N}`. Zero range
/// is checked on the sector with `particles` particles, where the product
/// measure `ν̄_{Ψ(density)}` conditions to weights `Π 1/g(η_x)!`.
pub fn generator_stationarity_check(
    graph: Arc<QuotientGraph>,
    n: usize,
    process: &Process,
    density: f64,
    particles: u32,
) -> Result<f64> {
    let sg = build_scaled_graph(graph, n)?;
    match process {
        Process::Exclusion => exclusion_residual(&sg, density),
        Process::ZeroRange(t) => zero_range_residual(&sg, t, density, particles),
    }
}

fn exclusion_residual(sg: &ScaledGraph, rho: f64) -> Result<f64> {
    let sites = sg.vertex_count();
    if sites > MAX_EXCLUSION_SITES {
        return Err(Error::StateSpaceTooLarge(format!("2^{sites} exclusion states (limit 2^{MAX_EXCLUSION_SITES})")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("density {rho} outside [0, 1]")));
    }
    let states = 1usize << sites;
    let nu: Vec<f64> = (0..states)
        .map(|s| {
            let k = s.count_ones() as i32;
            rho.powi(k) * (1.0 - rho).powi(sites as i32 - k)
        })
        .collect();
    let mut flow = vec![0.0; states];
    for (s, &w) in nu.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for e in 0..sg.dart_count() {
            let (a, b) = (sg.tail(e), sg.head(e));
            if (s >> a & 1) != (s >> b & 1) {
                let target = s ^ (1 << a) ^ (1 << b);
                let r = w * sg.weight(e);
                flow[target] += r;
                flow[s] -= r;
            }
        }
    }
    Ok(flow.iter().fold(0.0, |m, x| m.max(x.abs())))
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn zero_range_residual(sg: &ScaledGraph, t: &ThermoTables, alpha: f64, particles: u32) -> Result<f64> {
    let sites = sg.vertex_count();
    if sites > MAX_ZERO_RANGE_SITES || particles > MAX_ZERO_RANGE_PARTICLES {
        return Err(Error::StateSpaceTooLarge(format!(
            "zero-range sector with {sites} sites and {particles} particles (limits {MAX_ZERO_RANGE_SITES}, {MAX_ZERO_RANGE_PARTICLES})"
        )));
    }
    let phi = t.fugacity(alpha)?;
    let states = compositions(particles, sites);
    let index: HashMap<&[u32], usize> = states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let log_w = |s: &[u32]| s.iter().map(|&k| t.log_weight(k, phi.max(f64::MIN_POSITIVE))).sum::<f64>();
    let raw: Vec<f64> = states.iter().map(|s| log_w(s)).collect();
    let top = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = raw.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = unnorm.iter().sum();
    let nu: Vec<f64> = unnorm.iter().map(|w| w / z).collect();
    let mut flow = vec![0.0; states.len()];
    let mut buf = vec![0u32; sites];
    for (i, s) in states.iter().enumerate() {
        for e in 0..sg.dart_count() {
            let (a, b) = (sg.tail(e), sg.head(e));
            if s[a] == 0 || a == b {
                continue;
            }
            buf.copy_from_slice(s);
            buf[a] -= 1;
            buf[b] += 1;
            let j = index[buf.as_slice()];
            let r = nu[i] * sg.weight(e) * t.rate().g(s[a]);
            flow[j] += r;
            flow[i] -= r;
        }
    }
    Ok(flow.iter().fold(0.0, |m, x| m.max(x.abs())))
}

/// Largest `|ν(η^e) p(ē) g(η^e_te) / (ν(η) p(e) g(η_oe)) − 1|` over the given
/// configurations and every dart with `η_oe > 0`, for `ν = ν̄_φ`.
///
/// Only the two touched marginals differ between `η` and `η^e`, so the
/// ratio is formed from log-weights of those sites.
pub fn zero_range_detailed_balance(
    sg: &ScaledGraph,
    t: &ThermoTables,
    phi: f64,
    configurations: &[Configuration],
) -> Result<f64> {
    if !(phi > 0.0) {
        return Err(Error::InvalidArgument("detailed balance needs φ > 0".into()));
    }
    let max_k = configurations.iter().flat_map(|c| c.occupation().iter().copied()).max().unwrap_or(0) + 1;
    let mut log_w = Vec::with_capacity(max_k as usize + 1);
    let mut acc = 0.0;
    log_w.push(0.0);
    for k in 1..=max_k {
        acc += phi.ln() - t.rate().g(k).ln();
        log_w.push(acc);
    }
    let mut worst = 0.0f64;
    for c in configurations {
        if c.len() != sg.vertex_count() {
            return Err(Error::InvalidArgument("configuration does not match the scaled graph".into()));
        }
        let eta = c.occupation();
        for e in 0..sg.dart_count() {
            let (a, b) = (sg.tail(e), sg.head(e));
            let (ka, kb) = (eta[a] as usize, eta[b] as usize);
            if ka == 0 || a == b {
                continue;
            }
            let forward = log_w[ka] + log_w[kb] + sg.weight(e).ln() + t.rate().g(ka as u32).ln();
            let backward = log_w[ka - 1] + log_w[kb + 1] + sg.weight(sg.inverse(e)).ln() + t.rate().g(kb as u32 + 1).ln();
            worst = worst.max((backward - forward).exp_m1().abs());
        }
    }
    Ok(worst)
}
