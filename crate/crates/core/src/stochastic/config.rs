use rand::Rng;

use super::thermo::ThermoTables;
use crate::lattice::ScaledGraph;
use crate::realization::{scaled_position, Realization, TorusPoint};
use crate::{Error, Result};

/// The particle system run on `X_N`.
#[derive(Debug, Clone)]
pub enum Process {
    /// Simple exclusion: every dart `e` swaps the occupations of its
    /// endpoints at rate `p(e)`.
    Exclusion,
    /// Zero range: a particle leaves `oe` along `e` at rate `p(e) g(η_oe)`.
    ZeroRange(ThermoTables),
}

impl Process {
    pub fn name(&self) -> &'static str {
        match self {
            Process::Exclusion => "sep",
            Process::ZeroRange(_) => "zrp",
        }
    }

    /// Factor `c` in the limit `∂t ρ = ∇·(cD)∇Ψ(ρ)` produced by the generator.
    ///
    /// A swap along `e` is also a swap along `ē`, so each exclusion bond
    /// flips at rate `2p`; a zero-range particle crosses a bond at `p g`.
    /// Expanding `Σ_e p(e)[G(x + v(e)/N) − G(x)]` to second order gives
    /// `½ vᵀ∇²G v`, hence `c = 1` for exclusion and `c = ½` for zero range.
    pub fn diffusion_factor(&self) -> f64 {
        match self {
            Process::Exclusion => 1.0,
            Process::ZeroRange(_) => 0.5,
        }
    }
}

/// Occupation numbers on the vertices of `X_N` (flat vertex order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    occupation: Vec<u32>,
    total: u64,
}

impl Configuration {
    pub fn new(occupation: Vec<u32>) -> Self {
        let total = occupation.iter().map(|&k| k as u64).sum();
        Self { occupation, total }
    }

    pub fn empty(sites: usize) -> Self {
        Self { occupation: vec![0; sites], total: 0 }
    }

    pub fn occupation(&self) -> &[u32] {
        &self.occupation
    }

    pub fn get(&self, site: usize) -> u32 {
        self.occupation[site]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.occupation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupation.is_empty()
    }

    /// Moves one particle `from → to`; the caller guarantees `η_from > 0`.
    pub(crate) fn move_particle(&mut self, from: usize, to: usize) {
        self.occupation[from] -= 1;
        self.occupation[to] += 1;
    }

    /// Checks the site count and, for exclusion, that occupations are 0 or 1.
    pub fn check(&self, sg: &ScaledGraph, process: &Process) -> Result<()> {
        if self.len() != sg.vertex_count() {
            return Err(Error::InvalidArgument(format!(
                "configuration has {} sites, graph has {}",
                self.len(),
                sg.vertex_count()
            )));
        }
        if matches!(process, Process::Exclusion) {
            if let Some(x) = self.occupation.iter().position(|&k| k > 1) {
                return Err(Error::InvalidArgument(format!("exclusion site {x} holds {} particles", self.occupation[x])));
            }
        }
        Ok(())
    }
}

/// Local-equilibrium initial state: independent sites with mean `ρ₀(Φ_N(x))`.
///
/// Exclusion draws Bernoulli(ρ₀); zero range draws from `ν̄_{Ψ(ρ₀)}`.
pub fn sample_product<R: Rng + ?Sized>(
    profile: &dyn Fn(&TorusPoint) -> f64,
    sg: &ScaledGraph,
    r: &Realization,
    process: &Process,
    rng: &mut R,
) -> Result<Configuration> {
    if r.graph().vertex_count() != sg.base().vertex_count() || r.graph().dimension() != sg.dimension() {
        return Err(Error::InvalidArgument("realization does not match the scaled graph".into()));
    }
    let n = sg.scale();
    let mut occ = Vec::with_capacity(sg.vertex_count());
    for flat in 0..sg.vertex_count() {
        let (v0, sigma) = sg.vertex_parts(flat);
        let rho = profile(&scaled_position(r, n, v0, &sigma));
        let k = match process {
            Process::Exclusion => {
                if !(0.0..=1.0).contains(&rho) {
                    return Err(Error::InvalidArgument(format!("exclusion profile value {rho} outside [0, 1]")));
                }
                u32::from(rng.random::<f64>() < rho)
            }
            Process::ZeroRange(t) => {
                if !(rho >= 0.0) || !rho.is_finite() {
                    return Err(Error::InvalidArgument(format!("zero-range profile value {rho} is negative")));
                }
                t.sample_occupation(t.fugacity(rho)?, rng)?
            }
        };
        occ.push(k);
    }
    Ok(Configuration::new(occ))
}
