use std::path::{Path, PathBuf};

use crystal_hydro::lattice::LatticeSpec;
use crystal_hydro::stochastic::{DensityEstimator, Process, RateFunction, ThermoTables};
use serde::{Deserialize, Serialize};

use crate::bundled;
use crate::error::HarnessError;
use crate::profile::{parse_profile, ProfileExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Sep,
    Zrp,
}

/// Which periodic realization places the sites of `X_N` on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RealizationMode {
    /// Positions listed in the lattice spec.
    Given,
    /// Harmonic realization for the configured basis.
    #[default]
    Harmonic,
    /// Harmonic realization mapped to isotropic diffusion.
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EstimatorConfig {
    /// Cell counts on an `M^d` grid; `M` defaults to `max(4, ⌊N/4⌋)`.
    Grid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution: Option<usize>,
    },
    /// ℓ¹-ball averages of radius `ε` (fractional units) at grid centres.
    Ball {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution: Option<usize>,
    },
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig::Grid { resolution: None }
    }
}

impl EstimatorConfig {
    pub fn for_scale(&self, n: usize) -> DensityEstimator {
        let default = (n / 4).max(4);
        match *self {
            EstimatorConfig::Grid { resolution } => DensityEstimator::Grid { resolution: resolution.unwrap_or(default) },
            EstimatorConfig::Ball { radius, resolution } => {
                DensityEstimator::Ball { radius, resolution: resolution.unwrap_or(default) }
            }
        }
    }
}

/// A hydrodynamic-convergence experiment (TOML).
///
/// The lattice is either `lattice = "<bundled name or path>"` or an embedded
/// `[lattice_spec]` table. Relative paths resolve against the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<String>,
    pub process: ProcessKind,
    /// Basis override, as column vectors `u₁…u_d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub realization: RealizationMode,
    pub scales: Vec<usize>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    pub times: Vec<f64>,
    pub rho0: String,
    pub seed: u64,
    /// Resolution of the PDE grid; defaults depend on the dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pde_resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Zero-range rate; linear when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateFunction>,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_spec: Option<LatticeSpec>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_replicas() -> usize {
    50
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Invalid(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment config is always serialisable")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Invalid(m));
        match (&self.lattice, &self.lattice_spec) {
            (Some(_), Some(_)) => return bad("give either `lattice` or `[lattice_spec]`, not both".into()),
            (None, None) => return bad("missing `lattice` or `[lattice_spec]`".into()),
            _ => {}
        }
        if self.scales.is_empty() || self.scales[0] == 0 || self.scales.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("scales must be positive and strictly increasing, got {:?}", self.scales));
        }
        if self.replicas == 0 {
            return bad("replicas must be at least 1".into());
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return bad(format!("times must be finite and nonnegative, got {:?}", self.times));
        }
        if self.seed > i64::MAX as u64 {
            return bad("seed must fit in a signed 64-bit integer".into());
        }
        if self.rate.is_some() && self.process == ProcessKind::Sep {
            return bad("`rate` applies to zero range only".into());
        }
        if let Some(r) = &self.rate {
            r.validate()?;
        }
        match self.estimator {
            EstimatorConfig::Ball { radius, .. } if !(radius > 0.0 && radius <= 0.5) => {
                return bad(format!("ball radius must lie in (0, 1/2], got {radius}"));
            }
            EstimatorConfig::Grid { resolution: Some(m) } | EstimatorConfig::Ball { resolution: Some(m), .. } if m < 4 => {
                return bad(format!("estimator resolution must be at least 4, got {m}"));
            }
            _ => {}
        }
        if matches!(self.pde_resolution, Some(m) if m < 4) {
            return bad("pde_resolution must be at least 4".into());
        }
        self.profile()?;
        Ok(())
    }

    pub fn profile(&self) -> Result<ProfileExpr, HarnessError> {
        Ok(parse_profile(&self.rho0)?)
    }

    pub fn lattice_spec(&self) -> Result<LatticeSpec, HarnessError> {
        match (&self.lattice_spec, &self.lattice) {
            (Some(spec), _) => Ok(spec.clone()),
            (None, Some(reference)) => load_lattice(reference, self.base_dir.as_deref()),
            (None, None) => Err(HarnessError::Invalid("missing lattice".into())),
        }
    }

    pub fn process(&self) -> Result<Process, HarnessError> {
        build_process(self.process, self.rate.clone())
    }
}

pub fn build_process(kind: ProcessKind, rate: Option<RateFunction>) -> Result<Process, HarnessError> {
    Ok(match kind {
        ProcessKind::Sep => Process::Exclusion,
        ProcessKind::Zrp => Process::ZeroRange(ThermoTables::new(rate.unwrap_or(RateFunction::Linear))?),
    })
}

/// Resolves a bundled lattice name or a path (relative to `base`).
pub fn load_lattice(reference: &str, base: Option<&Path>) -> Result<LatticeSpec, HarnessError> {
    if let Some(text) = bundled::lattice(reference) {
        return Ok(LatticeSpec::from_toml_str(text)?);
    }
    let mut path = PathBuf::from(reference);
    if path.is_relative() {
        if let Some(base) = base {
            path = base.join(path);
        }
    }
    let text = std::fs::read_to_string(&path)
        .map_err(|e| HarnessError::Invalid(format!("cannot read lattice {}: {e}", path.display())))?;
    Ok(LatticeSpec::from_toml_str(&text)?)
}
