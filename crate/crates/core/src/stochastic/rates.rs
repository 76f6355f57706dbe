use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Zero-range jump rate `g: N → R₊` with `g(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RateFunction {
    /// `g(k) = k` (independent walkers).
    Linear,
    /// `g(k) = 1` for `k ≥ 1`.
    Indicator,
    /// `g(0..=K)` from `values`, then `g(k) = g(K) + tail_slope·(k − K)`.
    Tabulated { values: Vec<f64>, tail_slope: f64 },
}

impl RateFunction {
    pub fn tabulated(values: Vec<f64>, tail_slope: f64) -> Result<Self> {
        let r = RateFunction::Tabulated { values, tail_slope };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if let RateFunction::Tabulated { values, tail_slope } = self {
            if values.len() < 2 {
                return Err(Error::InvalidArgument("rate table needs g(0) and g(1)".into()));
            }
            if values[0] != 0.0 {
                return Err(Error::InvalidArgument("rate table must have g(0) = 0".into()));
            }
            if let Some(k) = values.iter().skip(1).position(|&g| !(g > 0.0 && g.is_finite())) {
                return Err(Error::InvalidArgument(format!("rate g({}) must be positive and finite", k + 1)));
            }
            if !(*tail_slope >= 0.0 && tail_slope.is_finite()) {
                return Err(Error::InvalidArgument("tail slope must be finite and nonnegative".into()));
            }
        }
        Ok(())
    }

    pub fn g(&self, k: u32) -> f64 {
        match self {
            RateFunction::Linear => k as f64,
            RateFunction::Indicator => {
                if k > 0 {
                    1.0
                } else {
                    0.0
                }
            }
            RateFunction::Tabulated { values, tail_slope } => {
                let last = values.len() - 1;
                let k = k as usize;
                if k <= last {
                    values[k]
                } else {
                    values[last] + tail_slope * (k - last) as f64
                }
            }
        }
    }

    /// `g* = sup_k |g(k+1) − g(k)|`.
    pub fn g_star(&self) -> f64 {
        match self {
            RateFunction::Linear | RateFunction::Indicator => 1.0,
            RateFunction::Tabulated { values, tail_slope } => values
                .windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .fold(*tail_slope, f64::max),
        }
    }

    /// Radius of convergence `φ*` of `Z(φ) = Σ φ^k / g(k)!`.
    pub fn radius(&self) -> f64 {
        match self {
            RateFunction::Linear => f64::INFINITY,
            RateFunction::Indicator => 1.0,
            RateFunction::Tabulated { values, tail_slope } => {
                if *tail_slope > 0.0 {
                    f64::INFINITY
                } else {
                    values[values.len() - 1]
                }
            }
        }
    }

    /// `inf_{j > k} g(j)`, used for the geometric tail bound of the series.
    pub(crate) fn inf_beyond(&self, k: u32) -> f64 {
        match self {
            RateFunction::Linear => (k + 1) as f64,
            RateFunction::Indicator => 1.0,
            RateFunction::Tabulated { values, .. } => {
                let last = values.len() - 1;
                let from = k as usize + 1;
                let table = if from <= last { values[from..].iter().copied().fold(f64::INFINITY, f64::min) } else { f64::INFINITY };
                // the affine tail is nondecreasing from g(K)
                table.min(self.g((k + 1).max(last as u32 + 1)))
            }
        }
    }
}
