use rand::Rng;

use super::rates::RateFunction;
use crate::pde::Response;
use crate::{Error, Result};

const MAX_TERMS: u32 = 1_000_000;
const TAIL_TOL: f64 = 1e-16;
const RESCALE: f64 = 1e250;

/// Moments of the marginal `ν̄_φ(k) ∝ φ^k / g(k)!`, from the truncated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesMoments {
    pub log_z: f64,
    pub mean: f64,
    pub variance: f64,
    /// Index of the last series term kept.
    pub truncation: u32,
}

/// Equilibrium thermodynamics `Z`, `R`, `Ψ` of a zero-range rate function.
///
/// Linear and indicator rates use closed forms; tabulated rates sum the
/// series until a geometric tail bound (ratio `φ / inf_{j>k} g(j)`) drops
/// below `1e-16` of the partial sum.
#[derive(Debug, Clone)]
pub struct ThermoTables {
    rate: RateFunction,
    /// `(φ, R(φ))` on an increasing grid, used to bracket `Ψ`.
    grid: Vec<(f64, f64)>,
}

impl ThermoTables {
    pub fn new(rate: RateFunction) -> Result<Self> {
        rate.validate()?;
        let mut t = Self { rate, grid: Vec::new() };
        if matches!(t.rate, RateFunction::Tabulated { .. }) {
            let radius = t.rate.radius();
            let phis: Vec<f64> = if radius.is_finite() {
                (1..=40).map(|j| radius * (1.0 - 0.5f64.powi(j))).collect()
            } else {
                (0..=48).map(|j| 1e-3 * 2f64.powf(j as f64 / 2.0)).collect()
            };
            for phi in phis {
                match t.series_moments(phi) {
                    Ok(m) => t.grid.push((phi, m.mean)),
                    Err(_) => break,
                }
            }
        }
        Ok(t)
    }

    pub fn rate(&self) -> &RateFunction {
        &self.rate
    }

    pub fn g_star(&self) -> f64 {
        self.rate.g_star()
    }

    pub fn radius(&self) -> f64 {
        self.rate.radius()
    }

    fn check_phi(&self, phi: f64) -> Result<()> {
        if !(phi >= 0.0) || !phi.is_finite() || phi >= self.radius() {
            return Err(Error::BeyondRadius { phi });
        }
        Ok(())
    }

    /// The series itself, without closed forms.
    pub fn series_moments(&self, phi: f64) -> Result<SeriesMoments> {
        self.check_phi(phi)?;
        let (mut z, mut m1, mut m2) = (1.0f64, 0.0f64, 0.0f64);
        let mut term = 1.0f64;
        let mut log_scale = 0.0f64;
        let mut k = 0u32;
        loop {
            k += 1;
            if k > MAX_TERMS {
                return Err(Error::BeyondRadius { phi });
            }
            term *= phi / self.rate.g(k);
            let kf = k as f64;
            z += term;
            m1 += kf * term;
            m2 += kf * kf * term;
            if term > RESCALE {
                term /= RESCALE;
                z /= RESCALE;
                m1 /= RESCALE;
                m2 /= RESCALE;
                log_scale += RESCALE.ln();
            }
            let q = phi / self.rate.inf_beyond(k);
            if q < 1.0 {
                let bound = term * (kf + 1.0).powi(2) * q * (1.0 + q) / (1.0 - q).powi(3);
                if bound <= TAIL_TOL * z {
                    break;
                }
            }
        }
        let mean = m1 / z;
        Ok(SeriesMoments {
            log_z: z.ln() + log_scale,
            mean,
            variance: (m2 / z - mean * mean).max(0.0),
            truncation: k,
        })
    }

    /// `Z(φ) = Σ_k φ^k / g(k)!`.
    pub fn partition_z(&self, phi: f64) -> Result<f64> {
        self.check_phi(phi)?;
        match self.rate {
            RateFunction::Linear => Ok(phi.exp()),
            RateFunction::Indicator => Ok(1.0 / (1.0 - phi)),
            _ => Ok(self.series_moments(phi)?.log_z.exp()),
        }
    }

    /// `R(φ) = E_{ν̄_φ}[η_x]`.
    pub fn mean_density(&self, phi: f64) -> Result<f64> {
        self.check_phi(phi)?;
        match self.rate {
            RateFunction::Linear => Ok(phi),
            RateFunction::Indicator => Ok(phi / (1.0 - phi)),
            _ => Ok(self.series_moments(phi)?.mean),
        }
    }

    /// `Ψ = R⁻¹`, the fugacity at density `α`.
    pub fn fugacity(&self, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::DensityOutOfRange { alpha });
        }
        match self.rate {
            RateFunction::Linear => Ok(alpha),
            RateFunction::Indicator => Ok(alpha / (1.0 + alpha)),
            _ if alpha == 0.0 => Ok(0.0),
            _ => self.invert_numeric(alpha),
        }
    }

    fn invert_numeric(&self, alpha: f64) -> Result<f64> {
        let (mut lo, mut hi) = (0.0, f64::NAN);
        for &(phi, r) in &self.grid {
            if r < alpha {
                lo = phi;
            } else {
                hi = phi;
                break;
            }
        }
        if hi.is_nan() {
            // beyond the cached grid
            let radius = self.radius();
            let mut step = 1;
            loop {
                let cand = if radius.is_finite() { radius * (1.0 - 0.5f64.powi(40 + step)) } else { lo.max(1.0) * 2.0 };
                let m = self.series_moments(cand).map_err(|_| Error::DensityOutOfRange { alpha })?;
                if m.mean >= alpha {
                    hi = cand;
                    break;
                }
                lo = cand;
                step += 1;
                if step > 200 {
                    return Err(Error::DensityOutOfRange { alpha });
                }
            }
        }
        let tol = 1e-13 * alpha.max(1.0);
        let mut phi = 0.5 * (lo + hi);
        for _ in 0..300 {
            let m = self.series_moments(phi)?;
            let f = m.mean - alpha;
            if f.abs() <= tol {
                return Ok(phi);
            }
            if f < 0.0 {
                lo = phi;
            } else {
                hi = phi;
            }
            // dR/dφ = Var/φ
            let slope = m.variance / phi;
            let newton = phi - f / slope;
            phi = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(phi);
            }
        }
        Err(Error::DensityOutOfRange { alpha })
    }

    /// `log(φ^k / g(k)!)`; `−∞` for `φ = 0, k > 0`.
    pub fn log_weight(&self, k: u32, phi: f64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let log_fact: f64 = (1..=k).map(|j| self.rate.g(j).ln()).sum();
        k as f64 * phi.ln() - log_fact
    }

    /// Inverse-CDF draw from the marginal `ν̄_φ`.
    pub fn sample_occupation<R: Rng + ?Sized>(&self, phi: f64, rng: &mut R) -> Result<u32> {
        self.check_phi(phi)?;
        if phi == 0.0 {
            return Ok(0);
        }
        let u: f64 = rng.random();
        let (log_z, cap) = match self.rate {
            RateFunction::Linear if phi < 700.0 => (phi, u32::MAX),
            RateFunction::Indicator => (-(1.0 - phi).ln(), u32::MAX),
            _ => {
                let m = self.series_moments(phi)?;
                (m.log_z, m.truncation)
            }
        };
        let ln_phi = phi.ln();
        let mut log_p = -log_z;
        let mut cdf = log_p.exp();
        let mut k = 0u32;
        while cdf <= u && k < cap {
            k += 1;
            log_p += ln_phi - self.rate.g(k).ln();
            let p = log_p.exp();
            cdf += p;
            // past the mode with negligible mass left: rounding, stop here
            if p < 1e-300 && (k as f64) > phi {
                break;
            }
        }
        Ok(k)
    }
}

impl Response for ThermoTables {
    fn apply(&self, rho: f64) -> Result<f64> {
        // explicit steps may leave roundoff-level negatives
        if rho < 0.0 && rho > -1e-12 {
            return Ok(0.0);
        }
        self.fugacity(rho)
    }

    fn lipschitz(&self) -> f64 {
        self.g_star()
    }

    fn is_identity(&self) -> bool {
        matches!(self.rate, RateFunction::Linear)
    }
}
