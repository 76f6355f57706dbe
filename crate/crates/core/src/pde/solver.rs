use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::{TorusField, TorusGrid};
use crate::realization::{Basis, DiffusionMatrix};
use crate::{Error, Result};

/// The nonlinearity `Ψ` in `∂t ρ = ∇·D∇Ψ(ρ)`.
pub trait Response: Sync {
    fn apply(&self, rho: f64) -> Result<f64>;

    /// Lipschitz constant of `Ψ` on `[0, ∞)`.
    fn lipschitz(&self) -> f64;

    fn is_identity(&self) -> bool {
        false
    }
}

/// `Ψ(ρ) = ρ`: the heat equation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Response for Identity {
    fn apply(&self, rho: f64) -> Result<f64> {
        Ok(rho)
    }

    fn lipschitz(&self) -> f64 {
        1.0
    }

    fn is_identity(&self) -> bool {
        true
    }
}

/// Diffusion tensor in fractional coordinates, `D̃ = U⁻¹ D U⁻ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveMatrix(DMatrix<f64>);

impl EffectiveMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.0.symmetric_eigenvalues().max()
    }
}

pub fn effective_matrix(d: &DiffusionMatrix, basis: &Basis) -> Result<EffectiveMatrix> {
    if d.dimension() != basis.dimension() {
        return Err(Error::DimensionMismatch { expected: basis.dimension(), found: d.dimension() });
    }
    let inv = basis.inverse();
    let m = DiffusionMatrix::new(inv * d.matrix() * inv.transpose())?;
    Ok(EffectiveMatrix(m.matrix().clone()))
}

/// Largest stable explicit step `h²/(2 d λ_max(D̃) max(1, L))`.
pub fn stability_limit(grid: &TorusGrid, dtilde: &EffectiveMatrix, lipschitz: f64) -> f64 {
    let h = 1.0 / grid.resolution() as f64;
    h * h / (2.0 * grid.dimension() as f64 * dtilde.max_eigenvalue() * lipschitz.max(1.0))
}

/// Default step, half the stability limit.
pub fn default_time_step(grid: &TorusGrid, dtilde: &EffectiveMatrix, lipschitz: f64) -> f64 {
    0.5 * stability_limit(grid, dtilde, lipschitz)
}

/// Weighted neighbour offsets of the conservative stencil for `Σ D̃_ij ∂_i∂_j`.
struct Stencil {
    center: f64,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Stencil {
    fn new(grid: &TorusGrid, dtilde: &EffectiveMatrix) -> Self {
        let d = grid.dimension();
        let h2 = (1.0 / grid.resolution() as f64).powi(2);
        let dm = dtilde.matrix();
        let shifted = |offset: &[i64]| -> Vec<u32> {
            (0..grid.cell_count())
                .map(|i| {
                    let k: Vec<i64> = grid.cell_coords(i).iter().zip(offset).map(|(&c, &o)| c as i64 + o).collect();
                    grid.cell_index(&k) as u32
                })
                .collect()
        };
        let unit = |i: usize, s: i64| {
            let mut o = vec![0i64; d];
            o[i] = s;
            o
        };
        let mut center = 0.0;
        let mut terms = Vec::new();
        for i in 0..d {
            let w = dm[(i, i)] / h2;
            center -= 2.0 * w;
            terms.push((w, shifted(&unit(i, 1))));
            terms.push((w, shifted(&unit(i, -1))));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                // 2 D̃_ij ∂_i∂_j with the 4-corner stencil
                let w = 2.0 * dm[(i, j)] / (4.0 * h2);
                if w == 0.0 {
                    continue;
                }
                for (si, sj, sign) in [(1, 1, 1.0), (-1, -1, 1.0), (1, -1, -1.0), (-1, 1, -1.0)] {
                    let mut o = vec![0i64; d];
                    o[i] = si;
                    o[j] = sj;
                    terms.push((sign * w, shifted(&o)));
                }
            }
        }
        Self { center, terms }
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(w) {
            *o = self.center * x;
        }
        for (coef, idx) in &self.terms {
            for (o, &j) in out.iter_mut().zip(idx) {
                *o += coef * w[j as usize];
            }
        }
    }
}

/// Explicit finite-difference solve of `∂t ρ = ∇·D∇Ψ(ρ)` up to time `t`.
///
/// Works in fractional coordinates with `D̃ = U⁻¹DU⁻ᵀ`. The requested (or
/// default) step is shortened so that an integer number of steps lands on `t`.
pub fn solve_fd(
    rho0: &TorusField,
    d: &DiffusionMatrix,
    response: &dyn Response,
    t: f64,
    dt: Option<f64>,
) -> Result<TorusField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite and nonnegative, got {t}")));
    }
    let grid = rho0.grid();
    let dtilde = effective_matrix(d, grid.basis())?;
    let limit = stability_limit(grid, &dtilde, response.lipschitz());
    let dt = match dt {
        Some(dt) if !(dt > 0.0) => return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}"))),
        Some(dt) if dt > limit => return Err(Error::UnstableTimeStep { dt, limit }),
        Some(dt) => dt,
        None => default_time_step(grid, &dtilde, response.lipschitz()),
    };
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let steps = (t / dt).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let stencil = Stencil::new(grid, &dtilde);
    let mut rho = rho0.values().to_vec();
    let mut w = vec![0.0; rho.len()];
    let mut lap = vec![0.0; rho.len()];
    let linear = response.is_identity();
    for _ in 0..steps {
        if linear {
            w.copy_from_slice(&rho);
        } else {
            for (wi, &r) in w.iter_mut().zip(&rho) {
                *wi = response.apply(r)?;
            }
        }
        stencil.apply(&w, &mut lap);
        for (r, l) in rho.iter_mut().zip(&lap) {
            *r += dt * l;
        }
    }
    TorusField::new(grid.clone(), rho)
}

/// Exact Fourier solution of the linear equation `∂t ρ = ∇·D∇ρ`.
///
/// Mode `k` of the grid data is damped by `exp(−4π² kᵀD̃k t)`, using the
/// signed frequency `k ∈ (−M/2, M/2]` on each axis.
pub fn spectral_solve(
    rho0: &TorusField,
    d: &DiffusionMatrix,
    response: &dyn Response,
    t: f64,
) -> Result<TorusField> {
    if !response.is_identity() {
        return Err(Error::NonlinearResponse);
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite and nonnegative, got {t}")));
    }
    let grid = rho0.grid();
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let dtilde = effective_matrix(d, grid.basis())?;
    let m = grid.resolution();
    let dim = grid.dimension();
    let mut data: Vec<Complex64> = rho0.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    transform_axes(&mut data, m, dim, planner.plan_fft_forward(m).as_ref());
    let dm = dtilde.matrix();
    let four_pi2 = 4.0 * std::f64::consts::PI.powi(2);
    for (i, z) in data.iter_mut().enumerate() {
        let k: Vec<f64> = grid
            .cell_coords(i)
            .into_iter()
            .map(|c| if c > m / 2 { c as f64 - m as f64 } else { c as f64 })
            .collect();
        let mut q = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                q += k[a] * dm[(a, b)] * k[b];
            }
        }
        *z *= (-four_pi2 * q * t).exp();
    }
    transform_axes(&mut data, m, dim, planner.plan_fft_inverse(m).as_ref());
    let norm = grid.cell_count() as f64;
    TorusField::new(grid.clone(), data.iter().map(|z| z.re / norm).collect())
}

fn transform_axes(data: &mut [Complex64], m: usize, dim: usize, fft: &dyn rustfft::Fft<f64>) {
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..dim {
        let stride = m.pow((dim - 1 - axis) as u32);
        let block = stride * m;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, z) in line.iter_mut().enumerate() {
                    *z = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, z) in line.iter().enumerate() {
                    data[base + j * stride] = *z;
                }
            }
        }
    }
}
