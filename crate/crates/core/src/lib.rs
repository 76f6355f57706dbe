//! Crystal lattices built from weighted quotient graphs, their harmonic and
//! standard realizations, and the hydrodynamic behaviour of exclusion and
//! zero-range particle systems on the N-scaled finite graphs.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: quotient graphs with integer shift vectors, the N-scaling
//!   finite graph `X_N` and the word metric on `Γ_N = (Z/NZ)^d`.
//! - [`realization`]: periodic realizations, diffusion matrices, energies,
//!   the harmonic solve and the standard-realization rescaling.
//! - [`stochastic`]: zero-range thermodynamics (`Z`, `R`, `Ψ`), product
//!   measure sampling, exact kinetic Monte Carlo, stationarity checks and
//!   empirical-density estimators.
//! - [`pde`]: reference solvers for `∂t ρ = ∇·D∇Ψ(ρ)` on the flat torus.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lattice;
pub mod pde;
pub mod realization;
pub mod stochastic;

pub use error::{Error, Result};
