//! Reference solvers for `∂t ρ = ∇·D∇Ψ(ρ)` on the flat torus `R^d / UZ^d`.
//!
//! Fields live on a uniform grid in fractional coordinates `s = U⁻¹x`, where
//! the operator becomes `∇_s·D̃∇_s` with `D̃ = U⁻¹DU⁻ᵀ`.

mod grid;
mod solver;

pub use grid::{l1_distance, TorusField, TorusGrid};
pub use solver::{
    default_time_step, effective_matrix, solve_fd, spectral_solve, stability_limit, EffectiveMatrix,
    Identity, Response,
};
