use std::f64::consts::PI;

use crystal_hydro::pde::{l1_distance, solve_fd, spectral_solve, Identity, Response, TorusField, TorusGrid};
use crystal_hydro::realization::{Basis, DiffusionMatrix};
use crystal_hydro::Result;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `0.5 + Σ a cos(2π k·s + θ)` over a few random modes with `|k_i| ≤ 2`.
fn band_limited(grid: &TorusGrid, seed: u64) -> TorusField {
    let d = grid.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(Vec<f64>, f64, f64)> = (0..4)
        .map(|_| {
            let k = (0..d).map(|_| rng.random_range(-2..=2) as f64).collect();
            (k, rng.random_range(0.0..0.1), rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    grid.sample(|p| {
        let s = p.fractional();
        0.5 + modes
            .iter()
            .map(|(k, a, th)| a * (2.0 * PI * k.iter().zip(s.iter()).map(|(x, y)| x * y).sum::<f64>() + th).cos())
            .sum::<f64>()
    })
    .unwrap()
}

fn max_err(a: &TorusField, b: &TorusField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn hexagonal_weighted() -> (Basis, DiffusionMatrix) {
    let u = Basis::from_columns(&[vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
    let d = DiffusionMatrix::new(DMatrix::from_row_slice(2, 2, &[5.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0, 2.0 / 9.0])).unwrap();
    (u, d)
}

fn fd_error(basis: &Basis, d: &DiffusionMatrix, m: usize, t: f64, seed: u64) -> f64 {
    let grid = TorusGrid::new(basis.clone(), m).unwrap();
    let rho0 = band_limited(&grid, seed);
    let fd = solve_fd(&rho0, d, &Identity, t, None).unwrap();
    let sp = spectral_solve(&rho0, d, &Identity, t).unwrap();
    max_err(&fd, &sp)
}

#[test]
fn fd_matches_spectral_one_dimension() {
    let basis = Basis::from_columns(&[vec![2.0]]).unwrap();
    let d = DiffusionMatrix::scalar(8.0 / 3.0).unwrap();
    let fine = fd_error(&basis, &d, 256, 0.05, 7);
    let coarse = fd_error(&basis, &d, 128, 0.05, 7);
    assert!(fine <= 1e-4, "fine error {fine}");
    assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
}

#[test]
fn fd_matches_spectral_two_dimensions_with_cross_terms() {
    let (basis, d) = hexagonal_weighted();
    let fine = fd_error(&basis, &d, 128, 0.05, 11);
    let coarse = fd_error(&basis, &d, 64, 0.05, 11);
    assert!(fine <= 1e-4, "fine error {fine}");
    assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
}

#[test]
fn mass_is_conserved() {
    let (basis, d) = hexagonal_weighted();
    let grid = TorusGrid::new(basis, 32).unwrap();
    let rho0 = band_limited(&grid, 3);
    let t = 0.5;
    let fd = solve_fd(&rho0, &d, &Identity, t, None).unwrap();
    let sp = spectral_solve(&rho0, &d, &Identity, t).unwrap();
    let m0 = rho0.mass();
    assert!((fd.mass() - m0).abs() / m0 / t <= 1e-12);
    assert!((sp.mass() - m0).abs() / m0 <= 1e-13);
}

#[test]
fn reflection_symmetry_is_grid_exact() {
    // ρ₀ and D̃ diagonal are invariant under s₁ ↦ −s₁
    let grid = TorusGrid::new(Basis::identity(2), 16).unwrap();
    let rho0 = grid.sample(|p| {
        let s = p.fractional();
        0.5 + 0.2 * (2.0 * PI * s[0]).cos() * (2.0 * PI * s[1]).sin() + 0.1 * (4.0 * PI * s[0]).cos()
    })
    .unwrap();
    let d = DiffusionMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.4])).unwrap();
    let out = solve_fd(&rho0, &d, &Identity, 0.05, None).unwrap();
    let m = 16i64;
    for i in 0..grid.cell_count() {
        let k = grid.cell_coords(i);
        // cell centres (k+½)/M reflect to cell M−1−k
        let j = grid.cell_index(&[m - 1 - k[0] as i64, k[1] as i64]);
        assert!((rho0.values()[i] - rho0.values()[j]).abs() < 1e-14);
        assert!((out.values()[i] - out.values()[j]).abs() < 1e-14);
    }
}

struct Saturating;

impl Response for Saturating {
    fn apply(&self, rho: f64) -> Result<f64> {
        Ok(rho / (1.0 + rho))
    }
    fn lipschitz(&self) -> f64 {
        1.0
    }
}

#[test]
fn saturating_response_stays_nonnegative_and_conserves_mass() {
    let (basis, d) = hexagonal_weighted();
    let grid = TorusGrid::new(basis, 24).unwrap();
    let rho0 = grid.sample(|p| if p.fractional()[0] < 0.5 { 2.0 } else { 0.0 }).unwrap();
    let out = solve_fd(&rho0, &d, &Saturating, 0.2, None).unwrap();
    assert!(out.min() >= 0.0);
    assert!((out.mass() - rho0.mass()).abs() / rho0.mass() <= 1e-12);
    assert!(l1_distance(&out, &rho0).unwrap() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn maximum_principle_diagonal(seed in any::<u64>(), d1 in 0.1f64..2.0, d2 in 0.1f64..2.0, t in 0.0f64..0.2) {
        let grid = TorusGrid::new(Basis::identity(2), 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho0 = TorusField::new(grid.clone(), (0..grid.cell_count()).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
        let d = DiffusionMatrix::new(DMatrix::from_row_slice(2, 2, &[d1, 0.0, 0.0, d2])).unwrap();
        let out = solve_fd(&rho0, &d, &Identity, t, None).unwrap();
        prop_assert!(out.check_bounds(rho0.min(), rho0.max(), 1e-10).is_ok());
    }

    #[test]
    fn maximum_principle_smooth_anisotropic(seed in any::<u64>(), t in 0.0f64..0.5) {
        let (basis, d) = hexagonal_weighted();
        let grid = TorusGrid::new(basis, 32).unwrap();
        let rho0 = band_limited(&grid, seed);
        let out = solve_fd(&rho0, &d, &Identity, t, None).unwrap();
        prop_assert!(out.check_bounds(rho0.min(), rho0.max(), 1e-10).is_ok());
    }

    #[test]
    fn spectral_preserves_mean(seed in any::<u64>(), t in 0.0f64..1.0) {
        let grid = TorusGrid::new(Basis::from_columns(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap(), 16).unwrap();
        let rho0 = band_limited(&grid, seed);
        let d = DiffusionMatrix::new(DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 2.0])).unwrap();
        let out = spectral_solve(&rho0, &d, &Identity, t).unwrap();
        prop_assert!((out.mean() - rho0.mean()).abs() < 1e-13);
    }
}
