#![allow(dead_code)]

use std::sync::Arc;

use crystal_hydro::lattice::{Edge, QuotientGraph};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn graph(d: usize, nv: usize, edges: &[(usize, usize, &[i64], f64)]) -> Arc<QuotientGraph> {
    Arc::new(
        QuotientGraph::new(
            d,
            (0..nv).map(|i| format!("x{i}")).collect(),
            edges
                .iter()
                .map(|&(t, h, s, w)| Edge { tail: t, head: h, shift: s.to_vec(), weight: w })
                .collect(),
        )
        .unwrap(),
    )
}

/// Connected, full-rank quotient graph with random shifts and weights in [0.2, 3].
pub fn random_graph(seed: u64, d: usize, nv: usize) -> Arc<QuotientGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let shift = |rng: &mut ChaCha8Rng| (0..d).map(|_| rng.random_range(-1..=1)).collect::<Vec<i64>>();
    for v in 1..nv {
        let t = rng.random_range(0..v);
        edges.push(Edge { tail: t, head: v, shift: shift(&mut rng), weight: rng.random_range(0.2..3.0) });
    }
    for k in 0..d {
        let v = rng.random_range(0..nv);
        let mut s = vec![0; d];
        s[k] = 1;
        edges.push(Edge { tail: v, head: v, shift: s, weight: rng.random_range(0.2..3.0) });
    }
    for _ in 0..rng.random_range(0..=nv) {
        let (t, h) = (rng.random_range(0..nv), rng.random_range(0..nv));
        let s = shift(&mut rng);
        if t == h && s.iter().all(|&c| c == 0) {
            continue;
        }
        edges.push(Edge { tail: t, head: h, shift: s, weight: rng.random_range(0.2..3.0) });
    }
    let g = QuotientGraph::new(d, (0..nv).map(|i| format!("v{i}")).collect(), edges).unwrap();
    assert!(g.validate().is_empty());
    Arc::new(g)
}

/// Random well-conditioned basis `U`.
pub fn random_basis(seed: u64, d: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    loop {
        let m = DMatrix::from_fn(d, d, |i, j| {
            let base: f64 = if i == j { 1.0 } else { 0.0 };
            base + rng.random_range(-0.6..0.6)
        });
        if m.determinant().abs() > 0.2 {
            return m;
        }
    }
}

/// Random integer matrix with determinant ±1.
pub fn random_unimodular(seed: u64, d: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51ed_2701);
    let mut a = DMatrix::<f64>::identity(d, d);
    if d == 1 {
        return a * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    }
    for _ in 0..6 {
        let i = rng.random_range(0..d);
        let mut j = rng.random_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let c = rng.random_range(-2..=2) as f64;
        let row_j = a.row(j).clone_owned();
        let mut row_i = a.row_mut(i);
        row_i += row_j * c;
    }
    if rng.random_bool(0.5) {
        a.row_mut(0).neg_mut();
    }
    a
}
