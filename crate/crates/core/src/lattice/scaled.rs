use std::sync::Arc;

use super::group::{ball_offsets, GroupElement};
use super::quotient::QuotientGraph;
use crate::{Error, Result};

/// The N-scaling finite graph `X_N = X/NΓ`.
///
/// Vertices are pairs `(v₀, σ)` with `σ ∈ (Z/NZ)^d`, flattened row-major
/// over `σ` (first coordinate most significant) and then over `v₀`:
///
/// ```text
/// cell(σ)      = Σ_i σ_i N^(d-1-i)
/// vertex(v₀,σ) = cell(σ) · |V₀| + v₀
/// dart(e,σ)    = cell(σ) · |E₀| + e
/// ```
///
/// Dart `(e, σ)` runs from `(tail(e), σ)` to `(head(e), σ + γ(e) mod N)`.
#[derive(Debug, Clone)]
pub struct ScaledGraph {
    base: Arc<QuotientGraph>,
    scale: usize,
    cells: usize,
    heads: Vec<u32>,
    inverses: Vec<u32>,
}

/// Builds `X_N` from the quotient graph.
pub fn build_scaled_graph(base: Arc<QuotientGraph>, n: usize) -> Result<ScaledGraph> {
    if n == 0 {
        return Err(Error::InvalidArgument("scale N must be at least 1".into()));
    }
    let d = base.dimension();
    let cells = n
        .checked_pow(d as u32)
        .filter(|c| c.checked_mul(base.darts().len()).is_some_and(|m| m < u32::MAX as usize))
        .ok_or_else(|| Error::InvalidArgument(format!("N = {n} is too large for d = {d}")))?;
    let nv = base.vertex_count();
    let ne = base.darts().len();
    let mut heads = Vec::with_capacity(cells * ne);
    let mut inverses = Vec::with_capacity(cells * ne);
    for cell in 0..cells {
        let sigma = cell_coords(cell, n, d);
        for dart in base.darts() {
            let target = cell_index(&sigma.add(&GroupElement(dart.shift.clone())), n);
            heads.push((target * nv + dart.head) as u32);
            inverses.push((target * ne + dart.inverse) as u32);
        }
    }
    Ok(ScaledGraph { base, scale: n, cells, heads, inverses })
}

fn cell_index(sigma: &GroupElement, n: usize) -> usize {
    let n_i = n as i64;
    sigma.coords().iter().fold(0usize, |acc, c| acc * n + c.rem_euclid(n_i) as usize)
}

fn cell_coords(mut cell: usize, n: usize, d: usize) -> GroupElement {
    let mut coords = vec![0i64; d];
    for c in coords.iter_mut().rev() {
        *c = (cell % n) as i64;
        cell /= n;
    }
    GroupElement(coords)
}

impl ScaledGraph {
    pub fn base(&self) -> &QuotientGraph {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<QuotientGraph> {
        &self.base
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn dimension(&self) -> usize {
        self.base.dimension()
    }

    /// `|Γ_N| = N^d`.
    pub fn cell_count(&self) -> usize {
        self.cells
    }

    pub fn vertex_count(&self) -> usize {
        self.cells * self.base.vertex_count()
    }

    pub fn dart_count(&self) -> usize {
        self.heads.len()
    }

    pub fn vertex_index(&self, v0: usize, sigma: &GroupElement) -> usize {
        cell_index(sigma, self.scale) * self.base.vertex_count() + v0
    }

    /// Inverse of [`ScaledGraph::vertex_index`], with `σ` reduced.
    pub fn vertex_parts(&self, flat: usize) -> (usize, GroupElement) {
        let nv = self.base.vertex_count();
        (flat % nv, cell_coords(flat / nv, self.scale, self.dimension()))
    }

    pub fn cell_of(&self, sigma: &GroupElement) -> usize {
        cell_index(sigma, self.scale)
    }

    pub fn cell_element(&self, cell: usize) -> GroupElement {
        cell_coords(cell, self.scale, self.dimension())
    }

    /// Base dart of a scaled dart.
    pub fn base_dart(&self, dart: usize) -> usize {
        dart % self.base.darts().len()
    }

    pub fn tail(&self, dart: usize) -> usize {
        let ne = self.base.darts().len();
        (dart / ne) * self.base.vertex_count() + self.base.dart(dart % ne).tail
    }

    pub fn head(&self, dart: usize) -> usize {
        self.heads[dart] as usize
    }

    pub fn inverse(&self, dart: usize) -> usize {
        self.inverses[dart] as usize
    }

    pub fn weight(&self, dart: usize) -> f64 {
        self.base.dart(self.base_dart(dart)).weight
    }

    /// Darts leaving `vertex`.
    pub fn out_darts(&self, vertex: usize) -> impl Iterator<Item = usize> + '_ {
        let nv = self.base.vertex_count();
        let ne = self.base.darts().len();
        let offset = (vertex / nv) * ne;
        self.base.out_darts(vertex % nv).iter().map(move |&e| offset + e)
    }
}

/// Vertices of the translated ball `center · B(D_{x₀}, R)`, sorted by index.
pub fn ball_vertices(sg: &ScaledGraph, center: &GroupElement, radius: f64) -> Vec<usize> {
    let nv = sg.base().vertex_count();
    let mut out: Vec<usize> = ball_offsets(sg.dimension(), sg.scale(), radius)
        .iter()
        .flat_map(|s| {
            let base = sg.cell_of(&s.add(center)) * nv;
            (0..nv).map(move |v| base + v)
        })
        .collect();
    out.sort_unstable();
    out
}
