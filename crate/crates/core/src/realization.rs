//! Periodic realizations of a crystal lattice in `R^d`.
//!
//! A realization is fixed by a lattice basis `U = (u₁ … u_d)` and the
//! positions of the fundamental-domain vertices; every other vertex follows
//! from periodicity, `Φ(σx) = Φ(x) + Uσ`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::lattice::{GroupElement, QuotientGraph};
use crate::{Error, Result};

const SINGULAR_TOL: f64 = 1e-12;

/// Lattice basis `U` with columns `u₁ … u_d`, and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl Basis {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("basis must be a nonempty square matrix".into()));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("basis entries must be finite".into()));
        }
        let scale = matrix.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let det = matrix.determinant();
        if scale == 0.0 || det.abs() <= SINGULAR_TOL * scale.powi(matrix.nrows() as i32) {
            return Err(Error::Singular("lattice basis"));
        }
        let inverse = matrix.clone().try_inverse().ok_or(Error::Singular("lattice basis"))?;
        Ok(Self { matrix, inverse })
    }

    /// Builds `U` from its column vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.len();
        if columns.iter().any(|c| c.len() != d) {
            return Err(Error::InvalidArgument(format!("basis must be {d} vectors of length {d}")));
        }
        Self::from_matrix(DMatrix::from_fn(d, d, |i, j| columns[j][i]))
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: DMatrix::identity(d, d), inverse: DMatrix::identity(d, d) }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        self.matrix.column_iter().map(|c| c.iter().copied().collect()).collect()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    /// Volume of the fundamental parallelotope, `|det U|`.
    pub fn volume(&self) -> f64 {
        self.determinant().abs()
    }

    /// `φ(σ) = Uσ`.
    pub fn lattice_vector(&self, shift: &[i64]) -> DVector<f64> {
        let s = DVector::from_iterator(shift.len(), shift.iter().map(|&k| k as f64));
        &self.matrix * s
    }

    /// Basis coordinates `U⁻¹x`.
    pub fn fractional(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.inverse * x
    }

    /// The basis `A·U`.
    pub fn transformed(&self, a: &DMatrix<f64>) -> Result<Self> {
        Self::from_matrix(a * &self.matrix)
    }
}

/// A periodic realization `Φ` of the lattice encoded by a quotient graph.
#[derive(Debug, Clone)]
pub struct Realization {
    graph: Arc<QuotientGraph>,
    basis: Basis,
    positions: Vec<DVector<f64>>,
}

impl Realization {
    pub fn new(graph: Arc<QuotientGraph>, basis: Basis, positions: Vec<DVector<f64>>) -> Result<Self> {
        let d = graph.dimension();
        if basis.dimension() != d {
            return Err(Error::DimensionMismatch { expected: d, found: basis.dimension() });
        }
        if positions.len() != graph.vertex_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} positions, got {}",
                graph.vertex_count(),
                positions.len()
            )));
        }
        for p in &positions {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: p.len() });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("positions must be finite".into()));
            }
        }
        Ok(Self { graph, basis, positions })
    }

    pub fn graph(&self) -> &QuotientGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<QuotientGraph> {
        &self.graph
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn positions(&self) -> &[DVector<f64>] {
        &self.positions
    }

    pub fn position(&self, v0: usize) -> &DVector<f64> {
        &self.positions[v0]
    }

    /// Same realization with every position moved by `offset`.
    pub fn translated(&self, offset: &DVector<f64>) -> Self {
        Self {
            graph: Arc::clone(&self.graph),
            basis: self.basis.clone(),
            positions: self.positions.iter().map(|p| p + offset).collect(),
        }
    }

    /// Same realization with positions and basis scaled by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(Self {
            graph: Arc::clone(&self.graph),
            basis: Basis::from_matrix(self.basis.matrix() * c)?,
            positions: self.positions.iter().map(|p| p * c).collect(),
        })
    }
}

/// `v(e) = Φ(te) − Φ(oe) = x(head) − x(tail) + Uγ(e)`.
pub fn edge_vector(r: &Realization, dart: usize) -> DVector<f64> {
    let e = r.graph.dart(dart);
    &r.positions[e.head] - &r.positions[e.tail] + r.basis.lattice_vector(&e.shift)
}

/// Symmetric positive-definite diffusion matrix `D_Φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionMatrix(DMatrix<f64>);

impl DiffusionMatrix {
    /// Accepts a matrix that is symmetric (to 1e-12 relative) and positive definite.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidArgument("diffusion matrix must be square".into()));
        }
        let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if (&m - m.transpose()).iter().any(|x| x.abs() > 1e-12 * scale.max(1.0)) {
            return Err(Error::NotPositiveDefinite("matrix is not symmetric"));
        }
        let sym = (&m + m.transpose()) * 0.5;
        if sym.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite("cholesky factorisation failed"));
        }
        Ok(Self(sym))
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, value))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Eigen-decomposition `D = Pᵀ diag(λ) P` with `λ` sorted descending.
    ///
    /// The rows of `P` are orthonormal eigenvectors, each signed so that its
    /// largest-magnitude entry is positive.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        let d = self.dimension();
        let eig = SymmetricEigen::new(self.0.clone());
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let lambdas = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut p = DMatrix::zeros(d, d);
        for (row, &i) in order.iter().enumerate() {
            let v = eig.eigenvectors.column(i);
            let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            for j in 0..d {
                p[(row, j)] = sign * v[j];
            }
        }
        (lambdas, p)
    }
}

/// `D_Φ = (1/|V₀|) Σ_{darts e} p(e) v(e) v(e)ᵀ`, summing both orientations.
pub fn diffusion_matrix(r: &Realization) -> DiffusionMatrix {
    let d = r.graph.dimension();
    let mut m = DMatrix::zeros(d, d);
    for (i, e) in r.graph.darts().iter().enumerate() {
        let v = edge_vector(r, i);
        m += e.weight * &v * v.transpose();
    }
    m /= r.graph.vertex_count() as f64;
    DiffusionMatrix(m)
}

/// `E(Φ) = ½ Σ_{darts e} p(e) ‖v(e)‖²`.
pub fn energy(r: &Realization) -> f64 {
    0.5 * r
        .graph
        .darts()
        .iter()
        .enumerate()
        .map(|(i, e)| e.weight * edge_vector(r, i).norm_squared())
        .sum::<f64>()
}

/// Weighted tension `Σ_{e ∈ E_v} p(e) v(e)` at each vertex of `V₀`.
pub fn vertex_tensions(r: &Realization) -> Vec<DVector<f64>> {
    let d = r.graph.dimension();
    (0..r.graph.vertex_count())
        .map(|v| {
            r.graph.out_darts(v).iter().fold(DVector::zeros(d), |acc, &i| {
                acc + r.graph.dart(i).weight * edge_vector(r, i)
            })
        })
        .collect()
}

/// Largest `‖Σ_{e∈E_v} p(e) v(e)‖∞` over `V₀`; zero for a harmonic realization.
pub fn harmonic_residual(r: &Realization) -> f64 {
    vertex_tensions(r).iter().map(|t| t.amax()).fold(0.0, f64::max)
}

/// Harmonic realization for the lattice group spanned by `basis`, pinned at
/// `x(x₀) = 0` for the first vertex.
///
/// Solves `L x = b` with the weighted graph Laplacian `L = Deg − Adj` and
/// `b(v) = Σ_{e ∈ E_v} p(e) Uγ(e)`, all `d` coordinates sharing one Cholesky
/// factorisation of `L` with the pinned row and column removed.
pub fn solve_harmonic(graph: Arc<QuotientGraph>, basis: Basis) -> Result<Realization> {
    let d = graph.dimension();
    if basis.dimension() != d {
        return Err(Error::DimensionMismatch { expected: d, found: basis.dimension() });
    }
    let n = graph.vertex_count();
    let mut positions = vec![DVector::zeros(d); n];
    if n > 1 {
        let k = n - 1;
        let mut lap = DMatrix::<f64>::zeros(k, k);
        let mut rhs = DMatrix::<f64>::zeros(k, d);
        for e in graph.darts() {
            let u = basis.lattice_vector(&e.shift);
            if e.tail == 0 {
                continue;
            }
            let row = e.tail - 1;
            if e.head != e.tail {
                lap[(row, row)] += e.weight;
                if e.head != 0 {
                    lap[(row, e.head - 1)] -= e.weight;
                }
            }
            for c in 0..d {
                rhs[(row, c)] += e.weight * u[c];
            }
        }
        let chol = lap.cholesky().ok_or(Error::Singular("pinned weighted Laplacian"))?;
        let sol = chol.solve(&rhs);
        for (v, x) in positions.iter_mut().enumerate().skip(1) {
            *x = sol.row(v - 1).transpose();
        }
    }
    Realization::new(graph, basis, positions)
}

/// Rescales a harmonic realization to the standard (energy-minimising at
/// fixed covolume) one.
///
/// With `D₀ = Pᵀ diag(λ) P`, the transform is
/// `A = diag((λ₁⋯λ_d / λ_i^d)^{1/(2d)}) · P`, so `|det A| = 1` and the new
/// diffusion matrix `A D₀ Aᵀ` equals `(det D₀)^{1/d} I`.
pub fn standard_realization(r0: &Realization) -> Result<(Realization, DMatrix<f64>)> {
    let d0 = DiffusionMatrix::new(diffusion_matrix(r0).0)?;
    let a = standard_transform(&d0)?;
    let basis = r0.basis.transformed(&a)?;
    let r = solve_harmonic(Arc::clone(&r0.graph), basis)?;
    Ok((r, a))
}

/// The matrix `A` of [`standard_realization`] for a given diffusion matrix.
pub fn standard_transform(d0: &DiffusionMatrix) -> Result<DMatrix<f64>> {
    let dim = d0.dimension();
    let (lambdas, p) = d0.eigen();
    if lambdas.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite("nonpositive eigenvalue"));
    }
    // work in logs: (Πλ / λ_i^d)^{1/(2d)}
    let log_prod: f64 = lambdas.iter().map(|l| l.ln()).sum();
    let scale = DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        lambdas
            .iter()
            .map(|l| ((log_prod - dim as f64 * l.ln()) / (2.0 * dim as f64)).exp()),
    ));
    Ok(scale * p)
}

/// Basis-change law for the limit equation: `A D Aᵀ`.
pub fn transform_diffusion(d: &DiffusionMatrix, a: &DMatrix<f64>) -> Result<DiffusionMatrix> {
    if a.nrows() != d.dimension() || a.ncols() != d.dimension() {
        return Err(Error::DimensionMismatch { expected: d.dimension(), found: a.nrows() });
    }
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || a.determinant().abs() <= SINGULAR_TOL * scale.powi(a.nrows() as i32) {
        return Err(Error::Singular("basis transformation"));
    }
    DiffusionMatrix::new(a * d.matrix() * a.transpose())
}

/// A point of the flat torus `R^d / φ(Γ)`, stored by its canonical
/// representative in the fundamental parallelotope.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    coords: DVector<f64>,
    fractional: DVector<f64>,
}

impl TorusPoint {
    /// Reduces an arbitrary point of `R^d` modulo the lattice.
    pub fn reduce(basis: &Basis, x: &DVector<f64>) -> Self {
        let fractional = basis.fractional(x).map(wrap_unit);
        Self::from_fractional(basis, fractional)
    }

    /// Point with the given fractional coordinates (taken modulo 1).
    pub fn from_fractional(basis: &Basis, fractional: DVector<f64>) -> Self {
        let fractional = fractional.map(wrap_unit);
        let coords = basis.matrix() * &fractional;
        Self { coords, fractional }
    }

    /// Physical coordinates inside the fundamental parallelotope.
    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    /// Basis coordinates in `[0, 1)^d`.
    pub fn fractional(&self) -> &DVector<f64> {
        &self.fractional
    }
}

fn wrap_unit(s: f64) -> f64 {
    let w = s - s.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// N-scaling map `Φ_N(v₀, σ) = (x(v₀) + Uσ)/N mod φ(Γ)`.
pub fn scaled_position(r: &Realization, n: usize, v0: usize, sigma: &GroupElement) -> TorusPoint {
    let x = (&r.positions[v0] + r.basis.lattice_vector(sigma.coords())) / n as f64;
    TorusPoint::reduce(&r.basis, &x)
}
