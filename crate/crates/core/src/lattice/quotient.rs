use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::{Error, Result};

/// An unoriented edge of the quotient graph, listed once.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub shift: Vec<i64>,
    pub weight: f64,
}

/// An oriented edge of `X₀` with its lift data.
#[derive(Debug, Clone, PartialEq)]
pub struct Dart {
    pub tail: usize,
    pub head: usize,
    /// Translation `γ(e) ∈ Z^d` of the head relative to the fundamental domain.
    pub shift: Vec<i64>,
    /// Symmetric conductance `p(e) = p(ē) > 0`.
    pub weight: f64,
    pub inverse: usize,
}

/// Finite weighted quotient graph `X₀ = X/Γ` with its `Z^d` lift data.
///
/// Darts are ordered as the listed edges followed by their inverses, so for
/// `m` listed edges dart `i < m` has inverse `i + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientGraph {
    dimension: usize,
    vertices: Vec<String>,
    darts: Vec<Dart>,
    out_darts: Vec<Vec<usize>>,
}

impl QuotientGraph {
    /// Builds the graph and materialises both orientations of every edge.
    ///
    /// Structural problems (bad indices, weights, shift lengths) are errors;
    /// connectivity and the rank of the period lattice are reported by
    /// [`QuotientGraph::validate`].
    pub fn new(dimension: usize, vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Malformed("dimension must be positive".into()));
        }
        if vertices.is_empty() {
            return Err(Error::Malformed("no vertices".into()));
        }
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(Error::Malformed(format!("duplicate vertex id {v:?}")));
            }
        }
        let m = edges.len();
        let mut darts = Vec::with_capacity(2 * m);
        for (i, e) in edges.iter().enumerate() {
            if e.tail >= vertices.len() || e.head >= vertices.len() {
                return Err(Error::Malformed(format!("edge {i}: vertex index out of range")));
            }
            if e.shift.len() != dimension {
                return Err(Error::DimensionMismatch { expected: dimension, found: e.shift.len() });
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::Malformed(format!(
                    "edge {i}: weight must be positive, got {}",
                    e.weight
                )));
            }
            darts.push(Dart {
                tail: e.tail,
                head: e.head,
                shift: e.shift.clone(),
                weight: e.weight,
                inverse: i + m,
            });
        }
        for (i, e) in edges.iter().enumerate() {
            darts.push(Dart {
                tail: e.head,
                head: e.tail,
                shift: e.shift.iter().map(|s| -s).collect(),
                weight: e.weight,
                inverse: i,
            });
        }
        let mut out_darts = vec![Vec::new(); vertices.len()];
        for (i, d) in darts.iter().enumerate() {
            out_darts[d.tail].push(i);
        }
        Ok(Self { dimension, vertices, darts, out_darts })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn darts(&self) -> &[Dart] {
        &self.darts
    }

    pub fn dart(&self, i: usize) -> &Dart {
        &self.darts[i]
    }

    /// Darts with `tail == v`, i.e. the set `E_v`.
    pub fn out_darts(&self, v: usize) -> &[usize] {
        &self.out_darts[v]
    }

    /// Listed (unoriented) edges, recovered from the first half of the darts.
    pub fn edges(&self) -> impl Iterator<Item = &Dart> {
        self.darts[..self.darts.len() / 2].iter()
    }

    /// Checks every invariant; an empty list means the graph is valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        for (i, d) in self.darts.iter().enumerate() {
            let inv = self.darts.get(d.inverse);
            let ok = inv.is_some_and(|inv| {
                inv.inverse == i
                    && inv.tail == d.head
                    && inv.head == d.tail
                    && inv.weight == d.weight
                    && inv.shift.iter().zip(&d.shift).all(|(a, b)| a + b == 0)
            });
            if !ok {
                diags.push(Diagnostic { kind: DiagnosticKind::BrokenInverse { dart: i } });
            }
            if !(d.weight.is_finite() && d.weight > 0.0) {
                diags.push(Diagnostic { kind: DiagnosticKind::NonPositiveWeight { dart: i } });
            }
        }

        let (potential, reached) = self.spanning_potentials();
        if let Some(v) = reached.iter().position(|r| !r) {
            diags.push(Diagnostic {
                kind: DiagnosticKind::Disconnected { vertex: self.vertices[v].clone() },
            });
        }
        let rank = self.period_rank(&potential, &reached);
        if rank < self.dimension {
            diags.push(Diagnostic {
                kind: DiagnosticKind::RankDeficient { rank, dimension: self.dimension },
            });
        }
        diags
    }

    /// Integer potentials along a BFS spanning tree rooted at vertex 0.
    fn spanning_potentials(&self) -> (Vec<Vec<i64>>, Vec<bool>) {
        let n = self.vertices.len();
        let mut potential = vec![vec![0i64; self.dimension]; n];
        let mut reached = vec![false; n];
        reached[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &di in &self.out_darts[v] {
                let d = &self.darts[di];
                if !reached[d.head] {
                    reached[d.head] = true;
                    potential[d.head] =
                        potential[v].iter().zip(&d.shift).map(|(p, s)| p + s).collect();
                    queue.push_back(d.head);
                }
            }
        }
        (potential, reached)
    }

    /// Rank of the lattice spanned by the net shifts of closed walks.
    fn period_rank(&self, potential: &[Vec<i64>], reached: &[bool]) -> usize {
        let rows: Vec<Vec<i128>> = self
            .darts
            .iter()
            .filter(|d| reached[d.tail] && reached[d.head])
            .map(|d| {
                (0..self.dimension)
                    .map(|k| (potential[d.tail][k] + d.shift[k] - potential[d.head][k]) as i128)
                    .collect()
            })
            .collect();
        integer_rank(rows, self.dimension)
    }
}

/// Rank over Q of a set of integer vectors, by fraction-free elimination.
fn integer_rank(mut rows: Vec<Vec<i128>>, cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            let f = row[col];
            if f == 0 {
                continue;
            }
            for k in 0..cols {
                row[k] = row[k] * p[col] - p[k] * f;
            }
            let g = row.iter().fold(0i128, |g, &x| gcd(g, x.abs()));
            if g > 1 {
                row.iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagnosticKind {
    Disconnected { vertex: String },
    RankDeficient { rank: usize, dimension: usize },
    NonPositiveWeight { dart: usize },
    BrokenInverse { dart: usize },
}

impl Diagnostic {
    /// Short name of the violated invariant.
    pub fn invariant(&self) -> &'static str {
        match self.kind {
            DiagnosticKind::Disconnected { .. } => "disconnected",
            DiagnosticKind::RankDeficient { .. } => "rank-deficient",
            DiagnosticKind::NonPositiveWeight { .. } => "nonpositive-weight",
            DiagnosticKind::BrokenInverse { .. } => "broken-inverse",
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DiagnosticKind::Disconnected { vertex } => {
                write!(f, "disconnected: vertex {vertex:?} is unreachable from the base vertex")
            }
            DiagnosticKind::RankDeficient { rank, dimension } => {
                write!(f, "rank-deficient: cycle shifts span rank {rank} < dimension {dimension}")
            }
            DiagnosticKind::NonPositiveWeight { dart } => {
                write!(f, "nonpositive-weight: dart {dart}")
            }
            DiagnosticKind::BrokenInverse { dart } => {
                write!(f, "broken-inverse: dart {dart}")
            }
        }
    }
}
