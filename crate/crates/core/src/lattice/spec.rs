use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::quotient::{Edge, QuotientGraph};
use crate::{Error, Result};

/// One listed edge of a lattice-spec document. Reverse darts are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub tail: String,
    pub head: String,
    pub shift: Vec<i64>,
    pub weight: f64,
}

/// The on-disk lattice description (TOML).
///
/// ```toml
/// dimension = 1
/// basis = [[2.0]]
/// vertices = ["0", "1"]
///
/// [[edges]]
/// tail = "0"
/// head = "1"
/// shift = [0]
/// weight = 1.0
///
/// [positions]
/// "0" = [0.0]
/// "1" = [1.0]
/// ```
///
/// `basis` lists the lattice vectors `u₁…u_d` (the columns of `U`); it
/// defaults to the identity. `positions` optionally fixes an explicit
/// periodic realization on the fundamental domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<BTreeMap<String, Vec<f64>>>,
}

impl LatticeSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Malformed(e.message().to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("lattice spec is always serialisable")
    }

    /// Builds the quotient graph without checking connectivity or rank.
    pub fn quotient_graph_unchecked(&self) -> Result<QuotientGraph> {
        let lookup = |id: &str| {
            self.vertices
                .iter()
                .position(|v| v == id)
                .ok_or_else(|| Error::Malformed(format!("unknown vertex id {id:?}")))
        };
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    tail: lookup(&e.tail)?,
                    head: lookup(&e.head)?,
                    shift: e.shift.clone(),
                    weight: e.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        QuotientGraph::new(self.dimension, self.vertices.clone(), edges)
    }

    /// Builds the quotient graph and rejects it unless every invariant holds.
    pub fn quotient_graph(&self) -> Result<QuotientGraph> {
        let g = self.quotient_graph_unchecked()?;
        let diags = g.validate();
        if diags.is_empty() {
            Ok(g)
        } else {
            Err(Error::InvalidGraph(diags))
        }
    }

    /// Basis vectors `u₁…u_d`, defaulting to the standard basis.
    pub fn basis_vectors(&self) -> Result<Vec<Vec<f64>>> {
        let d = self.dimension;
        match &self.basis {
            None => Ok((0..d)
                .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect()),
            Some(b) => {
                if b.len() != d || b.iter().any(|u| u.len() != d) {
                    return Err(Error::Malformed(format!("basis must be {d} vectors of length {d}")));
                }
                Ok(b.clone())
            }
        }
    }

    /// Explicit positions in vertex order, if the document supplies them.
    pub fn ordered_positions(&self) -> Result<Option<Vec<Vec<f64>>>> {
        let Some(map) = &self.positions else {
            return Ok(None);
        };
        for id in map.keys() {
            if !self.vertices.contains(id) {
                return Err(Error::Malformed(format!("position for unknown vertex {id:?}")));
            }
        }
        self.vertices
            .iter()
            .map(|id| {
                let p = map
                    .get(id)
                    .ok_or_else(|| Error::Malformed(format!("missing position for {id:?}")))?;
                if p.len() != self.dimension {
                    return Err(Error::DimensionMismatch { expected: self.dimension, found: p.len() });
                }
                Ok(p.clone())
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

/// Parses a lattice-spec document into a validated quotient graph.
pub fn parse_lattice_spec(text: &str) -> Result<QuotientGraph> {
    LatticeSpec::from_toml_str(text)?.quotient_graph()
}
