//! Quotient graphs of crystal lattices and their N-scaling finite graphs.
//!
//! A crystal lattice `X` with a free `Z^d` action is encoded by its finite
//! quotient `X₀` together with one integer shift vector per oriented edge
//! (dart): the dart `e` with shift `γ(e)` joins the lift of `tail(e)` in the
//! fundamental domain to the lift of `head(e)` translated by `γ(e)`.

mod group;
mod quotient;
mod scaled;
mod spec;

pub use group::{ball_offsets, word_length, GroupElement};
pub use quotient::{Dart, Diagnostic, DiagnosticKind, Edge, QuotientGraph};
pub use scaled::{ball_vertices, build_scaled_graph, ScaledGraph};
pub use spec::{parse_lattice_spec, EdgeSpec, LatticeSpec};
