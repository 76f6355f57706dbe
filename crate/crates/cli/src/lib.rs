//! Command-line harness around `crystal_hydro`: lattice validation,
//! realization reports, particle sweeps, PDE solves and the
//! hydrodynamic-convergence experiment.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundled;
pub mod config;
pub mod converge;
pub mod error;
pub mod profile;
pub mod realize;
pub mod sweep;

pub use config::{EstimatorConfig, ExperimentConfig, ProcessKind, RealizationMode};
pub use converge::{run_convergence, ConvergenceReport, ConvergenceRow};
pub use error::HarnessError;
pub use profile::{parse_profile, ParseError, ProfileExpr};
pub use realize::{realize, report_realization, RealizationReport, RealizedLattice};
pub use sweep::{run_sweep, SweepParams, SweepResult};
