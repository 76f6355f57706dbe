//! Zero-range thermodynamics, product measures, exact kinetic Monte Carlo
//! for exclusion and zero-range processes on `X_N`, and the estimators that
//! turn trajectories into densities.

mod config;
mod estimators;
mod rate_tree;
mod rates;
mod rng;
mod simulate;
mod stationarity;
mod thermo;

pub use config::{sample_product, Configuration, Process};
pub use estimators::{
    density_from_sites, empirical_density, replacement_diagnostic, site_coordinates, DensityEstimator,
    ReplacementReport,
};
pub use rate_tree::RateTree;
pub use rates::RateFunction;
pub use rng::{stream_rng, Purpose};
pub use simulate::{simulate, SimResult, Snapshot};
pub use stationarity::{generator_stationarity_check, zero_range_detailed_balance};
pub use thermo::{SeriesMoments, ThermoTables};
