//! Experiment runner for `blendcurv`: JSON configs, an expression language
//! for user-defined fields, and CSV / JSON result tables.

pub mod config;
pub mod error;
pub mod expr;
pub mod runner;
pub mod table;

pub use config::{Deformation, ExperimentConfig, GeometrySpec, Output, Overrides};
pub use error::CliError;
pub use runner::{run, RunOutcome};
pub use table::{emit, Format, ResultTable, Row};
