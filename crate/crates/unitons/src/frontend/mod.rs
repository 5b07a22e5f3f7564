//! Experiment frontend: expression parsing for frame entries, JSON
//! configuration, the check drivers behind the CLI subcommands, and
//! report serialization.

pub mod config;
pub mod driver;
pub mod expr;
pub mod report;

pub use config::{CompiledExperiment, ExperimentConfig, Tolerances};
pub use driver::{run_deform, run_factorize, run_sweep, run_verify};
pub use report::{
    emit_outputs, CheckResult, DeformReport, FactorizeReport, Report, SweepReport, VerifyReport,
};
