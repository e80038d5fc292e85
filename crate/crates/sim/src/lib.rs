//! Experiment harness for the `collateral-core` policies: configuration,
//! sequence/trace/results file formats, ratio measurement against exact
//! oracles, exhaustive small-instance verification and parameter sweeps.

pub mod config;
pub mod error;
pub mod exhaust;
pub mod harness;
pub mod io;
pub mod sweep;

pub use config::{AdversaryKind, AdversarySpec, ExperimentConfig, OracleKind, Outputs, WorkloadSource};
pub use error::HarnessError;
pub use exhaust::{exhaustive_verify, ExhaustSpace, ExhaustSummary};
pub use harness::{measure_ratio, run_config, run_policy, Instance, Ratio, RatioRow, RunRecord};
