//! Factorial Monte Carlo experiment: configuration, execution, aggregation
//! and CSV artifacts.

mod config;
pub mod outputs;
mod runner;

pub use config::{ConfigEntry, ConfigError, RunConfig};
pub use runner::{
    run_all, run_replicate, AggregateReport, DeliveryRecord, EntryResults, KSweepAggregate,
    MeanStd, ReplicateOutcome, RunError, RunHooks, RunSummary, CLUSTER_WINDOW_S,
    SCORING_WARMUP_FRAMES,
};
