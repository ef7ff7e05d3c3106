//! End-to-end experiments: dispatch, emission pricing, scenario sampling and
//! every charging policy, repeated over seeded Monte Carlo runs.

mod config;
mod output;
mod run;
mod stats;

pub use config::{ExperimentConfig, PriceConfig, PriceMode, StationConfig, SystemConfig};
pub use output::{
    write_dispatch_outputs, write_manifest, write_run_outputs, write_summary_csv, write_summary_json, Manifest,
    SUMMARY_HEADER,
};
pub use run::{
    derive_seed, policy_name, run_monte_carlo, run_single, Experiment, PolicyReport, RunArtifacts, RunReport, RunSeeds,
    FIFS, POWER_ALLOCATION,
};
pub use stats::{summarize, Moments, PolicySummary, SummaryStats};
