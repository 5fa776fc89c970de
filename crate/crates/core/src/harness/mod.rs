//! Monte-Carlo experiments comparing selection strategies.
//!
//! Trials run in parallel and are merged by index. Every strategy in a trial
//! consumes the same measurement set. A strategy that cannot produce a fix in
//! a trial yields a skipped row, which is excluded from that strategy's CDF
//! and counted in its summary.

mod config;
mod export;
mod map;
mod run;
mod stats;

pub use config::{ExperimentConfig, DEFAULT_TRIALS};
pub use export::{
    strategy_errors, summarize, summarize_trials_csv, write_cdf_csv, write_outputs, write_selections_csv,
    write_trials_csv, StrategySummary, TRIALS_HEADER,
};
pub use map::{gdop_map, write_gdop_map_csv, GdopCell};
pub use run::{
    generate_scenario, run_experiment, run_trial, run_trials, simulate_toas, Fix, TrialOutcome, TrialRecord,
    TrialReport,
};
pub use stats::{cdf, percentile, CdfSeries};
