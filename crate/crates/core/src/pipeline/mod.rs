//! Orchestration: the learning pipeline over many seeds, the paired
//! benchmark, and the statistics reported on it.

mod bench;
mod config;
mod run;
mod stats;

pub use bench::{
    cmd_benchmark, paired, parse_hypothesis, read_csv, select_best, summarize, write_csv, BenchRow, BenchStatus,
    BenchSummary, Condition, ConditionSummary, Selection,
};
pub use config::{RunConfig, Strategy};
pub use run::{
    cmd_pipeline, load_instances, run_seed, write_atomic, PipelineSummary, SeedReport, SeedRun, SeedStatus,
    TrainingInstance,
};
pub use stats::{median, wilcoxon_signed_rank, Wilcoxon, WilcoxonMethod, EXACT_MAX_N};
