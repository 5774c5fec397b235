//! SCFC: statistical confidence in functional correctness.
//!
//! Evaluation scores from a finite test set are estimates, not facts. This
//! crate treats a measured metric the way manufacturing treats a process
//! dimension: bootstrap the sampling distribution, compare the confidence
//! interval against business specification limits, and summarize the
//! margin as capability indices (Cpl, Cpu, Cpk) with a deployment verdict.
//!
//! The pipeline is deterministic end to end: a seed plus the input bytes
//! fully determine every report byte, independent of thread count.
//!
//! # Quick start
//!
//! ```
//! use scfc::{
//!     EvaluateOptions, EvaluationRecord, EvaluationSpec, MetricDefinition,
//!     MetricKind, RecordSet, SpecificationLimits,
//! };
//!
//! let records = RecordSet::new(
//!     (1..=20)
//!         .map(|i| EvaluationRecord::correctness(i.to_string(), i <= 17))
//!         .collect(),
//! )?;
//!
//! let gate = MetricDefinition::new(
//!     "task_success",
//!     MetricKind::ProportionCorrect,
//!     None,
//!     SpecificationLimits::lower(0.60),
//! )?;
//! let spec = EvaluationSpec::new(vec![gate])?;
//!
//! let report = scfc::evaluate_records(&records, &spec, &EvaluateOptions::default())?;
//! println!("{}", scfc::verdict_line(&report));
//! # Ok::<(), scfc::Error>(())
//! ```
//!
//! # Examples directory
//!
//! Each major capability has a runnable example:
//!
//! - **`evaluate_records`** - per-record results to a full report
//! - **`evaluate_counts`** - the same pipeline from an aggregate confusion matrix
//! - **`bootstrap_basics`** - resampling and percentile intervals by hand
//! - **`capability_index`** - Cpl/Cpu/Cpk from already-published statistics
//! - **`stratified_sampling`** - proportional test-set construction
//! - **`custom_statistic`** - bootstrapping a statistic this crate does not ship
//!
//! ```bash
//! cargo run --example evaluate_records
//! cargo run --example evaluate_counts
//! cargo run --example bootstrap_basics
//! cargo run --example capability_index
//! cargo run --example stratified_sampling
//! cargo run --example custom_statistic
//! ```
//!
//! # Stages
//!
//! Use the stages directly when the packaged pipeline does not fit:
//!
//! - [`ingest`]: CSV/JSONL records, aggregate counts, spec files
//! - [`metrics`]: confusion cells and the metric catalog
//! - [`sampling`]: stratified plans, allocation, representativeness
//! - [`bootstrap`]: seeded resampling and percentile intervals
//! - [`capability`]: indices and verdicts
//! - [`report`]: assembly plus JSON and Markdown renderings
//! - [`gate`]: verdict to process exit status

pub mod bootstrap;
pub mod capability;
pub mod config;
pub mod error;
pub mod gate;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod record;
pub mod report;
pub mod sampling;

mod rng;

pub use bootstrap::{
    bootstrap_counts, bootstrap_records, write_distribution_csv, BootstrapConfig,
    BootstrapDistribution, ConfidenceInterval,
};
pub use capability::{
    assess, classify_verdict, combine_cpk, cpl, cpu, CapabilityResult, IndexValue, Verdict,
};
pub use config::{
    parse_spec, parse_spec_path, EvaluationSpec, MetricDefinition, SpecificationLimits,
    DEFAULT_CONFIDENCE_LEVEL, DEFAULT_RESAMPLES, MIN_RESAMPLES,
};
pub use error::{Error, Result};
pub use gate::{exit_status, ExitStatus};
pub use ingest::{
    parse_counts, parse_counts_path, parse_records, parse_records_path, render_records,
    RecordFormat,
};
pub use metrics::{
    classification_metric, confusion_from_records, evaluate_statistic, ConfusionCounts,
    MetricKind, MetricValue,
};
pub use pipeline::{evaluate_counts, evaluate_records, EvaluateOptions};
pub use record::{EvaluationRecord, Outcome, OutcomeKind, RecordSet};
pub use report::{
    build_report, fmt_number, render_json, render_markdown, verdict_line, EvaluationReport,
    MetricReport, RunMetadata, SCHEMA_VERSION,
};
pub use sampling::{
    allocate, derive_strata, draw_sample, max_deviation, plan_sample, representativeness_report,
    AllocationResult, SamplingPlan, StratumAllocation, StratumCount, StratumDeviation, StratumKey,
};
