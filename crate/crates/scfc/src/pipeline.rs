//! The end-to-end evaluation pipeline.
//!
//! Ties the stages together: point estimates from records or aggregate
//! counts, bootstrap resampling, percentile intervals, capability indices,
//! verdicts, and the assembled report. Per-record and counts-based inputs
//! share every stage after resampling.

use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};

use crate::bootstrap::{
    bootstrap_counts, bootstrap_records, write_distribution_csv, BootstrapConfig,
    BootstrapDistribution,
};
use crate::capability::assess;
use crate::config::{EvaluationSpec, MetricDefinition, MIN_RESAMPLES};
use crate::error::{Error, Result};
use crate::metrics::{self, evaluate_statistic, ConfusionCounts, MetricKind, MetricValue};
use crate::record::{EvaluationRecord, OutcomeKind, RecordSet};
use crate::report::{build_report, EvaluationReport, MetricReport, RunMetadata};

/// Caller-side overrides; `None` defers to the spec.
#[derive(Debug, Clone, Default)]
pub struct EvaluateOptions {
    pub seed: Option<u64>,
    pub resamples: Option<u64>,
    /// Override the per-resample draw count. Changes what the interval
    /// estimates; the report carries a warning when set.
    pub resample_size: Option<usize>,
    pub include_timestamp: bool,
    /// Write each metric's bootstrap distribution as a one-column CSV.
    pub distribution_dump: Option<PathBuf>,
}

fn resolve_config(spec: &EvaluationSpec, options: &EvaluateOptions) -> Result<BootstrapConfig> {
    spec.validate()?;
    let resamples = options.resamples.unwrap_or(spec.resamples);
    if resamples < MIN_RESAMPLES {
        return Err(Error::TooFewResamples { value: resamples });
    }
    let mut config = BootstrapConfig::default()
        .with_seed(options.seed.unwrap_or(spec.seed))
        .with_resamples(resamples)
        .with_confidence_level(spec.confidence_level);
    if let Some(size) = options.resample_size {
        config = config.with_resample_size(size);
    }
    config.validate()?;
    Ok(config)
}

fn run_metadata(
    config: &BootstrapConfig,
    spec: &EvaluationSpec,
    sample_size: u64,
    options: &EvaluateOptions,
) -> RunMetadata {
    let timestamp = options
        .include_timestamp
        .then(|| Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true));
    RunMetadata {
        seed: config.seed,
        resamples: config.resamples,
        sample_size,
        resample_size: config.resample_size.unwrap_or(sample_size as usize) as u64,
        confidence_level: spec.confidence_level,
        timestamp,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn dump_path(base: &Path, metric: &str, multi: bool) -> PathBuf {
    if !multi {
        return base.to_path_buf();
    }
    let stem = base
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("distribution");
    let mut name = format!("{stem}-{metric}");
    if let Some(extension) = base.extension().and_then(|s| s.to_str()) {
        name.push('.');
        name.push_str(extension);
    }
    base.with_file_name(name)
}

fn dump_distribution(path: &Path, distribution: &BootstrapDistribution) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })?;
    let mut writer = std::io::BufWriter::new(file);
    write_distribution_csv(distribution, &mut writer)
}

fn point_estimate(records: &RecordSet, metric: &MetricDefinition) -> Result<MetricValue> {
    match metric.kind {
        MetricKind::ProportionCorrect => metrics::proportion_correct(records),
        MetricKind::MeanValue => metrics::mean_value(records),
        kind => {
            let label = metric.positive_label.as_deref().ok_or_else(|| {
                Error::MissingPositiveLabel {
                    metric: metric.name.clone(),
                    kind: kind.as_str().to_string(),
                }
            })?;
            let counts = metrics::confusion_from_records(records, label)?;
            metrics::classification_metric(&counts, kind)
        }
    }
}

fn finish_metric(
    metric: &MetricDefinition,
    point: MetricValue,
    distribution: &BootstrapDistribution,
    spec: &EvaluationSpec,
    options: &EvaluateOptions,
    multi: bool,
) -> Result<MetricReport> {
    let ci = distribution.percentile_ci(spec.confidence_level)?;
    let capability = assess(distribution.mean(), &ci, &metric.limits)?;
    if let Some(base) = &options.distribution_dump {
        dump_distribution(&dump_path(base, &metric.name, multi), distribution)?;
    }
    Ok(MetricReport {
        definition: metric.clone(),
        point_estimate: point,
        distribution_mean: distribution.mean(),
        ci,
        capability,
    })
}

/// Evaluate per-record results against the spec.
///
/// Every metric is resampled from the same seed, so resample `i` draws the
/// same record indices for each metric.
pub fn evaluate_records(
    records: &RecordSet,
    spec: &EvaluationSpec,
    options: &EvaluateOptions,
) -> Result<EvaluationReport> {
    let config = resolve_config(spec, options)?;
    let multi = spec.metrics.len() > 1;

    let mut results = Vec::with_capacity(spec.metrics.len());
    for metric in &spec.metrics {
        let required = metric.kind.required_outcome();
        if records.outcome_kind() != required {
            return Err(Error::WrongOutcomeKind {
                operation: format!("metric `{}` ({})", metric.name, metric.kind),
                expected: required.as_str().to_string(),
                found: records.outcome_kind().as_str().to_string(),
            });
        }
        let point = point_estimate(records, metric)?;
        let kind = metric.kind;
        let label = metric.positive_label.clone();
        let statistic = |subset: &[&EvaluationRecord]| {
            evaluate_statistic(kind, label.as_deref(), subset)
        };
        let distribution = bootstrap_records(records, statistic, &config)?;
        results.push(finish_metric(
            metric,
            point,
            &distribution,
            spec,
            options,
            multi,
        )?);
    }

    let run = run_metadata(&config, spec, records.len() as u64, options);
    build_report(spec, run, results, vec![])
}

/// Evaluate an aggregate confusion matrix against the spec. Only
/// classification metrics apply; resamples are multinomial draws over the
/// four cells.
pub fn evaluate_counts(
    counts: &ConfusionCounts,
    spec: &EvaluationSpec,
    options: &EvaluateOptions,
) -> Result<EvaluationReport> {
    let config = resolve_config(spec, options)?;
    let multi = spec.metrics.len() > 1;

    let mut results = Vec::with_capacity(spec.metrics.len());
    for metric in &spec.metrics {
        if !metric.kind.is_classification() {
            return Err(Error::WrongOutcomeKind {
                operation: format!("metric `{}` ({})", metric.name, metric.kind),
                expected: OutcomeKind::Classification.as_str().to_string(),
                found: metric.kind.required_outcome().as_str().to_string(),
            });
        }
        let point = metrics::classification_metric(counts, metric.kind)?;
        let distribution = bootstrap_counts(counts, metric.kind, &config)?;
        results.push(finish_metric(
            metric,
            point,
            &distribution,
            spec,
            options,
            multi,
        )?);
    }

    let run = run_metadata(&config, spec, counts.total(), options);
    build_report(spec, run, results, vec![])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capability::Verdict;
    use crate::config::SpecificationLimits;
    use crate::record::EvaluationRecord;
    use crate::report::render_json;

    pub(crate) fn correctness_records(total: usize, correct: usize) -> RecordSet {
        let records = (0..total)
            .map(|i| {
                EvaluationRecord::correctness((i + 1).to_string(), i < correct)
            })
            .collect();
        RecordSet::new(records).unwrap()
    }

    fn gate_spec(lsl: f64) -> EvaluationSpec {
        let metric = MetricDefinition::new(
            "gate",
            MetricKind::ProportionCorrect,
            None,
            SpecificationLimits::lower(lsl),
        )
        .unwrap();
        EvaluationSpec::new(vec![metric]).unwrap()
    }

    fn recall_spec(lsl: f64) -> EvaluationSpec {
        let metric = MetricDefinition::new(
            "recall",
            MetricKind::Recall,
            Some("fraud".to_string()),
            SpecificationLimits::lower(lsl),
        )
        .unwrap();
        EvaluationSpec::new(vec![metric]).unwrap()
    }

    #[test]
    fn forty_two_record_gate_lands_in_the_expected_windows() {
        let records = correctness_records(42, 35);
        let report =
            evaluate_records(&records, &gate_spec(0.70), &EvaluateOptions::default()).unwrap();

        let metric = &report.metrics[0];
        assert_eq!(metric.point_estimate.value, 35.0 / 42.0);
        assert!(
            (0.8233..=0.8433).contains(&metric.distribution_mean),
            "mean {} outside window",
            metric.distribution_mean
        );
        assert!(
            (0.690..=0.738).contains(&metric.ci.lower),
            "lower {} outside window",
            metric.ci.lower
        );
        assert!(
            (0.904..=0.952).contains(&metric.ci.upper),
            "upper {} outside window",
            metric.ci.upper
        );
        assert!(
            (0.97..=1.27).contains(&metric.capability.cpk.value),
            "cpk {} outside window",
            metric.capability.cpk.value
        );
        assert_eq!(report.overall_verdict, Verdict::Capable);
    }

    #[test]
    fn repeated_runs_render_identical_bytes() {
        let records = correctness_records(42, 35);
        let spec = gate_spec(0.70);
        let options = EvaluateOptions::default();
        let first = render_json(&evaluate_records(&records, &spec, &options).unwrap());
        let second = render_json(&evaluate_records(&records, &spec, &options).unwrap());
        assert_eq!(first, second);
    }

    #[test]
    fn seed_override_changes_the_resampling() {
        let records = correctness_records(42, 35);
        let spec = gate_spec(0.70);
        let default_run = evaluate_records(&records, &spec, &EvaluateOptions::default()).unwrap();
        let seeded = EvaluateOptions {
            seed: Some(1),
            ..EvaluateOptions::default()
        };
        let seeded_run = evaluate_records(&records, &spec, &seeded).unwrap();
        assert_eq!(seeded_run.run.seed, 1);
        assert_ne!(render_json(&default_run), render_json(&seeded_run));
    }

    #[test]
    fn counts_pipeline_reports_the_exact_point_estimate() {
        let counts = crate::metrics::fraud_counts();
        let report =
            evaluate_counts(&counts, &recall_spec(0.98), &EvaluateOptions::default()).unwrap();
        let metric = &report.metrics[0];
        assert_eq!(metric.point_estimate.value, 8951.0 / 9033.0);
        assert_eq!(report.run.sample_size, 109_288_686);
        assert!(metric.ci.lower < metric.point_estimate.value);
        assert!(metric.ci.upper > metric.point_estimate.value);
    }

    #[test]
    fn metric_kind_must_match_the_outcome_kind() {
        let records = correctness_records(10, 9);
        let metric = MetricDefinition::new(
            "latency",
            MetricKind::MeanValue,
            None,
            SpecificationLimits::upper(200.0),
        )
        .unwrap();
        let spec = EvaluationSpec::new(vec![metric]).unwrap();
        let err = evaluate_records(&records, &spec, &EvaluateOptions::default()).unwrap_err();
        assert!(matches!(err, Error::WrongOutcomeKind { .. }));
    }

    #[test]
    fn counts_reject_non_classification_metrics() {
        let counts = crate::metrics::fraud_counts();
        let err =
            evaluate_counts(&counts, &gate_spec(0.70), &EvaluateOptions::default()).unwrap_err();
        assert!(matches!(err, Error::WrongOutcomeKind { .. }));
    }

    #[test]
    fn resample_count_override_still_enforces_the_floor() {
        let records = correctness_records(42, 35);
        let options = EvaluateOptions {
            resamples: Some(50),
            ..EvaluateOptions::default()
        };
        let err = evaluate_records(&records, &gate_spec(0.70), &options).unwrap_err();
        assert!(matches!(err, Error::TooFewResamples { .. }));
    }

    #[test]
    fn resample_size_override_is_reported() {
        let records = correctness_records(42, 35);
        let options = EvaluateOptions {
            resample_size: Some(21),
            ..EvaluateOptions::default()
        };
        let report = evaluate_records(&records, &gate_spec(0.70), &options).unwrap();
        assert_eq!(report.run.resample_size, 21);
        assert!(report
            .warnings
            .iter()
            .any(|w| w.contains("resample size 21")));
    }

    #[test]
    fn timestamp_is_present_only_on_request() {
        let records = correctness_records(42, 35);
        let spec = gate_spec(0.70);
        let bare = evaluate_records(&records, &spec, &EvaluateOptions::default()).unwrap();
        assert!(bare.run.timestamp.is_none());

        let options = EvaluateOptions {
            include_timestamp: true,
            ..EvaluateOptions::default()
        };
        let stamped = evaluate_records(&records, &spec, &options).unwrap();
        let raw = stamped.run.timestamp.expect("timestamp requested");
        assert!(chrono::DateTime::parse_from_rfc3339(&raw).is_ok());
    }

    #[test]
    fn distribution_dump_writes_one_file_per_metric() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("dist.csv");

        let records = correctness_records(42, 35);
        let options = EvaluateOptions {
            distribution_dump: Some(base.clone()),
            ..EvaluateOptions::default()
        };
        evaluate_records(&records, &gate_spec(0.70), &options).unwrap();
        let text = std::fs::read_to_string(&base).unwrap();
        assert_eq!(text.lines().count(), 1001);
        assert_eq!(text.lines().next(), Some("value"));

        let accuracy = MetricDefinition::new(
            "accuracy",
            MetricKind::Accuracy,
            Some("fraud".to_string()),
            SpecificationLimits::lower(0.5),
        )
        .unwrap();
        let recall = MetricDefinition::new(
            "recall",
            MetricKind::Recall,
            Some("fraud".to_string()),
            SpecificationLimits::lower(0.5),
        )
        .unwrap();
        let spec = EvaluationSpec::new(vec![accuracy, recall]).unwrap();
        let counts = ConfusionCounts::new(30, 8, 50, 12);
        evaluate_counts(&counts, &spec, &options).unwrap();
        assert!(dir.path().join("dist-accuracy.csv").exists());
        assert!(dir.path().join("dist-recall.csv").exists());
    }
}
