//! Evaluation from an aggregate confusion matrix.
//!
//! Sometimes only the four confusion cells survive: the per-record data is
//! too large, private, or long gone. A fraud detector screened 109 million
//! transactions; the published matrix is all that remains. Resampling the
//! matrix multinomially gives the same downstream pipeline: intervals,
//! capability, verdict.
//!
//! ```bash
//! cargo run --example evaluate_counts
//! ```

use scfc::{
    evaluate_counts, render_json, ConfusionCounts, EvaluateOptions, EvaluationSpec,
    MetricDefinition, MetricKind, SpecificationLimits,
};

fn main() -> scfc::Result<()> {
    let counts = ConfusionCounts::new(8951, 10365, 109_269_288, 82);

    // Three metrics, three business limits: recall must clear 98%, false
    // positives must stay under 0.02%, and precision above 40%.
    let recall = MetricDefinition::new(
        "fraud_recall",
        MetricKind::Recall,
        Some("fraud".into()),
        SpecificationLimits::lower(0.98),
    )?;
    let fpr = MetricDefinition::new(
        "false_positive_rate",
        MetricKind::FalsePositiveRate,
        Some("fraud".into()),
        SpecificationLimits::upper(0.0002),
    )?;
    let precision = MetricDefinition::new(
        "alert_precision",
        MetricKind::Precision,
        Some("fraud".into()),
        SpecificationLimits::lower(0.40),
    )?;
    let spec = EvaluationSpec::new(vec![recall, fpr, precision])?;

    let options = EvaluateOptions {
        // Omitting the timestamp keeps the bytes identical run to run.
        include_timestamp: false,
        ..EvaluateOptions::default()
    };
    let report = evaluate_counts(&counts, &spec, &options)?;

    // The overall verdict is governed by the weakest metric.
    print!("{}", render_json(&report));
    Ok(())
}
