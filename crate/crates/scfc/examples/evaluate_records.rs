//! Per-record evaluation, end to end.
//!
//! Forty-two agent transcripts were graded pass/fail and the business
//! requires at least 70% success. The point estimate alone (35/42 = 83%)
//! looks comfortable; the question a deployment decision actually needs
//! answered is how much of that comfort survives sampling noise.
//!
//! ```bash
//! cargo run --example evaluate_records
//! ```

use scfc::{
    evaluate_records, exit_status, render_markdown, EvaluateOptions, EvaluationRecord,
    EvaluationSpec, MetricDefinition, MetricKind, RecordSet, SpecificationLimits,
};

fn main() -> scfc::Result<()> {
    // In production these rows come from a CSV or JSONL file via
    // `scfc::parse_records_path`; built in code here to stay self-contained.
    let records = RecordSet::new(
        (1..=42)
            .map(|i| EvaluationRecord::correctness(format!("task-{i:02}"), i <= 35))
            .collect(),
    )?;

    let gate = MetricDefinition::new(
        "task_success",
        MetricKind::ProportionCorrect,
        None,
        SpecificationLimits::lower(0.70),
    )?;
    let spec = EvaluationSpec::new(vec![gate])?;

    let report = evaluate_records(&records, &spec, &EvaluateOptions::default())?;
    print!("{}", render_markdown(&report));

    // The verdict maps to a process exit status for CI gates: 0 deployable,
    // 1 not. `strict` would demand the Excellent band.
    let status = exit_status(report.overall_verdict, false);
    println!("\ngate exit code: {}", status.code());
    Ok(())
}
