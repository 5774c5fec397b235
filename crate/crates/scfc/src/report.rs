//! Report assembly and rendering.
//!
//! One report gathers the full evaluation trace: run parameters, one block
//! per metric (point estimate, bootstrap mean, confidence interval,
//! capability indices, verdict), the overall verdict, and warnings.
//! Rendered numbers carry 6 significant digits; infinities are encoded as
//! the strings "inf"/"-inf" next to an explicit `degenerate` flag. With
//! the timestamp omitted, renderings are byte-identical across runs and
//! thread counts.

use serde_json::{Map, Value};

use crate::bootstrap::ConfidenceInterval;
use crate::capability::{classify_verdict, CapabilityResult, IndexValue, Verdict};
use crate::config::{EvaluationSpec, MetricDefinition};
use crate::error::{Error, Result};
use crate::metrics::MetricValue;

pub const SCHEMA_VERSION: u64 = 1;

/// Parameters the run actually used, echoed for auditability.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub seed: u64,
    pub resamples: u64,
    /// Input sample size: record count, or the counts total.
    pub sample_size: u64,
    /// Size of each bootstrap resample.
    pub resample_size: u64,
    pub confidence_level: f64,
    /// RFC 3339; None keeps the rendering fully reproducible.
    pub timestamp: Option<String>,
    pub tool_version: String,
}

/// Everything computed for one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub definition: MetricDefinition,
    pub point_estimate: MetricValue,
    pub distribution_mean: f64,
    pub ci: ConfidenceInterval,
    pub capability: CapabilityResult,
}

/// The full evaluation trace.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub run: RunMetadata,
    pub metrics: Vec<MetricReport>,
    pub overall_cpk: IndexValue,
    pub overall_verdict: Verdict,
    pub warnings: Vec<String>,
}

/// Assemble the report: results are matched to the spec's metrics by name
/// and reported in spec order; the overall index is the worst per-metric
/// Cpk. Degenerate indices and a resample-size override each add a
/// warning.
pub fn build_report(
    spec: &EvaluationSpec,
    run: RunMetadata,
    results: Vec<MetricReport>,
    extra_warnings: Vec<String>,
) -> Result<EvaluationReport> {
    let mut remaining = results;
    let mut ordered = Vec::with_capacity(spec.metrics.len());
    for metric in &spec.metrics {
        let position = remaining
            .iter()
            .position(|r| r.definition.name == metric.name)
            .ok_or_else(|| Error::MissingMetricResult {
                metric: metric.name.clone(),
            })?;
        ordered.push(remaining.swap_remove(position));
    }

    let overall_cpk = ordered
        .iter()
        .map(|m| m.capability.cpk)
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("spec validation guarantees at least one metric");
    let overall_verdict = classify_verdict(overall_cpk.value);

    let mut warnings = spec.validation_warnings();
    warnings.extend(extra_warnings);
    if run.resample_size != run.sample_size {
        warnings.push(format!(
            "resample size {} overrides the input sample size {}; intervals no longer estimate \
             the observed sample's variability",
            run.resample_size, run.sample_size
        ));
    }
    for metric in &ordered {
        if metric.capability.is_degenerate() {
            warnings.push(format!(
                "metric `{}`: zero-width confidence interval on the governing side; the \
                 capability index is a signed infinity",
                metric.definition.name
            ));
        }
    }

    Ok(EvaluationReport {
        run,
        metrics: ordered,
        overall_cpk,
        overall_verdict,
        warnings,
    })
}

/// Round to `digits` significant digits.
pub(crate) fn round_sig(value: f64, digits: i32) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    let magnitude = value.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (value * factor).round() / factor
}

/// Render a real for output: 6 significant digits, infinities as
/// "inf"/"-inf".
pub fn fmt_number(value: f64) -> String {
    if value == f64::INFINITY {
        "inf".to_string()
    } else if value == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{}", round_sig(value, 6))
    }
}

fn finite_json(value: f64) -> Value {
    Value::from(round_sig(value, 6))
}

fn extended_json(value: f64) -> Value {
    if value.is_infinite() {
        Value::String(fmt_number(value))
    } else {
        finite_json(value)
    }
}

fn optional<T, F: Fn(T) -> Value>(value: Option<T>, encode: F) -> Value {
    value.map(encode).unwrap_or(Value::Null)
}

/// The stable one-line summary printed to standard output.
pub fn verdict_line(report: &EvaluationReport) -> String {
    format!(
        "SCFC verdict: {} (Cpk={})",
        report.overall_verdict.as_str(),
        fmt_number(report.overall_cpk.value)
    )
}

/// Canonical JSON rendering: fixed key order, deterministic bytes for
/// identical reports.
pub fn render_json(report: &EvaluationReport) -> String {
    let mut root = Map::new();
    root.insert("schema_version".into(), Value::from(SCHEMA_VERSION));

    let mut run = Map::new();
    run.insert("seed".into(), Value::from(report.run.seed));
    run.insert("resamples".into(), Value::from(report.run.resamples));
    run.insert("sample_size".into(), Value::from(report.run.sample_size));
    run.insert(
        "resample_size".into(),
        Value::from(report.run.resample_size),
    );
    run.insert(
        "confidence_level".into(),
        finite_json(report.run.confidence_level),
    );
    run.insert(
        "tool_version".into(),
        Value::from(report.run.tool_version.clone()),
    );
    if let Some(timestamp) = &report.run.timestamp {
        run.insert("timestamp".into(), Value::from(timestamp.clone()));
    }
    root.insert("run".into(), Value::Object(run));

    let metrics: Vec<Value> = report.metrics.iter().map(metric_json).collect();
    root.insert("metrics".into(), Value::Array(metrics));

    root.insert(
        "overall_cpk".into(),
        extended_json(report.overall_cpk.value),
    );
    root.insert(
        "overall_degenerate".into(),
        Value::from(report.overall_cpk.degenerate),
    );
    root.insert(
        "overall_verdict".into(),
        Value::from(report.overall_verdict.key()),
    );
    root.insert(
        "verdict_note".into(),
        Value::from(report.overall_verdict.note()),
    );
    root.insert(
        "warnings".into(),
        Value::Array(report.warnings.iter().map(|w| Value::from(w.clone())).collect()),
    );

    let mut text = serde_json::to_string_pretty(&Value::Object(root))
        .expect("report values are always serializable");
    text.push('\n');
    text
}

fn metric_json(metric: &MetricReport) -> Value {
    let capability = &metric.capability;
    let mut object = Map::new();
    object.insert("name".into(), Value::from(metric.definition.name.clone()));
    object.insert(
        "kind".into(),
        Value::from(metric.definition.kind.as_str()),
    );
    object.insert(
        "positive_label".into(),
        optional(metric.definition.positive_label.clone(), Value::from),
    );
    object.insert(
        "point_estimate".into(),
        finite_json(metric.point_estimate.value),
    );
    object.insert(
        "n_basis".into(),
        Value::from(metric.point_estimate.n_basis),
    );
    object.insert(
        "bootstrap_mean".into(),
        finite_json(metric.distribution_mean),
    );
    object.insert("ci_lower".into(), finite_json(metric.ci.lower));
    object.insert("ci_upper".into(), finite_json(metric.ci.upper));
    object.insert("lsl".into(), optional(capability.limits.lsl, finite_json));
    object.insert("usl".into(), optional(capability.limits.usl, finite_json));
    object.insert(
        "cpl".into(),
        optional(capability.cpl, |i| extended_json(i.value)),
    );
    object.insert(
        "cpu".into(),
        optional(capability.cpu, |i| extended_json(i.value)),
    );
    object.insert("cpk".into(), extended_json(capability.cpk.value));
    object.insert(
        "degenerate".into(),
        Value::from(capability.cpk.degenerate),
    );
    object.insert("verdict".into(), Value::from(capability.verdict.key()));
    Value::Object(object)
}

/// Human-readable Markdown rendering carrying the same numbers as the
/// JSON rendering.
pub fn render_markdown(report: &EvaluationReport) -> String {
    let mut out = String::new();
    out.push_str("# SCFC evaluation report\n\n");
    out.push_str(&format!("- seed: {}\n", report.run.seed));
    out.push_str(&format!("- resamples: {}\n", report.run.resamples));
    out.push_str(&format!("- sample size: {}\n", report.run.sample_size));
    out.push_str(&format!("- resample size: {}\n", report.run.resample_size));
    out.push_str(&format!(
        "- confidence level: {}\n",
        fmt_number(report.run.confidence_level)
    ));
    out.push_str(&format!("- tool version: {}\n", report.run.tool_version));
    if let Some(timestamp) = &report.run.timestamp {
        out.push_str(&format!("- timestamp: {timestamp}\n"));
    }
    out.push('\n');

    out.push_str(
        "| metric | kind | point | bootstrap mean | CI | limits | Cpk | verdict |\n",
    );
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for metric in &report.metrics {
        let limits = describe_limits(&metric.capability);
        out.push_str(&format!(
            "| {} | {} | {} | {} | [{}, {}] | {} | {} | {} |\n",
            metric.definition.name,
            metric.definition.kind.as_str(),
            fmt_number(metric.point_estimate.value),
            fmt_number(metric.distribution_mean),
            fmt_number(metric.ci.lower),
            fmt_number(metric.ci.upper),
            limits,
            fmt_number(metric.capability.cpk.value),
            metric.capability.verdict.as_str(),
        ));
    }
    if !report.warnings.is_empty() {
        out.push_str("\n## Warnings\n\n");
        for warning in &report.warnings {
            out.push_str(&format!("- {warning}\n"));
        }
    }

    out.push('\n');
    out.push_str(&verdict_line(report));
    out.push('\n');
    out
}

fn describe_limits(capability: &CapabilityResult) -> String {
    match (capability.limits.lsl, capability.limits.usl) {
        (Some(lsl), Some(usl)) => {
            format!("LSL {}, USL {}", fmt_number(lsl), fmt_number(usl))
        }
        (Some(lsl), None) => format!("LSL {}", fmt_number(lsl)),
        (None, Some(usl)) => format!("USL {}", fmt_number(usl)),
        (None, None) => "-".to_string(),
    }
}
