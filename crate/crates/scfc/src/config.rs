//! Evaluation specification: which metrics to compute, the business
//! limits they must meet, and the resampling parameters.
//!
//! The JSON schema is strict: unknown keys are rejected at every level so
//! a typo like `"postive_label"` or `"us1"` can never silently weaken a
//! quality gate.

use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::ingest::read_to_string;
use crate::metrics::MetricKind;

pub const DEFAULT_CONFIDENCE_LEVEL: f64 = 0.95;
pub const DEFAULT_RESAMPLES: u64 = 1000;
pub const MIN_RESAMPLES: u64 = 100;

/// Lower and upper specification limits for one metric. At least one
/// bound must be present; a one-sided requirement leaves the other None.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecificationLimits {
    pub lsl: Option<f64>,
    pub usl: Option<f64>,
}

impl SpecificationLimits {
    pub fn lower(lsl: f64) -> Self {
        Self {
            lsl: Some(lsl),
            usl: None,
        }
    }

    pub fn upper(usl: f64) -> Self {
        Self {
            lsl: None,
            usl: Some(usl),
        }
    }

    pub fn band(lsl: f64, usl: f64) -> Self {
        Self {
            lsl: Some(lsl),
            usl: Some(usl),
        }
    }

    /// Check the limit invariants for the named metric. `proportion`
    /// additionally constrains both bounds to [0, 1].
    pub fn validate(&self, metric: &str, proportion: bool) -> Result<()> {
        let (lsl, usl) = (self.lsl, self.usl);
        if lsl.is_none() && usl.is_none() {
            return Err(Error::NoLimits {
                metric: metric.into(),
            });
        }
        if let (Some(lower), Some(upper)) = (lsl, usl) {
            if lower >= upper {
                return Err(Error::InvertedLimits {
                    metric: metric.into(),
                    lsl: lower,
                    usl: upper,
                });
            }
        }
        for (bound, value) in [("lsl", lsl), ("usl", usl)] {
            if let Some(value) = value {
                if !value.is_finite() || (proportion && !(0.0..=1.0).contains(&value)) {
                    return Err(Error::LimitOutOfRange {
                        metric: metric.into(),
                        bound: bound.into(),
                        value,
                    });
                }
            }
        }
        Ok(())
    }
}

/// One metric to evaluate: a name for reports, the statistic kind, the
/// positive class label (classification kinds only), and its limits.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricDefinition {
    pub name: String,
    pub kind: MetricKind,
    pub positive_label: Option<String>,
    pub limits: SpecificationLimits,
}

impl MetricDefinition {
    pub fn new(
        name: impl Into<String>,
        kind: MetricKind,
        positive_label: Option<String>,
        limits: SpecificationLimits,
    ) -> Result<Self> {
        let definition = Self {
            name: name.into(),
            kind,
            positive_label,
            limits,
        };
        definition.validate()?;
        Ok(definition)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.is_classification() && self.positive_label.is_none() {
            return Err(Error::MissingPositiveLabel {
                metric: self.name.clone(),
                kind: self.kind.as_str().into(),
            });
        }
        self.limits.validate(&self.name, self.kind.is_proportion())
    }
}

/// The full evaluation specification with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSpec {
    pub metrics: Vec<MetricDefinition>,
    pub confidence_level: f64,
    pub resamples: u64,
    pub seed: u64,
}

impl EvaluationSpec {
    /// Wrap metric definitions with default confidence level (0.95),
    /// resamples (1000), and seed (0).
    pub fn new(metrics: Vec<MetricDefinition>) -> Result<Self> {
        let spec = Self {
            metrics,
            confidence_level: DEFAULT_CONFIDENCE_LEVEL,
            resamples: DEFAULT_RESAMPLES,
            seed: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_confidence_level(mut self, level: f64) -> Result<Self> {
        self.confidence_level = level;
        self.validate()?;
        Ok(self)
    }

    pub fn with_resamples(mut self, resamples: u64) -> Result<Self> {
        self.resamples = resamples;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.metrics.is_empty() {
            return Err(Error::MalformedInput {
                path: "spec".into(),
                message: "`metrics` must contain at least one metric".into(),
            });
        }
        let mut names = std::collections::BTreeSet::new();
        for metric in &self.metrics {
            metric.validate()?;
            if !names.insert(metric.name.as_str()) {
                return Err(Error::DuplicateMetricName {
                    name: metric.name.clone(),
                });
            }
        }
        if self.resamples < MIN_RESAMPLES {
            return Err(Error::TooFewResamples {
                value: self.resamples,
            });
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::InvalidConfidenceLevel {
                value: self.confidence_level,
            });
        }
        Ok(())
    }

    /// Non-fatal conditions worth surfacing in the report.
    pub fn validation_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.resamples < DEFAULT_RESAMPLES {
            warnings.push(format!(
                "resamples = {} is below the recommended 1000; confidence bounds will be coarse",
                self.resamples
            ));
        }
        warnings
    }
}

/// Parse an evaluation spec from JSON. `origin` labels the source in
/// error messages.
pub fn parse_spec(source: &str, origin: &str) -> Result<EvaluationSpec> {
    let value: Value = serde_json::from_str(source).map_err(|e| Error::MalformedInput {
        path: origin.into(),
        message: e.to_string(),
    })?;
    let object = value.as_object().ok_or_else(|| Error::MalformedInput {
        path: origin.into(),
        message: "expected a JSON object".into(),
    })?;

    for key in object.keys() {
        if !["metrics", "confidence_level", "resamples", "seed"].contains(&key.as_str()) {
            return Err(Error::MalformedInput {
                path: origin.into(),
                message: format!("unknown field `{key}`"),
            });
        }
    }

    let metrics_raw = object
        .get("metrics")
        .ok_or_else(|| Error::MissingField {
            path: origin.into(),
            field: "metrics".into(),
        })?
        .as_array()
        .ok_or_else(|| Error::MalformedInput {
            path: format!("{origin}.metrics"),
            message: "must be an array".into(),
        })?;

    let mut metrics = Vec::with_capacity(metrics_raw.len());
    for (index, raw) in metrics_raw.iter().enumerate() {
        metrics.push(parse_metric(raw, &format!("{origin}.metrics[{index}]"))?);
    }

    let mut spec = EvaluationSpec {
        metrics,
        confidence_level: DEFAULT_CONFIDENCE_LEVEL,
        resamples: DEFAULT_RESAMPLES,
        seed: 0,
    };
    if let Some(raw) = object.get("confidence_level") {
        spec.confidence_level = raw.as_f64().ok_or_else(|| Error::MalformedInput {
            path: format!("{origin}.confidence_level"),
            message: "must be a number".into(),
        })?;
    }
    if let Some(raw) = object.get("resamples") {
        spec.resamples = raw.as_u64().ok_or_else(|| Error::MalformedInput {
            path: format!("{origin}.resamples"),
            message: "must be a nonnegative integer".into(),
        })?;
    }
    if let Some(raw) = object.get("seed") {
        spec.seed = raw.as_u64().ok_or_else(|| Error::MalformedInput {
            path: format!("{origin}.seed"),
            message: "must be a nonnegative integer".into(),
        })?;
    }

    spec.validate()?;
    Ok(spec)
}

/// Parse an evaluation-spec JSON file.
pub fn parse_spec_path(path: &Path) -> Result<EvaluationSpec> {
    let text = read_to_string(path)?;
    parse_spec(&text, &path.display().to_string())
}

fn parse_metric(raw: &Value, path: &str) -> Result<MetricDefinition> {
    let object = raw.as_object().ok_or_else(|| Error::MalformedInput {
        path: path.into(),
        message: "must be an object".into(),
    })?;

    for key in object.keys() {
        if !["name", "kind", "positive_label", "lsl", "usl"].contains(&key.as_str()) {
            return Err(Error::MalformedInput {
                path: path.into(),
                message: format!("unknown field `{key}`"),
            });
        }
    }

    let text_field = |name: &str| -> Result<Option<String>> {
        match object.get(name) {
            None => Ok(None),
            Some(raw) => raw
                .as_str()
                .map(|s| Some(s.to_string()))
                .ok_or_else(|| Error::MalformedInput {
                    path: format!("{path}.{name}"),
                    message: "must be a string".into(),
                }),
        }
    };
    let number_field = |name: &str| -> Result<Option<f64>> {
        match object.get(name) {
            None => Ok(None),
            Some(raw) => raw
                .as_f64()
                .map(Some)
                .ok_or_else(|| Error::MalformedInput {
                    path: format!("{path}.{name}"),
                    message: "must be a number".into(),
                }),
        }
    };

    let name = text_field("name")?.ok_or_else(|| Error::MissingField {
        path: path.into(),
        field: "name".into(),
    })?;
    let kind_text = text_field("kind")?.ok_or_else(|| Error::MissingField {
        path: path.into(),
        field: "kind".into(),
    })?;
    let kind = MetricKind::parse(&kind_text).ok_or_else(|| Error::UnknownKind {
        path: format!("{path}.kind"),
        kind: kind_text,
    })?;

    MetricDefinition::new(
        name,
        kind,
        text_field("positive_label")?,
        SpecificationLimits {
            lsl: number_field("lsl")?,
            usl: number_field("usl")?,
        },
    )
}
