//! Capability indices against specification limits, and the deployment
//! verdict they imply.
//!
//! The variability measure is the distance from the bootstrap-distribution
//! mean to the relevant confidence bound, not a standard deviation:
//! Cpl = (mean − LSL) / (mean − CI lower), Cpu = (USL − mean) /
//! (CI upper − mean), Cpk = min of the sides that have a limit.

use crate::bootstrap::ConfidenceInterval;
use crate::config::SpecificationLimits;
use crate::error::{Error, Result};

/// Denominators at or below this are treated as zero-width (degenerate).
pub const DEGENERACY_EPSILON: f64 = 1e-12;

/// A capability index value. Degenerate means the variability denominator
/// was zero, so the value is a signed infinity rather than a quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexValue {
    pub value: f64,
    pub degenerate: bool,
}

impl IndexValue {
    fn finite(value: f64) -> Self {
        Self {
            value,
            degenerate: false,
        }
    }

    fn degenerate(value: f64) -> Self {
        Self {
            value,
            degenerate: true,
        }
    }
}

/// Capability against the lower specification limit.
///
/// A zero-width lower side yields +∞ when the mean meets the limit and
/// −∞ when it does not, flagged degenerate either way.
pub fn cpl(mean: f64, lsl: f64, ci_lower: f64) -> Result<IndexValue> {
    if ci_lower > mean + DEGENERACY_EPSILON {
        return Err(Error::InvalidOrder {
            message: format!("CI lower bound {ci_lower} exceeds the mean {mean}"),
        });
    }
    let denominator = mean - ci_lower;
    if denominator > DEGENERACY_EPSILON {
        Ok(IndexValue::finite((mean - lsl) / denominator))
    } else if mean >= lsl {
        Ok(IndexValue::degenerate(f64::INFINITY))
    } else {
        Ok(IndexValue::degenerate(f64::NEG_INFINITY))
    }
}

/// Capability against the upper specification limit; the mirror of
/// [`cpl`].
pub fn cpu(mean: f64, usl: f64, ci_upper: f64) -> Result<IndexValue> {
    if ci_upper < mean - DEGENERACY_EPSILON {
        return Err(Error::InvalidOrder {
            message: format!("CI upper bound {ci_upper} lies below the mean {mean}"),
        });
    }
    let denominator = ci_upper - mean;
    if denominator > DEGENERACY_EPSILON {
        Ok(IndexValue::finite((usl - mean) / denominator))
    } else if usl >= mean {
        Ok(IndexValue::degenerate(f64::INFINITY))
    } else {
        Ok(IndexValue::degenerate(f64::NEG_INFINITY))
    }
}

/// Cpk: the minimum of the present indices; an absent side counts as +∞.
/// On a value tie the lower-side index is taken.
pub fn combine_cpk(cpl: Option<IndexValue>, cpu: Option<IndexValue>) -> Result<IndexValue> {
    match (cpl, cpu) {
        (None, None) => Err(Error::NoIndices),
        (Some(lower), None) => Ok(lower),
        (None, Some(upper)) => Ok(upper),
        (Some(lower), Some(upper)) => Ok(if lower.value <= upper.value {
            lower
        } else {
            upper
        }),
    }
}

/// The categorical deployment decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Unacceptable,
    Capable,
    Excellent,
}

impl Verdict {
    /// Capitalized name, used on the verdict line and in Markdown.
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Unacceptable => "Unacceptable",
            Verdict::Capable => "Capable",
            Verdict::Excellent => "Excellent",
        }
    }

    /// Lowercase name, used in JSON.
    pub fn key(&self) -> &'static str {
        match self {
            Verdict::Unacceptable => "unacceptable",
            Verdict::Capable => "capable",
            Verdict::Excellent => "excellent",
        }
    }

    pub fn note(&self) -> &'static str {
        match self {
            Verdict::Unacceptable => "below minimum capability; do not deploy",
            Verdict::Capable => "meets the specification; deploy with monitoring",
            Verdict::Excellent => "exceeds the specification with a wide safety margin",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Band the index: cpk < 1.0 is Unacceptable, 1.0 ≤ cpk < 2.0 Capable,
/// cpk ≥ 2.0 (including +∞) Excellent. −∞ falls in Unacceptable.
pub fn classify_verdict(cpk: f64) -> Verdict {
    if cpk >= 2.0 {
        Verdict::Excellent
    } else if cpk >= 1.0 {
        Verdict::Capable
    } else {
        Verdict::Unacceptable
    }
}

/// The full capability assessment of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CapabilityResult {
    pub mean: f64,
    pub ci: ConfidenceInterval,
    pub limits: SpecificationLimits,
    pub cpl: Option<IndexValue>,
    pub cpu: Option<IndexValue>,
    pub cpk: IndexValue,
    pub verdict: Verdict,
}

impl CapabilityResult {
    /// True when the governing side of the interval has zero width.
    pub fn is_degenerate(&self) -> bool {
        self.cpk.degenerate
    }
}

/// Assess a bootstrap mean and confidence interval against limits: one
/// index per present limit, combined into Cpk and a verdict.
pub fn assess(
    mean: f64,
    ci: &ConfidenceInterval,
    limits: &SpecificationLimits,
) -> Result<CapabilityResult> {
    let cpl_value = limits.lsl.map(|lsl| cpl(mean, lsl, ci.lower)).transpose()?;
    let cpu_value = limits.usl.map(|usl| cpu(mean, usl, ci.upper)).transpose()?;
    let cpk = combine_cpk(cpl_value, cpu_value)?;
    Ok(CapabilityResult {
        mean,
        ci: *ci,
        limits: *limits,
        cpl: cpl_value,
        cpu: cpu_value,
        cpk,
        verdict: classify_verdict(cpk.value),
    })
}
