//! Bootstrap resampling: build the empirical distribution of a metric and
//! extract percentile confidence intervals.
//!
//! Resample `i` draws from the substream (seed, "bootstrap", i), so the
//! distribution is identical whether resamples run sequentially or on a
//! thread pool, and identical across repeated runs.

use std::io::Write;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::config::DEFAULT_CONFIDENCE_LEVEL;
use crate::error::{Error, Result};
use crate::metrics::{classification_metric, ConfusionCounts, MetricKind};
use crate::record::{EvaluationRecord, RecordSet};
use crate::rng::derive_rng;

/// Resampling parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    /// Number of resamples S.
    pub resamples: u64,
    /// Size n of each resample; None means the input sample size.
    pub resample_size: Option<usize>,
    pub confidence_level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: 1000,
            resample_size: None,
            confidence_level: DEFAULT_CONFIDENCE_LEVEL,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn with_resamples(mut self, resamples: u64) -> Self {
        self.resamples = resamples;
        self
    }

    pub fn with_resample_size(mut self, size: usize) -> Self {
        self.resample_size = Some(size);
        self
    }

    pub fn with_confidence_level(mut self, level: f64) -> Self {
        self.confidence_level = level;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.resamples == 0 {
            return Err(Error::InvalidBootstrapConfig {
                message: "resamples must be at least 1".into(),
            });
        }
        if self.resample_size == Some(0) {
            return Err(Error::InvalidBootstrapConfig {
                message: "resample_size must be at least 1".into(),
            });
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::InvalidConfidenceLevel {
                value: self.confidence_level,
            });
        }
        Ok(())
    }
}

/// A two-sided percentile confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

/// The empirical distribution of a statistic over S resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDistribution {
    sorted: Vec<f64>,
    raw: Vec<f64>,
    mean: f64,
    config: BootstrapConfig,
}

impl BootstrapDistribution {
    /// Wrap precomputed statistic values (import/audit path). The values
    /// are taken in resample order.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let config = BootstrapConfig::default().with_resamples(values.len() as u64);
        Self::assemble(values, config)
    }

    fn assemble(raw: Vec<f64>, config: BootstrapConfig) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if raw.len() as u64 != config.resamples {
            return Err(Error::InvalidBootstrapConfig {
                message: format!(
                    "distribution holds {} values but the configuration asks for {} resamples",
                    raw.len(),
                    config.resamples
                ),
            });
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBootstrapConfig {
                message: "distribution contains a non-finite value".into(),
            });
        }
        // The mean is summed in resample order, never in sort or thread
        // order, so it is bit-stable. Kahan compensation keeps a constant
        // distribution's mean exactly equal to that constant.
        let mut sum = 0.0;
        let mut compensation = 0.0;
        for &value in &raw {
            let adjusted = value - compensation;
            let next = sum + adjusted;
            compensation = (next - sum) - adjusted;
            sum = next;
        }
        let mean = sum / raw.len() as f64;
        let mut sorted = raw.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            sorted,
            raw,
            mean,
            config,
        })
    }

    /// Values sorted ascending (the order statistics).
    pub fn values_sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Values in resample order, for audit dumps.
    pub fn values(&self) -> &[f64] {
        &self.raw
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn config(&self) -> &BootstrapConfig {
        &self.config
    }

    /// Percentile confidence interval by 1-based nearest rank: with
    /// α = 1 − level, the bounds are sorted[ceil((α/2)·S)] and
    /// sorted[ceil((1−α/2)·S)], ranks clamped to [1, S].
    pub fn percentile_ci(&self, level: f64) -> Result<ConfidenceInterval> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::InvalidConfidenceLevel { value: level });
        }
        let s = self.sorted.len();
        let alpha = 1.0 - level;
        let lower = self.sorted[nearest_rank(alpha / 2.0, s) - 1];
        let upper = self.sorted[nearest_rank(1.0 - alpha / 2.0, s) - 1];
        Ok(ConfidenceInterval {
            lower,
            upper,
            level,
        })
    }
}

/// 1-based nearest rank: ceil(q·s) clamped to [1, s]. A product within
/// 1e-9 of an integer snaps to it first; 0.025·1000 computes as
/// 25.000000000000004 in floating point and must yield rank 25, not 26.
fn nearest_rank(q: f64, s: usize) -> usize {
    let product = q * s as f64;
    let snapped = if (product - product.round()).abs() < 1e-9 {
        product.round()
    } else {
        product.ceil()
    };
    (snapped.max(1.0) as usize).clamp(1, s)
}

/// Bootstrap a statistic over records: for i in 1..=S, draw n record
/// indices uniformly with replacement from substream (seed, "bootstrap",
/// i) and evaluate the statistic on that multiset.
///
/// A statistic undefined on some resample (for example recall on a
/// resample that drew zero actual positives) aborts the whole run;
/// skipping resamples would bias the distribution. The returned error
/// names the first failing resample index deterministically.
pub fn bootstrap_records<F>(
    records: &RecordSet,
    statistic: F,
    config: &BootstrapConfig,
) -> Result<BootstrapDistribution>
where
    F: Fn(&[&EvaluationRecord]) -> Result<f64> + Sync,
{
    config.validate()?;
    if records.is_empty() {
        return Err(Error::EmptyRecordSet);
    }
    let pool = records.records();
    let n = config.resample_size.unwrap_or(pool.len());

    let outcomes: Vec<Result<f64>> = (0..config.resamples)
        .into_par_iter()
        .map(|i| {
            let index = i + 1;
            let mut rng = derive_rng(config.seed, "bootstrap", index);
            let mut resample: Vec<&EvaluationRecord> = Vec::with_capacity(n);
            for _ in 0..n {
                resample.push(&pool[rng.random_range(0..pool.len())]);
            }
            statistic(&resample).map_err(|e| undefined_on_resample(e, index as usize))
        })
        .collect();

    BootstrapDistribution::assemble(collect_resamples(outcomes)?, config.clone())
}

/// Bootstrap a classification metric over aggregate confusion counts:
/// each resample draws cell counts from a multinomial with total
/// resample_size (default: the counts total) and the observed cell
/// proportions, then evaluates the metric. Statistically equivalent to
/// expanding the counts to records and calling [`bootstrap_records`],
/// without materializing the records.
pub fn bootstrap_counts(
    counts: &ConfusionCounts,
    kind: MetricKind,
    config: &BootstrapConfig,
) -> Result<BootstrapDistribution> {
    config.validate()?;
    if !kind.is_classification() {
        return Err(Error::WrongOutcomeKind {
            operation: "bootstrap_counts".into(),
            expected: "a classification metric kind".into(),
            found: kind.as_str().into(),
        });
    }
    let total = counts.total();
    if total == 0 {
        return Err(Error::AllZero {
            path: "counts".into(),
        });
    }
    // The point estimate must be defined before resampling starts.
    classification_metric(counts, kind)?;

    let n = config.resample_size.map(|s| s as u64).unwrap_or(total);
    let cells = [
        counts.true_positives,
        counts.false_positives,
        counts.true_negatives,
        counts.false_negatives,
    ];
    let probabilities = cells.map(|c| c as f64 / total as f64);

    let outcomes: Vec<Result<f64>> = (0..config.resamples)
        .into_par_iter()
        .map(|i| {
            let index = i + 1;
            let mut rng = derive_rng(config.seed, "bootstrap-counts", index);
            let drawn = multinomial_draw(&mut rng, n, &probabilities);
            let resampled = ConfusionCounts::new(drawn[0], drawn[1], drawn[2], drawn[3]);
            classification_metric(&resampled, kind)
                .map(|metric| metric.value)
                .map_err(|e| undefined_on_resample(e, index as usize))
        })
        .collect();

    BootstrapDistribution::assemble(collect_resamples(outcomes)?, config.clone())
}

/// Dump the raw (resample-order) distribution as a single-column CSV at
/// full precision.
pub fn write_distribution_csv<W: Write>(
    dist: &BootstrapDistribution,
    mut writer: W,
) -> Result<()> {
    writeln!(writer, "value")?;
    for value in dist.values() {
        writeln!(writer, "{value}")?;
    }
    Ok(())
}

fn undefined_on_resample(error: Error, index: usize) -> Error {
    match error {
        Error::UndefinedMetric {
            metric,
            denominator,
        } => Error::UndefinedOnResample {
            resample: index,
            detail: format!("metric `{metric}` has a zero denominator ({denominator})"),
        },
        other => other,
    }
}

/// Surface the first failing resample by index, independent of which
/// thread hit an error first.
fn collect_resamples(outcomes: Vec<Result<f64>>) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        values.push(outcome?);
    }
    Ok(values)
}

/// Multinomial cell counts by sequential binomial conditioning: cell i
/// draws Binomial(remaining, p_i / remaining probability mass), the last
/// cell takes whatever remains.
fn multinomial_draw<R: Rng>(rng: &mut R, total: u64, probabilities: &[f64; 4]) -> [u64; 4] {
    let mut counts = [0u64; 4];
    let mut remaining = total;
    let mut remaining_mass = 1.0f64;
    for (i, p) in probabilities.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == probabilities.len() - 1 {
            counts[i] = remaining;
            break;
        }
        let conditional = if remaining_mass <= 0.0 {
            1.0
        } else {
            (p / remaining_mass).clamp(0.0, 1.0)
        };
        let drawn = if conditional >= 1.0 {
            remaining
        } else if conditional <= 0.0 {
            0
        } else {
            Binomial::new(remaining, conditional)
                .expect("probability is clamped to (0, 1)")
                .sample(rng)
        };
        counts[i] = drawn;
        remaining -= drawn;
        remaining_mass -= p;
    }
    counts
}
