//! Bootstrapping a statistic this crate does not ship.
//!
//! `bootstrap_records` accepts any closure from a resampled record slice
//! to a number, so domain-specific statistics get intervals and capability
//! verdicts for free. Here: the worst per-region success rate, a sterner
//! quantity than the overall average, gated against a 60% floor.
//!
//! ```bash
//! cargo run --example custom_statistic
//! ```

use std::collections::BTreeMap;

use scfc::{
    assess, bootstrap_records, BootstrapConfig, EvaluationRecord, Outcome, RecordSet,
    SpecificationLimits,
};

/// Success rate of the weakest region in the slice. Regions absent from a
/// resample simply don't participate; an empty slice cannot happen because
/// resamples always draw n >= 1 records.
fn worst_region_rate(records: &[&EvaluationRecord]) -> scfc::Result<f64> {
    let mut totals: BTreeMap<&str, (u32, u32)> = BTreeMap::new();
    for record in records {
        let region = record
            .strata
            .get("region")
            .map(String::as_str)
            .unwrap_or("(none)");
        let entry = totals.entry(region).or_default();
        entry.1 += 1;
        if matches!(record.outcome, Outcome::Correct(true)) {
            entry.0 += 1;
        }
    }
    Ok(totals
        .values()
        .map(|&(correct, total)| correct as f64 / total as f64)
        .fold(f64::INFINITY, f64::min))
}

fn main() -> scfc::Result<()> {
    // EU is strong (28/30), APAC is the weak spot (14/20).
    let mut records = Vec::new();
    for (region, total, correct) in [("EU", 30, 28), ("US", 25, 21), ("APAC", 20, 14)] {
        for i in 0..total {
            records.push(
                EvaluationRecord::correctness(format!("{region}-{i:02}"), i < correct)
                    .with_stratum("region", region),
            );
        }
    }
    let records = RecordSet::new(records)?;

    let config = BootstrapConfig::default().with_resamples(2000).with_seed(11);
    let distribution = bootstrap_records(&records, worst_region_rate, &config)?;
    let ci = distribution.percentile_ci(0.95)?;

    let refs: Vec<&EvaluationRecord> = records.iter().collect();
    println!("point estimate (worst region): {:.4}", worst_region_rate(&refs)?);
    println!("bootstrap mean: {:.4}", distribution.mean());
    println!("95% interval: [{:.4}, {:.4}]", ci.lower, ci.upper);

    let result = assess(distribution.mean(), &ci, &SpecificationLimits::lower(0.60))?;
    println!(
        "Cpk {} -> {} ({})",
        scfc::fmt_number(result.cpk.value),
        result.verdict,
        result.verdict.note()
    );
    Ok(())
}
