//! Capability indices from already-computed statistics.
//!
//! No raw data needed: given a bootstrap mean, a confidence bound, and a
//! specification limit, the capability index is the ratio of the margin
//! the process has to the margin it needs. Cpk < 1 means the interval
//! crosses the limit; Cpk >= 2 means the limit sits beyond twice the
//! interval half-width.
//!
//! ```bash
//! cargo run --example capability_index
//! ```

use scfc::{assess, classify_verdict, ConfidenceInterval, SpecificationLimits};

fn main() -> scfc::Result<()> {
    // A published fraud-detection result: mean recall 99.11%, lower
    // confidence bound 98.55%, business floor 98%.
    let ci = ConfidenceInterval {
        lower: 0.9855,
        upper: 0.9967,
        level: 0.95,
    };
    let result = assess(0.9911, &ci, &SpecificationLimits::lower(0.98))?;
    println!(
        "one-sided: Cpl {}  verdict {} ({})",
        scfc::fmt_number(result.cpk.value),
        result.verdict,
        result.verdict.note()
    );

    // Two-sided: a score that must stay inside a band.
    let ci = ConfidenceInterval {
        lower: 0.62,
        upper: 0.74,
        level: 0.95,
    };
    let result = assess(0.68, &ci, &SpecificationLimits::band(0.50, 0.80))?;
    let show = |index: Option<scfc::IndexValue>| {
        index.map_or("-".to_string(), |i| scfc::fmt_number(i.value))
    };
    println!(
        "two-sided: Cpl {}  Cpu {}  Cpk {}  verdict {}",
        show(result.cpl),
        show(result.cpu),
        scfc::fmt_number(result.cpk.value),
        result.verdict
    );

    // Degenerate: a zero-width interval (every resample identical) makes
    // the index a signed infinity, flagged rather than hidden.
    let ci = ConfidenceInterval {
        lower: 1.0,
        upper: 1.0,
        level: 0.95,
    };
    let result = assess(1.0, &ci, &SpecificationLimits::lower(0.90))?;
    println!(
        "degenerate: Cpk {} (degenerate: {})  verdict {}",
        scfc::fmt_number(result.cpk.value),
        result.cpk.degenerate,
        result.verdict
    );

    // The verdict bands are left-closed at 1.0 and 2.0.
    println!("\nverdict bands:");
    for cpk in [0.999999, 1.0, 1.999999, 2.0] {
        println!("  Cpk {cpk:<9} -> {}", classify_verdict(cpk));
    }
    Ok(())
}
