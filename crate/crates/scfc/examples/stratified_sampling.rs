//! Stratified test-set construction.
//!
//! An evaluation set should mirror production traffic. Given a candidate
//! pool tagged with attributes, this plans a proportional allocation
//! (largest-remainder apportionment), draws records deterministically, and
//! reports how far each stratum's share drifted from the population's.
//!
//! ```bash
//! cargo run --example stratified_sampling
//! ```

use std::collections::BTreeMap;

use scfc::{
    draw_sample, max_deviation, plan_sample, representativeness_report, EvaluationRecord,
    RecordSet,
};

fn population() -> scfc::Result<RecordSet> {
    // 60 EU, 30 US, 10 APAC candidates; outcomes don't matter for sampling.
    let mut records = Vec::new();
    for (region, count) in [("EU", 60), ("US", 30), ("APAC", 10)] {
        for i in 0..count {
            records.push(
                EvaluationRecord::correctness(format!("{region}-{i:02}"), true)
                    .with_stratum("region", region),
            );
        }
    }
    RecordSet::new(records)
}

fn main() -> scfc::Result<()> {
    let population = population()?;
    let keys = vec!["region".to_string()];

    // Proportional draw of 25: quotas 15 / 7.5 / 2.5 are apportioned by
    // largest remainder.
    let plan = plan_sample(&population, &keys, 25, 7, None)?;
    println!("proportional allocation of 25:");
    for allocation in &plan.allocations {
        println!(
            "  {}: {} of {} (target {:.3})",
            allocation.key,
            allocation.allocated,
            allocation.available,
            allocation.target_proportion
        );
    }

    let sample = draw_sample(&population, &plan)?;
    let report = representativeness_report(&sample, &population, &keys)?;
    println!("max deviation from population shares: {:.4}", max_deviation(&report));

    // External targets: rebalance toward production traffic instead of the
    // pool's own shares. Labels are the canonical `key=value` form.
    let production = BTreeMap::from([
        ("region=EU".to_string(), 0.30),
        ("region=US".to_string(), 0.50),
        ("region=APAC".to_string(), 0.20),
    ]);
    let plan = plan_sample(&population, &keys, 25, 7, Some(&production))?;
    println!("\nallocation of 25 toward production traffic:");
    for allocation in &plan.allocations {
        println!(
            "  {}: {} (target {:.2})",
            allocation.key, allocation.allocated, allocation.target_proportion
        );
    }

    // Infeasible targets cap at availability and redistribute: asking for
    // 80% APAC when only 10 records exist saturates the stratum.
    let skewed = BTreeMap::from([
        ("region=EU".to_string(), 0.10),
        ("region=US".to_string(), 0.10),
        ("region=APAC".to_string(), 0.80),
    ]);
    let plan = plan_sample(&population, &keys, 50, 7, Some(&skewed))?;
    println!(
        "\nskewed targets over 50 draws (redistributed: {}):",
        plan.redistributed
    );
    for allocation in &plan.allocations {
        println!(
            "  {}: {} of {}",
            allocation.key, allocation.allocated, allocation.available
        );
    }
    Ok(())
}
