//! Stratified sampling: derive strata from record attributes, apportion a
//! sample size across them, and draw records deterministically.
//!
//! Apportionment is largest-remainder (Hamilton): floors of the quotas
//! n·p_i first, then one extra unit per leftover seat to the strata with
//! the largest fractional remainders, remainder ties broken by stratum-key
//! lexicographic order. When an allocation exceeds a stratum's population
//! the stratum is capped at its size and the overflow redistributed by the
//! same rule, with a flag set so reports can warn.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::record::{EvaluationRecord, RecordSet};
use crate::rng::derive_rng;

/// The attribute combination identifying one stratum. Ordering is
/// lexicographic over the sorted key/value pairs; it drives remainder
/// tie-breaks and output order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StratumKey(BTreeMap<String, String>);

impl StratumKey {
    /// The stratum a record belongs to under the given keys.
    pub fn of_record(record: &EvaluationRecord, strata_keys: &[String]) -> Self {
        let mut attributes = BTreeMap::new();
        for key in strata_keys {
            if let Some(value) = record.strata.get(key) {
                attributes.insert(key.clone(), value.clone());
            }
        }
        Self(attributes)
    }

    /// Build a key directly from attribute pairs.
    pub fn from_attributes(attributes: BTreeMap<String, String>) -> Self {
        Self(attributes)
    }

    pub fn attributes(&self) -> &BTreeMap<String, String> {
        &self.0
    }

    /// Canonical label: `key=value` pairs joined by commas in key order;
    /// the empty combination (no stratification) is `(all)`. External
    /// proportion maps are keyed by these labels.
    pub fn label(&self) -> String {
        if self.0.is_empty() {
            return "(all)".to_string();
        }
        self.0
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl std::fmt::Display for StratumKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

/// One stratum of the population: its identity, size, and share.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumCount {
    pub key: StratumKey,
    pub count: usize,
    pub proportion: f64,
}

/// The allocation decided for one stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumAllocation {
    pub key: StratumKey,
    pub target_proportion: f64,
    pub allocated: usize,
    pub available: usize,
}

/// The apportionment outcome: per-stratum allocations plus a flag telling
/// whether any stratum had to be capped and its overflow redistributed.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub allocations: Vec<StratumAllocation>,
    pub redistributed: bool,
}

/// Everything needed to draw a sample reproducibly.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub strata_keys: Vec<String>,
    pub allocations: Vec<StratumAllocation>,
    pub seed: u64,
    pub requested_size: usize,
    pub redistributed: bool,
}

impl SamplingPlan {
    pub fn total_allocated(&self) -> usize {
        self.allocations.iter().map(|a| a.allocated).sum()
    }
}

/// Count the distinct attribute combinations present in the population.
/// An empty key list yields the single stratum `(all)`.
pub fn derive_strata(population: &RecordSet, strata_keys: &[String]) -> Result<Vec<StratumCount>> {
    validate_keys(population, strata_keys)?;
    let groups = group_indices(population, strata_keys);
    let total = population.len() as f64;
    Ok(groups
        .into_iter()
        .map(|(key, indices)| StratumCount {
            key,
            count: indices.len(),
            proportion: indices.len() as f64 / total,
        })
        .collect())
}

/// Apportion `n` across strata by capped largest remainder. External
/// proportions, when given, override the observed ones (keyed by stratum
/// label); they must cover every stratum and sum to 1.
pub fn allocate(
    strata: &[StratumCount],
    n: usize,
    external_proportions: Option<&BTreeMap<String, f64>>,
) -> Result<AllocationResult> {
    let targets = resolve_proportions(strata, external_proportions)?;

    let available: Vec<usize> = strata.iter().map(|s| s.count).collect();
    let total_available: usize = available.iter().sum();
    let effective_n = n.min(total_available);

    let mut allocated = vec![0usize; strata.len()];
    let mut saturated = vec![false; strata.len()];
    let mut redistributed = false;
    let mut remaining = effective_n;

    // Each pass runs Hamilton over the unsaturated strata; any stratum
    // allocated beyond its size is capped and removed, and the next pass
    // re-apportions the shortfall. Every pass saturates at least one
    // stratum or finishes, so this terminates.
    while remaining > 0 {
        let active: Vec<usize> = (0..strata.len()).filter(|&i| !saturated[i]).collect();
        let weights: Vec<f64> = active.iter().map(|&i| targets[i]).collect();
        let keys: Vec<&StratumKey> = active.iter().map(|&i| &strata[i].key).collect();
        let shares = hamilton(&weights, remaining, &keys);

        let mut overflowed = false;
        for (&index, share) in active.iter().zip(shares) {
            let capacity = available[index] - allocated[index];
            if share > capacity {
                allocated[index] = available[index];
                saturated[index] = true;
                overflowed = true;
                redistributed = true;
            } else {
                allocated[index] += share;
            }
        }
        remaining = effective_n - allocated.iter().sum::<usize>();
        if !overflowed {
            break;
        }
        // Overflow strata are full; clear the partial shares of the rest
        // so the next pass re-apportions the remainder from scratch.
        if remaining > 0 {
            for &index in &active {
                if !saturated[index] {
                    remaining += allocated[index];
                    allocated[index] = 0;
                }
            }
        }
    }

    let allocations = strata
        .iter()
        .enumerate()
        .map(|(i, stratum)| StratumAllocation {
            key: stratum.key.clone(),
            target_proportion: targets[i],
            allocated: allocated[i],
            available: available[i],
        })
        .collect();
    Ok(AllocationResult {
        allocations,
        redistributed,
    })
}

/// Derive strata and allocate in one step, producing a reusable plan.
pub fn plan_sample(
    population: &RecordSet,
    strata_keys: &[String],
    n: usize,
    seed: u64,
    external_proportions: Option<&BTreeMap<String, f64>>,
) -> Result<SamplingPlan> {
    let strata = derive_strata(population, strata_keys)?;
    let result = allocate(&strata, n, external_proportions)?;
    Ok(SamplingPlan {
        strata_keys: strata_keys.to_vec(),
        allocations: result.allocations,
        seed,
        requested_size: n,
        redistributed: result.redistributed,
    })
}

/// Draw the planned sample: within each stratum, `allocated` records
/// chosen uniformly without replacement from the substream
/// (seed, "sample:" + stratum label). Output preserves population record
/// order. Identical inputs give identical samples.
pub fn draw_sample(population: &RecordSet, plan: &SamplingPlan) -> Result<RecordSet> {
    validate_keys(population, &plan.strata_keys)?;
    let groups = group_indices(population, &plan.strata_keys);

    let planned: BTreeMap<&StratumKey, &StratumAllocation> =
        plan.allocations.iter().map(|a| (&a.key, a)).collect();
    for key in groups.keys() {
        if !planned.contains_key(key) {
            return Err(Error::IncompletePlan { label: key.label() });
        }
    }

    let mut chosen: Vec<usize> = Vec::with_capacity(plan.total_allocated());
    for allocation in &plan.allocations {
        let indices = match groups.get(&allocation.key) {
            Some(indices) => indices.as_slice(),
            None if allocation.allocated == 0 => continue,
            None => {
                return Err(Error::InfeasibleAllocation {
                    label: allocation.key.label(),
                    allocated: allocation.allocated,
                    available: 0,
                })
            }
        };
        if allocation.allocated > indices.len() {
            return Err(Error::InfeasibleAllocation {
                label: allocation.key.label(),
                allocated: allocation.allocated,
                available: indices.len(),
            });
        }
        if allocation.allocated == indices.len() {
            chosen.extend_from_slice(indices);
            continue;
        }
        let domain = format!("sample:{}", allocation.key.label());
        let mut rng = derive_rng(plan.seed, &domain, 0);
        let picks = rand::seq::index::sample(&mut rng, indices.len(), allocation.allocated);
        chosen.extend(picks.iter().map(|local| indices[local]));
    }

    chosen.sort_unstable();
    Ok(population.subset(&chosen))
}

/// Per-stratum share deviation between a sample and its population.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumDeviation {
    pub key: StratumKey,
    pub population_proportion: f64,
    pub sample_proportion: f64,
    pub absolute_deviation: f64,
}

/// Compare sample composition with population composition, one entry per
/// stratum present in either. Strata missing from the sample appear with
/// a sample proportion of 0.
pub fn representativeness_report(
    sample: &RecordSet,
    population: &RecordSet,
    strata_keys: &[String],
) -> Result<Vec<StratumDeviation>> {
    if sample.is_empty() {
        return Err(Error::EmptyRecordSet);
    }
    let population_strata = derive_strata(population, strata_keys)?;
    let sample_strata = derive_strata(sample, strata_keys)?;

    let sample_shares: BTreeMap<&StratumKey, f64> = sample_strata
        .iter()
        .map(|s| (&s.key, s.proportion))
        .collect();
    let population_shares: BTreeMap<&StratumKey, f64> = population_strata
        .iter()
        .map(|s| (&s.key, s.proportion))
        .collect();

    let mut keys: Vec<&StratumKey> = population_shares.keys().copied().collect();
    for key in sample_shares.keys() {
        if !population_shares.contains_key(*key) {
            keys.push(key);
        }
    }
    keys.sort();

    Ok(keys
        .into_iter()
        .map(|key| {
            let population_proportion = population_shares.get(key).copied().unwrap_or(0.0);
            let sample_proportion = sample_shares.get(key).copied().unwrap_or(0.0);
            StratumDeviation {
                key: key.clone(),
                population_proportion,
                sample_proportion,
                absolute_deviation: (population_proportion - sample_proportion).abs(),
            }
        })
        .collect())
}

/// The largest deviation in a representativeness report.
pub fn max_deviation(report: &[StratumDeviation]) -> f64 {
    report
        .iter()
        .map(|d| d.absolute_deviation)
        .fold(0.0, f64::max)
}

fn validate_keys(population: &RecordSet, strata_keys: &[String]) -> Result<()> {
    for key in strata_keys {
        if !population.strata_keys().contains(key) {
            return Err(Error::UnknownStratumKey { key: key.clone() });
        }
    }
    Ok(())
}

/// Group record positions by stratum, preserving record order inside each
/// group.
fn group_indices(
    population: &RecordSet,
    strata_keys: &[String],
) -> BTreeMap<StratumKey, Vec<usize>> {
    let mut groups: BTreeMap<StratumKey, Vec<usize>> = BTreeMap::new();
    for (index, record) in population.iter().enumerate() {
        groups
            .entry(StratumKey::of_record(record, strata_keys))
            .or_default()
            .push(index);
    }
    groups
}

/// Pick the per-stratum target proportions and check they sum to 1.
fn resolve_proportions(
    strata: &[StratumCount],
    external: Option<&BTreeMap<String, f64>>,
) -> Result<Vec<f64>> {
    let targets: Vec<f64> = match external {
        None => strata.iter().map(|s| s.proportion).collect(),
        Some(map) => {
            let labels: Vec<String> = strata.iter().map(|s| s.key.label()).collect();
            for label in map.keys() {
                if !labels.contains(label) {
                    return Err(Error::UnknownStratumLabel {
                        label: label.clone(),
                    });
                }
            }
            labels
                .iter()
                .map(|label| {
                    map.get(label)
                        .copied()
                        .ok_or_else(|| Error::MissingStratumProportion {
                            label: label.clone(),
                        })
                })
                .collect::<Result<Vec<f64>>>()?
        }
    };
    let sum: f64 = targets.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::ProportionsDoNotSum { sum });
    }
    if targets.iter().any(|p| *p < 0.0) {
        return Err(Error::ProportionsDoNotSum { sum });
    }
    Ok(targets)
}

/// Plain largest-remainder apportionment of `n` units over weights.
/// Quotas within 1e-9 of an integer snap to it before flooring, so exact
/// shares like 0.3·10 never lose a unit to floating-point dust.
fn hamilton(weights: &[f64], n: usize, keys: &[&StratumKey]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        // All-zero targets: spread by key order.
        let mut shares = vec![0usize; weights.len()];
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by_key(|&i| keys[i]);
        for (rank, &i) in order.iter().enumerate() {
            shares[i] = n / weights.len() + usize::from(rank < n % weights.len());
        }
        return shares;
    }

    let quotas: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut shares: Vec<usize> = Vec::with_capacity(quotas.len());
    let mut remainders: Vec<f64> = Vec::with_capacity(quotas.len());
    for quota in &quotas {
        let snapped = if (quota - quota.round()).abs() < 1e-9 {
            quota.round()
        } else {
            *quota
        };
        let floor = snapped.floor().max(0.0) as usize;
        shares.push(floor);
        remainders.push(snapped - floor as f64);
    }

    let assigned: usize = shares.iter().sum();
    let leftover = n.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        remainders[b]
            .total_cmp(&remainders[a])
            .then_with(|| keys[a].cmp(keys[b]))
    });
    for &index in order.iter().take(leftover) {
        shares[index] += 1;
    }
    shares
}
