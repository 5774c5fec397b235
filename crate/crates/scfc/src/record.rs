//! Evaluation records: the unit that gets sampled and resampled.
//!
//! A record is one test instance with an id, optional strata attributes,
//! and exactly one outcome payload. A [`RecordSet`] is an ordered,
//! homogeneous collection of them: every record carries the same outcome
//! variant and the same strata keys, and ids are unique.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// The single outcome payload a record carries.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// The prediction was acceptable or not.
    Correct(bool),
    /// Ground-truth and predicted class labels.
    Label { actual: String, predicted: String },
    /// A continuous measurement (latency, error, ...).
    Value(f64),
}

impl Outcome {
    pub fn kind(&self) -> OutcomeKind {
        match self {
            Outcome::Correct(_) => OutcomeKind::Correctness,
            Outcome::Label { .. } => OutcomeKind::Classification,
            Outcome::Value(_) => OutcomeKind::Continuous,
        }
    }
}

/// Which outcome variant a homogeneous record set holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeKind {
    Correctness,
    Classification,
    Continuous,
}

impl OutcomeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutcomeKind::Correctness => "correctness",
            OutcomeKind::Classification => "classification",
            OutcomeKind::Continuous => "continuous",
        }
    }
}

impl std::fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One test instance: id, strata attributes, outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRecord {
    pub id: String,
    pub strata: BTreeMap<String, String>,
    pub outcome: Outcome,
}

impl EvaluationRecord {
    pub fn correctness(id: impl Into<String>, correct: bool) -> Self {
        Self {
            id: id.into(),
            strata: BTreeMap::new(),
            outcome: Outcome::Correct(correct),
        }
    }

    pub fn classification(
        id: impl Into<String>,
        actual: impl Into<String>,
        predicted: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            strata: BTreeMap::new(),
            outcome: Outcome::Label {
                actual: actual.into(),
                predicted: predicted.into(),
            },
        }
    }

    pub fn continuous(id: impl Into<String>, value: f64) -> Self {
        Self {
            id: id.into(),
            strata: BTreeMap::new(),
            outcome: Outcome::Value(value),
        }
    }

    /// Attach a stratum attribute, builder style.
    pub fn with_stratum(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.strata.insert(key.into(), value.into());
        self
    }
}

/// An ordered, validated, homogeneous collection of records.
///
/// Immutable after construction; cheap to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    records: Vec<EvaluationRecord>,
    kind: OutcomeKind,
    strata_keys: BTreeSet<String>,
}

impl RecordSet {
    /// Validate and wrap a list of records.
    ///
    /// Checks the three set invariants: one outcome variant throughout,
    /// unique ids, and an identical strata key set on every record.
    pub fn new(records: Vec<EvaluationRecord>) -> Result<Self> {
        let first = records.first().ok_or(Error::EmptyRecordSet)?;
        let kind = first.outcome.kind();
        let strata_keys: BTreeSet<String> = first.strata.keys().cloned().collect();

        let mut seen = BTreeSet::new();
        for (index, record) in records.iter().enumerate() {
            if record.outcome.kind() != kind {
                return Err(Error::MixedOutcomes { index: index + 1 });
            }
            if !seen.insert(record.id.as_str()) {
                return Err(Error::DuplicateId {
                    line: index + 1,
                    id: record.id.clone(),
                });
            }
            let keys: BTreeSet<String> = record.strata.keys().cloned().collect();
            if keys != strata_keys {
                return Err(Error::InconsistentStrataKeys {
                    line: index + 1,
                    expected: join_keys(&strata_keys),
                    found: join_keys(&keys),
                });
            }
        }
        let seen_len = seen.len();
        debug_assert_eq!(seen_len, records.len());

        Ok(Self {
            records,
            kind,
            strata_keys,
        })
    }

    /// Internal constructor for subsets of an already-validated set.
    /// A subset preserves all three invariants, so no re-check is needed.
    pub(crate) fn from_validated(
        records: Vec<EvaluationRecord>,
        kind: OutcomeKind,
        strata_keys: BTreeSet<String>,
    ) -> Self {
        Self {
            records,
            kind,
            strata_keys,
        }
    }

    pub fn records(&self) -> &[EvaluationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn outcome_kind(&self) -> OutcomeKind {
        self.kind
    }

    pub fn strata_keys(&self) -> &BTreeSet<String> {
        &self.strata_keys
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EvaluationRecord> {
        self.records.iter()
    }

    /// Subset by (sorted, deduplicated) positions, preserving record order.
    pub(crate) fn subset(&self, positions: &[usize]) -> Self {
        let records = positions.iter().map(|&i| self.records[i].clone()).collect();
        Self::from_validated(records, self.kind, self.strata_keys.clone())
    }
}

pub(crate) fn join_keys(keys: &BTreeSet<String>) -> String {
    keys.iter().cloned().collect::<Vec<_>>().join(", ")
}
