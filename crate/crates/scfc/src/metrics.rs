//! Point-estimate performance metrics over records or confusion counts.
//!
//! All functions here are pure: immutable inputs, value outputs, safe to
//! call concurrently. Proportion results are exact integer ratios rounded
//! once by the final floating-point division, so they reproduce bit-for-bit
//! across runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{EvaluationRecord, Outcome, OutcomeKind, RecordSet};

/// Cell counts of a binary confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

impl ConfusionCounts {
    pub fn new(
        true_positives: u64,
        false_positives: u64,
        true_negatives: u64,
        false_negatives: u64,
    ) -> Self {
        Self {
            true_positives,
            false_positives,
            true_negatives,
            false_negatives,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    /// tp + fn: how many instances are actually positive.
    pub fn actual_positives(&self) -> u64 {
        self.true_positives + self.false_negatives
    }

    /// fp + tn: how many instances are actually negative.
    pub fn actual_negatives(&self) -> u64 {
        self.false_positives + self.true_negatives
    }

    /// tp + fp: how many instances the model called positive.
    pub fn predicted_positives(&self) -> u64 {
        self.true_positives + self.false_positives
    }
}

/// The statistic a metric definition asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Recall,
    Precision,
    FalsePositiveRate,
    Accuracy,
    F1,
    ProportionCorrect,
    MeanValue,
}

impl MetricKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Recall => "recall",
            MetricKind::Precision => "precision",
            MetricKind::FalsePositiveRate => "false_positive_rate",
            MetricKind::Accuracy => "accuracy",
            MetricKind::F1 => "f1",
            MetricKind::ProportionCorrect => "proportion_correct",
            MetricKind::MeanValue => "mean_value",
        }
    }

    pub fn parse(name: &str) -> Option<MetricKind> {
        match name {
            "recall" => Some(MetricKind::Recall),
            "precision" => Some(MetricKind::Precision),
            "false_positive_rate" => Some(MetricKind::FalsePositiveRate),
            "accuracy" => Some(MetricKind::Accuracy),
            "f1" => Some(MetricKind::F1),
            "proportion_correct" => Some(MetricKind::ProportionCorrect),
            "mean_value" => Some(MetricKind::MeanValue),
            _ => None,
        }
    }

    /// True for the kinds computed from a confusion matrix.
    pub fn is_classification(&self) -> bool {
        matches!(
            self,
            MetricKind::Recall
                | MetricKind::Precision
                | MetricKind::FalsePositiveRate
                | MetricKind::Accuracy
                | MetricKind::F1
        )
    }

    /// The record outcome kind this metric is computable from.
    pub fn required_outcome(&self) -> OutcomeKind {
        match self {
            MetricKind::ProportionCorrect => OutcomeKind::Correctness,
            MetricKind::MeanValue => OutcomeKind::Continuous,
            _ => OutcomeKind::Classification,
        }
    }

    /// Whether results of this kind are proportions in [0, 1].
    pub fn is_proportion(&self) -> bool {
        !matches!(self, MetricKind::MeanValue)
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A computed statistic plus the population it was computed over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub value: f64,
    pub kind: MetricKind,
    /// Size of the denominator population actually used.
    pub n_basis: u64,
}

/// Count confusion-matrix cells from classification records.
pub fn confusion_from_records(
    records: &RecordSet,
    positive_label: &str,
) -> Result<ConfusionCounts> {
    if records.outcome_kind() != OutcomeKind::Classification {
        return Err(Error::WrongOutcomeKind {
            operation: "confusion_from_records".into(),
            expected: OutcomeKind::Classification.as_str().into(),
            found: records.outcome_kind().as_str().into(),
        });
    }
    let refs: Vec<&EvaluationRecord> = records.iter().collect();
    confusion_from_slice(&refs, positive_label)
}

/// Same cell counting over a borrowed slice, used on bootstrap resamples.
pub fn confusion_from_slice(
    records: &[&EvaluationRecord],
    positive_label: &str,
) -> Result<ConfusionCounts> {
    let mut counts = ConfusionCounts::new(0, 0, 0, 0);
    for record in records {
        let (actual, predicted) = match &record.outcome {
            Outcome::Label { actual, predicted } => (actual, predicted),
            other => {
                return Err(Error::WrongOutcomeKind {
                    operation: "confusion_from_slice".into(),
                    expected: OutcomeKind::Classification.as_str().into(),
                    found: other.kind().as_str().into(),
                })
            }
        };
        match (actual == positive_label, predicted == positive_label) {
            (true, true) => counts.true_positives += 1,
            (true, false) => counts.false_negatives += 1,
            (false, true) => counts.false_positives += 1,
            (false, false) => counts.true_negatives += 1,
        }
    }
    Ok(counts)
}

/// Compute a classification metric from confusion counts.
///
/// F1 with precision + recall = 0 is defined as 0 (not an error) as long
/// as both component denominators are nonzero, so bootstrap resamples
/// stay total.
pub fn classification_metric(counts: &ConfusionCounts, kind: MetricKind) -> Result<MetricValue> {
    let tp = counts.true_positives as f64;
    let fp = counts.false_positives as f64;
    let tn = counts.true_negatives as f64;

    let undefined = |denominator: &str| Error::UndefinedMetric {
        metric: kind.as_str().into(),
        denominator: denominator.into(),
    };

    let (value, n_basis) = match kind {
        MetricKind::Recall => {
            let den = counts.actual_positives();
            if den == 0 {
                return Err(undefined("tp+fn"));
            }
            (tp / den as f64, den)
        }
        MetricKind::Precision => {
            let den = counts.predicted_positives();
            if den == 0 {
                return Err(undefined("tp+fp"));
            }
            (tp / den as f64, den)
        }
        MetricKind::FalsePositiveRate => {
            let den = counts.actual_negatives();
            if den == 0 {
                return Err(undefined("fp+tn"));
            }
            (fp / den as f64, den)
        }
        MetricKind::Accuracy => {
            let den = counts.total();
            if den == 0 {
                return Err(undefined("tp+fp+tn+fn"));
            }
            ((tp + tn) / den as f64, den)
        }
        MetricKind::F1 => {
            if counts.predicted_positives() == 0 {
                return Err(undefined("tp+fp"));
            }
            if counts.actual_positives() == 0 {
                return Err(undefined("tp+fn"));
            }
            let precision = tp / counts.predicted_positives() as f64;
            let recall = tp / counts.actual_positives() as f64;
            let value = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            (value, counts.total())
        }
        other => {
            return Err(Error::WrongOutcomeKind {
                operation: "classification_metric".into(),
                expected: "a classification kind".into(),
                found: other.as_str().into(),
            })
        }
    };

    Ok(MetricValue {
        value,
        kind,
        n_basis,
    })
}

/// Fraction of correctness records flagged correct.
pub fn proportion_correct(records: &RecordSet) -> Result<MetricValue> {
    expect_kind(records, OutcomeKind::Correctness, "proportion_correct")?;
    let refs: Vec<&EvaluationRecord> = records.iter().collect();
    let value = proportion_correct_of(&refs)?;
    Ok(MetricValue {
        value,
        kind: MetricKind::ProportionCorrect,
        n_basis: records.len() as u64,
    })
}

/// Arithmetic mean of continuous records.
pub fn mean_value(records: &RecordSet) -> Result<MetricValue> {
    expect_kind(records, OutcomeKind::Continuous, "mean_value")?;
    for record in records.iter() {
        if let Outcome::Value(v) = &record.outcome {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    id: record.id.clone(),
                });
            }
        }
    }
    let refs: Vec<&EvaluationRecord> = records.iter().collect();
    let value = mean_value_of(&refs)?;
    Ok(MetricValue {
        value,
        kind: MetricKind::MeanValue,
        n_basis: records.len() as u64,
    })
}

/// Evaluate `kind` over a slice of records, as the bootstrap does on each
/// resample. `positive_label` is required for the classification kinds.
pub fn evaluate_statistic(
    kind: MetricKind,
    positive_label: Option<&str>,
    records: &[&EvaluationRecord],
) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyRecordSet);
    }
    match kind {
        MetricKind::ProportionCorrect => proportion_correct_of(records),
        MetricKind::MeanValue => mean_value_of(records),
        classification => {
            let label = positive_label.ok_or_else(|| Error::MissingPositiveLabel {
                metric: classification.as_str().into(),
                kind: classification.as_str().into(),
            })?;
            let counts = confusion_from_slice(records, label)?;
            Ok(classification_metric(&counts, classification)?.value)
        }
    }
}

fn proportion_correct_of(records: &[&EvaluationRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyRecordSet);
    }
    let mut correct: u64 = 0;
    for record in records {
        match &record.outcome {
            Outcome::Correct(true) => correct += 1,
            Outcome::Correct(false) => {}
            other => {
                return Err(Error::WrongOutcomeKind {
                    operation: "proportion_correct".into(),
                    expected: OutcomeKind::Correctness.as_str().into(),
                    found: other.kind().as_str().into(),
                })
            }
        }
    }
    Ok(correct as f64 / records.len() as f64)
}

fn mean_value_of(records: &[&EvaluationRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyRecordSet);
    }
    let mut sum = 0.0;
    for record in records {
        match &record.outcome {
            Outcome::Value(v) if v.is_finite() => sum += v,
            Outcome::Value(_) => {
                return Err(Error::NonFiniteValue {
                    id: record.id.clone(),
                })
            }
            other => {
                return Err(Error::WrongOutcomeKind {
                    operation: "mean_value".into(),
                    expected: OutcomeKind::Continuous.as_str().into(),
                    found: other.kind().as_str().into(),
                })
            }
        }
    }
    Ok(sum / records.len() as f64)
}

fn expect_kind(records: &RecordSet, expected: OutcomeKind, operation: &str) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecordSet);
    }
    if records.outcome_kind() != expected {
        return Err(Error::WrongOutcomeKind {
            operation: operation.into(),
            expected: expected.as_str().into(),
            found: records.outcome_kind().as_str().into(),
        });
    }
    Ok(())
}

/// The credit-fraud confusion matrix used as a fixed oracle throughout
/// the test suite.
#[cfg(test)]
pub(crate) fn fraud_counts() -> ConfusionCounts {
    ConfusionCounts::new(8951, 10365, 109_269_288, 82)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::EvaluationRecord;
    use proptest::prelude::*;

    fn classification_set(cells: &[(&str, &str)]) -> RecordSet {
        let records = cells
            .iter()
            .enumerate()
            .map(|(i, (actual, predicted))| {
                EvaluationRecord::classification(format!("r{i}"), *actual, *predicted)
            })
            .collect();
        RecordSet::new(records).unwrap()
    }

    #[test]
    fn confusion_one_record_per_cell() {
        let set = classification_set(&[
            ("fraud", "fraud"),
            ("fraud", "legit"),
            ("legit", "fraud"),
            ("legit", "legit"),
        ]);
        let counts = confusion_from_records(&set, "fraud").unwrap();
        assert_eq!(counts, ConfusionCounts::new(1, 1, 1, 1));
        assert_eq!(counts.total(), set.len() as u64);
    }

    #[test]
    fn confusion_degenerate_single_cell() {
        let set = classification_set(&[("legit", "legit"); 5]);
        let counts = confusion_from_records(&set, "fraud").unwrap();
        assert_eq!(counts, ConfusionCounts::new(0, 0, 5, 0));
    }

    #[test]
    fn confusion_reproduces_fraud_matrix() {
        // 9033 positives of which 82 mispredicted, 109,279,653 negatives of
        // which 10,365 mispredicted.
        let mut records = Vec::new();
        for i in 0..9033u32 {
            let predicted = if i < 82 { "legit" } else { "fraud" };
            records.push(EvaluationRecord::classification(
                format!("p{i}"),
                "fraud",
                predicted,
            ));
        }
        // Down-scaled negatives keep this test fast; the cell mapping is the
        // same. Full-scale totals are covered by the counts constructor.
        for i in 0..10_365u32 {
            records.push(EvaluationRecord::classification(
                format!("n{i}"),
                "legit",
                "fraud",
            ));
        }
        let set = RecordSet::new(records).unwrap();
        let counts = confusion_from_records(&set, "fraud").unwrap();
        assert_eq!(counts.true_positives, 8951);
        assert_eq!(counts.false_negatives, 82);
        assert_eq!(counts.false_positives, 10_365);
        assert_eq!(fraud_counts().actual_positives(), 9033);
    }

    #[test]
    fn confusion_rejects_wrong_outcome_kind() {
        let set = RecordSet::new(vec![EvaluationRecord::correctness("a", true)]).unwrap();
        assert!(matches!(
            confusion_from_records(&set, "x").unwrap_err(),
            Error::WrongOutcomeKind { .. }
        ));
    }

    #[test]
    fn recall_matches_fraud_matrix() {
        let metric = classification_metric(&fraud_counts(), MetricKind::Recall).unwrap();
        assert_eq!(metric.value, 8951.0 / 9033.0);
        assert_eq!(metric.n_basis, 9033);
        assert!((metric.value - 0.9909).abs() < 5e-4);
    }

    #[test]
    fn fpr_matches_fraud_matrix() {
        let metric =
            classification_metric(&fraud_counts(), MetricKind::FalsePositiveRate).unwrap();
        assert_eq!(metric.value, 10_365.0 / 109_279_653.0);
        assert_eq!(metric.n_basis, 109_279_653);
        assert!((metric.value - 9.485e-5).abs() / 9.485e-5 < 1e-3);
    }

    #[test]
    fn precision_matches_fraud_matrix() {
        let metric = classification_metric(&fraud_counts(), MetricKind::Precision).unwrap();
        assert_eq!(metric.value, 8951.0 / 19_316.0);
        assert!((metric.value - 0.4634).abs() < 5e-4);
    }

    #[test]
    fn undefined_metric_names_denominator() {
        let counts = ConfusionCounts::new(0, 3, 4, 0);
        match classification_metric(&counts, MetricKind::Recall).unwrap_err() {
            Error::UndefinedMetric { denominator, .. } => assert_eq!(denominator, "tp+fn"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn f1_zero_rule() {
        // tp = 0 with both denominators nonzero: precision = recall = 0,
        // f1 defined as 0.
        let counts = ConfusionCounts::new(0, 3, 4, 2);
        let metric = classification_metric(&counts, MetricKind::F1).unwrap();
        assert_eq!(metric.value, 0.0);
    }

    #[test]
    fn f1_standard_case() {
        let counts = ConfusionCounts::new(2, 1, 0, 1);
        let metric = classification_metric(&counts, MetricKind::F1).unwrap();
        let p = 2.0 / 3.0;
        let r = 2.0 / 3.0;
        assert!((metric.value - 2.0 * p * r / (p + r)).abs() < 1e-12);
    }

    #[test]
    fn proportion_correct_basic_cases() {
        let mut records: Vec<_> = (0..35)
            .map(|i| EvaluationRecord::correctness(format!("c{i}"), true))
            .collect();
        records.extend((0..7).map(|i| EvaluationRecord::correctness(format!("w{i}"), false)));
        let set = RecordSet::new(records).unwrap();
        let metric = proportion_correct(&set).unwrap();
        assert_eq!(metric.value, 35.0 / 42.0);
        assert_eq!(metric.n_basis, 42);

        let all = RecordSet::new(vec![EvaluationRecord::correctness("a", true)]).unwrap();
        assert_eq!(proportion_correct(&all).unwrap().value, 1.0);
        let none = RecordSet::new(vec![EvaluationRecord::correctness("a", false)]).unwrap();
        assert_eq!(proportion_correct(&none).unwrap().value, 0.0);
    }

    #[test]
    fn mean_value_cases() {
        let single = RecordSet::new(vec![EvaluationRecord::continuous("a", 150.0)]).unwrap();
        assert_eq!(mean_value(&single).unwrap().value, 150.0);

        let pair = RecordSet::new(vec![
            EvaluationRecord::continuous("a", 100.0),
            EvaluationRecord::continuous("b", 200.0),
        ])
        .unwrap();
        assert_eq!(mean_value(&pair).unwrap().value, 150.0);

        let trio = RecordSet::new(vec![
            EvaluationRecord::continuous("a", 120.0),
            EvaluationRecord::continuous("b", 130.0),
            EvaluationRecord::continuous("c", 170.0),
        ])
        .unwrap();
        assert_eq!(mean_value(&trio).unwrap().value, 140.0);
    }

    #[test]
    fn mean_value_rejects_non_finite() {
        let set = RecordSet::new(vec![EvaluationRecord::continuous("a", f64::NAN)]).unwrap();
        assert!(matches!(
            mean_value(&set).unwrap_err(),
            Error::NonFiniteValue { .. }
        ));
    }

    fn cell_strategy() -> impl Strategy<Value = ConfusionCounts> {
        (0u64..200, 0u64..200, 0u64..200, 0u64..200)
            .prop_map(|(tp, fp, tn, fp_n)| ConfusionCounts::new(tp, fp, tn, fp_n))
    }

    proptest! {
        #[test]
        fn proportion_metrics_stay_in_unit_interval(counts in cell_strategy()) {
            for kind in [
                MetricKind::Recall,
                MetricKind::Precision,
                MetricKind::FalsePositiveRate,
                MetricKind::Accuracy,
                MetricKind::F1,
            ] {
                if let Ok(metric) = classification_metric(&counts, kind) {
                    prop_assert!((0.0..=1.0).contains(&metric.value), "{kind} = {}", metric.value);
                }
            }
        }

        #[test]
        fn recall_ignores_negative_cells(tp in 1u64..100, fnc in 0u64..100, fp in 0u64..100, tn in 0u64..100) {
            let a = classification_metric(&ConfusionCounts::new(tp, fp, tn, fnc), MetricKind::Recall).unwrap();
            let b = classification_metric(&ConfusionCounts::new(tp, fp + 7, tn + 13, fnc), MetricKind::Recall).unwrap();
            prop_assert_eq!(a.value, b.value);
        }

        #[test]
        fn fpr_ignores_positive_cells(tp in 0u64..100, fnc in 0u64..100, fp in 0u64..100, tn in 1u64..100) {
            let a = classification_metric(&ConfusionCounts::new(tp, fp, tn, fnc), MetricKind::FalsePositiveRate).unwrap();
            let b = classification_metric(&ConfusionCounts::new(tp + 3, fp, tn, fnc + 5), MetricKind::FalsePositiveRate).unwrap();
            prop_assert_eq!(a.value, b.value);
        }

        /// Counting cells first and iterating records directly must agree.
        #[test]
        fn confusion_path_matches_direct_iteration(cells in proptest::collection::vec((0u8..2, 0u8..2), 1..40)) {
            let labels = ["legit", "fraud"];
            let records: Vec<EvaluationRecord> = cells
                .iter()
                .enumerate()
                .map(|(i, (a, p))| {
                    EvaluationRecord::classification(
                        format!("r{i}"),
                        labels[*a as usize],
                        labels[*p as usize],
                    )
                })
                .collect();
            let set = RecordSet::new(records).unwrap();
            let counts = confusion_from_records(&set, "fraud").unwrap();

            // Independent route: direct record iteration.
            let positives = set.iter().filter(|r| matches!(&r.outcome, Outcome::Label { actual, .. } if actual == "fraud")).count() as u64;
            let hits = set.iter().filter(|r| matches!(&r.outcome, Outcome::Label { actual, predicted } if actual == "fraud" && predicted == "fraud")).count() as u64;
            if positives > 0 {
                let direct = hits as f64 / positives as f64;
                let via_counts = classification_metric(&counts, MetricKind::Recall).unwrap().value;
                prop_assert_eq!(direct, via_counts);
            }
        }

        #[test]
        fn metric_values_are_permutation_invariant(mut cells in proptest::collection::vec((0u8..2, 0u8..2), 2..30)) {
            let labels = ["legit", "fraud"];
            let build = |cells: &[(u8, u8)]| {
                let records: Vec<EvaluationRecord> = cells
                    .iter()
                    .enumerate()
                    .map(|(i, (a, p))| EvaluationRecord::classification(format!("r{i}"), labels[*a as usize], labels[*p as usize]))
                    .collect();
                RecordSet::new(records).unwrap()
            };
            let forward = confusion_from_records(&build(&cells), "fraud").unwrap();
            cells.reverse();
            let reversed = confusion_from_records(&build(&cells), "fraud").unwrap();
            prop_assert_eq!(forward, reversed);
        }
    }
}
