//! Error type shared by every module of the crate.
//!
//! Parse errors always carry a location (a line number for CSV/JSONL
//! sources, a JSON path for configuration documents) so a failing CI run
//! points at the offending input directly.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // ---- record ingestion ----
    #[error("line {line}: more than one outcome field present ({fields}); a record carries exactly one of `correct`, `actual`+`predicted`, or `value`")]
    AmbiguousOutcome { line: usize, fields: String },

    #[error("line {line}: no complete outcome found ({detail}); expected `correct`, `actual`+`predicted`, or `value`")]
    MissingOutcome { line: usize, detail: String },

    #[error("line {line}: duplicate record id `{id}`")]
    DuplicateId { line: usize, id: String },

    #[error("line {line}: strata keys [{found}] do not match [{expected}] seen earlier in the same source")]
    InconsistentStrataKeys {
        line: usize,
        expected: String,
        found: String,
    },

    #[error("line {line}: {message}")]
    MalformedRow { line: usize, message: String },

    #[error("record {index}: outcome variant differs from the record set's outcome kind")]
    MixedOutcomes { index: usize },

    // ---- JSON documents (confusion counts, evaluation spec) ----
    #[error("{path}: {message}")]
    MalformedInput { path: String, message: String },

    #[error("{path}: missing field `{field}`")]
    MissingField { path: String, field: String },

    #[error("{path}: count `{field}` is negative ({value})")]
    NegativeCount {
        path: String,
        field: String,
        value: i64,
    },

    #[error("{path}: all four confusion counts are zero")]
    AllZero { path: String },

    #[error("metric `{metric}`: neither lsl nor usl given; at least one specification limit is required")]
    NoLimits { metric: String },

    #[error("metric `{metric}`: lsl {lsl} must be strictly below usl {usl}")]
    InvertedLimits { metric: String, lsl: f64, usl: f64 },

    #[error("{path}: unknown metric kind `{kind}`")]
    UnknownKind { path: String, kind: String },

    #[error("metric `{metric}`: kind `{kind}` requires a positive_label")]
    MissingPositiveLabel { metric: String, kind: String },

    #[error("metric `{metric}`: {bound} {value} is outside [0, 1], which proportion-valued metrics require")]
    LimitOutOfRange {
        metric: String,
        bound: String,
        value: f64,
    },

    #[error("duplicate metric name `{name}`")]
    DuplicateMetricName { name: String },

    #[error("resamples must be at least 100, got {value}")]
    TooFewResamples { value: u64 },

    #[error("confidence level must lie strictly between 0 and 1, got {value}")]
    InvalidConfidenceLevel { value: f64 },

    // ---- metrics ----
    #[error("operation `{operation}` needs {expected} records, got {found}")]
    WrongOutcomeKind {
        operation: String,
        expected: String,
        found: String,
    },

    #[error("metric `{metric}` is undefined: denominator {denominator} is zero")]
    UndefinedMetric {
        metric: String,
        denominator: String,
    },

    #[error("record set is empty; statistical operations need at least one record")]
    EmptyRecordSet,

    #[error("record `{id}` has a non-finite value")]
    NonFiniteValue { id: String },

    // ---- sampling ----
    #[error("stratum key `{key}` is not present in the records' strata")]
    UnknownStratumKey { key: String },

    #[error("stratum proportions sum to {sum}, not 1")]
    ProportionsDoNotSum { sum: f64 },

    #[error("proportions entry `{label}` matches no stratum in the population")]
    UnknownStratumLabel { label: String },

    #[error("no proportion given for stratum `{label}`")]
    MissingStratumProportion { label: String },

    #[error("stratum `{label}`: allocation {allocated} exceeds the {available} available records")]
    InfeasibleAllocation {
        label: String,
        allocated: usize,
        available: usize,
    },

    #[error("sampling plan has no allocation for stratum `{label}`")]
    IncompletePlan { label: String },

    // ---- bootstrap ----
    #[error("invalid bootstrap configuration: {message}")]
    InvalidBootstrapConfig { message: String },

    #[error("resample {resample}: statistic undefined ({detail}); resamples are never skipped — evaluate from aggregate counts instead, or stratify the records so every resample keeps a nonzero denominator")]
    UndefinedOnResample { resample: usize, detail: String },

    #[error("bootstrap distribution is empty")]
    EmptyDistribution,

    // ---- capability ----
    #[error("confidence bound ordering violated: {message}")]
    InvalidOrder { message: String },

    #[error("no capability index present; at least one of cpl/cpu is required")]
    NoIndices,

    // ---- report ----
    #[error("no result supplied for metric `{metric}`")]
    MissingMetricResult { metric: String },

    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
