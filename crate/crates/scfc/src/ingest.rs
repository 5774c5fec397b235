//! Reading and writing evaluation records, and parsing aggregate
//! confusion counts.
//!
//! Record files use reserved column/key names: `id`, plus exactly one
//! outcome group out of `correct`, `actual`+`predicted`, or `value`.
//! Every other column is a stratum attribute. The outcome kind is a pure
//! function of the header (CSV) or key set (JSONL), never of row content.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::metrics::ConfusionCounts;
use crate::record::{join_keys, EvaluationRecord, Outcome, OutcomeKind, RecordSet};

/// Wire format for record files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Csv,
    Jsonl,
}

impl RecordFormat {
    /// Infer the format from a file extension (`.csv`, `.jsonl`, `.ndjson`).
    pub fn from_path(path: &Path) -> Option<RecordFormat> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Some(RecordFormat::Csv),
            Some(ext)
                if ext.eq_ignore_ascii_case("jsonl") || ext.eq_ignore_ascii_case("ndjson") =>
            {
                Some(RecordFormat::Jsonl)
            }
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RecordFormat::Csv => "csv",
            RecordFormat::Jsonl => "jsonl",
        }
    }
}

const RESERVED: [&str; 5] = ["id", "correct", "actual", "predicted", "value"];

/// Parse evaluation records from a stream in the given format.
pub fn parse_records<R: Read>(source: R, format: RecordFormat) -> Result<RecordSet> {
    match format {
        RecordFormat::Csv => parse_csv(source),
        RecordFormat::Jsonl => parse_jsonl(source),
    }
}

/// Parse a record file, inferring the format from its extension.
pub fn parse_records_path(path: &Path) -> Result<RecordSet> {
    let format = RecordFormat::from_path(path).ok_or_else(|| Error::MalformedInput {
        path: path.display().to_string(),
        message: "cannot infer record format from extension; use .csv or .jsonl".into(),
    })?;
    let file = open(path)?;
    parse_records(BufReader::new(file), format)
}

/// Write records back out in the given format. The output round-trips:
/// parsing it yields a record set equal to `set`.
pub fn render_records<W: Write>(set: &RecordSet, format: RecordFormat, writer: W) -> Result<()> {
    match format {
        RecordFormat::Csv => render_csv(set, writer),
        RecordFormat::Jsonl => render_jsonl(set, writer),
    }
}

/// Parse an aggregate confusion matrix from a JSON object with the four
/// integer fields `tp`, `fp`, `tn`, `fn`. `origin` labels the source in
/// error messages (a file path, usually).
pub fn parse_counts(source: &str, origin: &str) -> Result<ConfusionCounts> {
    let value: Value = serde_json::from_str(source).map_err(|e| Error::MalformedInput {
        path: origin.into(),
        message: e.to_string(),
    })?;
    let object = value.as_object().ok_or_else(|| Error::MalformedInput {
        path: origin.into(),
        message: "expected a JSON object".into(),
    })?;

    const FIELDS: [&str; 4] = ["tp", "fp", "tn", "fn"];
    for key in object.keys() {
        if !FIELDS.contains(&key.as_str()) {
            return Err(Error::MalformedInput {
                path: origin.into(),
                message: format!("unknown field `{key}`"),
            });
        }
    }

    let mut cells = [0u64; 4];
    for (slot, field) in cells.iter_mut().zip(FIELDS) {
        let raw = object.get(field).ok_or_else(|| Error::MissingField {
            path: origin.into(),
            field: field.into(),
        })?;
        *slot = match raw.as_u64() {
            Some(n) => n,
            None => match raw.as_i64() {
                Some(negative) => {
                    return Err(Error::NegativeCount {
                        path: origin.into(),
                        field: field.into(),
                        value: negative,
                    })
                }
                None => {
                    return Err(Error::MalformedInput {
                        path: format!("{origin}.{field}"),
                        message: "must be a nonnegative integer".into(),
                    })
                }
            },
        };
    }

    let counts = ConfusionCounts::new(cells[0], cells[1], cells[2], cells[3]);
    if counts.total() == 0 {
        return Err(Error::AllZero {
            path: origin.into(),
        });
    }
    Ok(counts)
}

/// Parse a confusion-counts JSON file.
pub fn parse_counts_path(path: &Path) -> Result<ConfusionCounts> {
    let text = read_to_string(path)?;
    parse_counts(&text, &path.display().to_string())
}

pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

/// Decide the outcome kind from the reserved keys present in a header or
/// JSONL object. `line` locates the header/object in error messages.
fn infer_outcome_kind(keys: &[&str], line: usize) -> Result<OutcomeKind> {
    let has = |name: &str| keys.contains(&name);
    let present: Vec<&str> = ["correct", "actual", "predicted", "value"]
        .into_iter()
        .filter(|k| has(k))
        .collect();

    let has_correct = has("correct");
    let has_label = has("actual") || has("predicted");
    let has_value = has("value");
    let groups = usize::from(has_correct) + usize::from(has_label) + usize::from(has_value);

    if groups > 1 {
        return Err(Error::AmbiguousOutcome {
            line,
            fields: present.join(", "),
        });
    }
    if has_correct {
        return Ok(OutcomeKind::Correctness);
    }
    if has_value {
        return Ok(OutcomeKind::Continuous);
    }
    if has_label {
        if has("actual") && has("predicted") {
            return Ok(OutcomeKind::Classification);
        }
        let (found, missing) = if has("actual") {
            ("actual", "predicted")
        } else {
            ("predicted", "actual")
        };
        return Err(Error::MissingOutcome {
            line,
            detail: format!("`{found}` present without `{missing}`"),
        });
    }
    Err(Error::MissingOutcome {
        line,
        detail: "no outcome field present".into(),
    })
}

fn parse_bool(text: &str) -> Option<bool> {
    if text.eq_ignore_ascii_case("true") || text == "1" {
        Some(true)
    } else if text.eq_ignore_ascii_case("false") || text == "0" {
        Some(false)
    } else {
        None
    }
}

fn malformed(line: usize, message: impl Into<String>) -> Error {
    Error::MalformedRow {
        line,
        message: message.into(),
    }
}

fn from_csv_error(error: csv::Error, fallback_line: usize) -> Error {
    let line = error
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    match error.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => malformed(
            line,
            format!("expected {expected_len} fields, found {len}"),
        ),
        csv::ErrorKind::Utf8 { .. } => malformed(line, "invalid UTF-8"),
        other => malformed(line, format!("{other:?}")),
    }
}

fn parse_csv<R: Read>(source: R) -> Result<RecordSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| from_csv_error(e, 1))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let mut seen_headers = BTreeSet::new();
    for header in &headers {
        if !seen_headers.insert(header.as_str()) {
            return Err(malformed(1, format!("duplicate column `{header}`")));
        }
    }

    let header_refs: Vec<&str> = headers.iter().map(|h| h.as_str()).collect();
    let kind = infer_outcome_kind(&header_refs, 1)?;
    let column = |name: &str| headers.iter().position(|h| h == name);
    let id_column = column("id");
    let strata_columns: Vec<(usize, &str)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !RESERVED.contains(&h.as_str()))
        .map(|(i, h)| (i, h.as_str()))
        .collect();

    let mut records = Vec::new();
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();
    for (row_index, row) in reader.records().enumerate() {
        let fallback_line = row_index + 2;
        let row = row.map_err(|e| from_csv_error(e, fallback_line))?;
        let line = row
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(fallback_line);
        let cell = |index: usize| row.get(index).unwrap_or("").trim();
        let required = |name: &str| -> Result<&str> {
            let index = column(name).expect("outcome inference guarantees the column");
            let text = cell(index);
            if text.is_empty() {
                Err(malformed(line, format!("empty `{name}`")))
            } else {
                Ok(text)
            }
        };

        let id = match id_column {
            Some(index) => {
                let text = cell(index);
                if text.is_empty() {
                    return Err(malformed(line, "empty `id`"));
                }
                text.to_string()
            }
            None => (row_index + 1).to_string(),
        };
        if !seen_ids.insert(id.clone()) {
            return Err(Error::DuplicateId { line, id });
        }

        let outcome = match kind {
            OutcomeKind::Correctness => {
                let text = required("correct")?;
                let flag = parse_bool(text).ok_or_else(|| {
                    malformed(
                        line,
                        format!("cannot parse `{text}` as a boolean (expected true/false/1/0)"),
                    )
                })?;
                Outcome::Correct(flag)
            }
            OutcomeKind::Classification => Outcome::Label {
                actual: required("actual")?.to_string(),
                predicted: required("predicted")?.to_string(),
            },
            OutcomeKind::Continuous => {
                let text = required("value")?;
                let value: f64 = text
                    .parse()
                    .map_err(|_| malformed(line, format!("cannot parse `{text}` as a number")))?;
                Outcome::Value(value)
            }
        };

        let mut strata = BTreeMap::new();
        for (index, name) in &strata_columns {
            let text = cell(*index);
            if text.is_empty() {
                return Err(malformed(line, format!("empty value for stratum `{name}`")));
            }
            strata.insert((*name).to_string(), text.to_string());
        }

        records.push(EvaluationRecord {
            id,
            strata,
            outcome,
        });
    }

    RecordSet::new(records)
}

fn json_text(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn json_bool(value: &Value) -> Option<bool> {
    match value {
        Value::Bool(b) => Some(*b),
        Value::Number(n) => match n.as_i64() {
            Some(1) => Some(true),
            Some(0) => Some(false),
            _ => None,
        },
        Value::String(s) => parse_bool(s.trim()),
        _ => None,
    }
}

fn json_number(value: &Value) -> Option<f64> {
    match value {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn parse_jsonl<R: Read>(source: R) -> Result<RecordSet> {
    let reader = BufReader::new(source);
    let mut records: Vec<EvaluationRecord> = Vec::new();
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();
    let mut shape: Option<(OutcomeKind, bool, BTreeSet<String>)> = None;

    for (index, line_result) in reader.lines().enumerate() {
        let line = index + 1;
        let text = line_result?;
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }

        let value: Value = serde_json::from_str(trimmed)
            .map_err(|e| malformed(line, format!("invalid JSON: {e}")))?;
        let object = value
            .as_object()
            .ok_or_else(|| malformed(line, "line is not a JSON object"))?;

        let keys: Vec<&str> = object.keys().map(|k| k.as_str()).collect();
        let kind = infer_outcome_kind(&keys, line)?;
        let has_id = object.contains_key("id");
        let strata_keys: BTreeSet<String> = keys
            .iter()
            .filter(|k| !RESERVED.contains(k))
            .map(|k| (*k).to_string())
            .collect();

        match &shape {
            None => shape = Some((kind, has_id, strata_keys.clone())),
            Some((first_kind, first_has_id, first_strata)) => {
                if kind != *first_kind {
                    return Err(Error::MixedOutcomes { index: line });
                }
                if has_id != *first_has_id {
                    return Err(malformed(line, "inconsistent presence of `id` across lines"));
                }
                if strata_keys != *first_strata {
                    return Err(Error::InconsistentStrataKeys {
                        line,
                        expected: join_keys(first_strata),
                        found: join_keys(&strata_keys),
                    });
                }
            }
        }

        let id = if has_id {
            let raw = object.get("id").expect("checked via has_id");
            let text = json_text(raw)
                .ok_or_else(|| malformed(line, "`id` must be a string or number"))?;
            if text.is_empty() {
                return Err(malformed(line, "empty `id`"));
            }
            text
        } else {
            (records.len() + 1).to_string()
        };
        if !seen_ids.insert(id.clone()) {
            return Err(Error::DuplicateId { line, id });
        }

        let field = |name: &str| object.get(name).expect("outcome inference guarantees the key");
        let outcome = match kind {
            OutcomeKind::Correctness => {
                let raw = field("correct");
                let flag = json_bool(raw).ok_or_else(|| {
                    malformed(
                        line,
                        format!("cannot interpret `correct` value {raw} as a boolean"),
                    )
                })?;
                Outcome::Correct(flag)
            }
            OutcomeKind::Classification => {
                let label = |name: &str| -> Result<String> {
                    let text = json_text(field(name))
                        .ok_or_else(|| malformed(line, format!("`{name}` must be a string")))?;
                    if text.is_empty() {
                        return Err(malformed(line, format!("empty `{name}`")));
                    }
                    Ok(text)
                };
                Outcome::Label {
                    actual: label("actual")?,
                    predicted: label("predicted")?,
                }
            }
            OutcomeKind::Continuous => {
                let raw = field("value");
                let number = json_number(raw).ok_or_else(|| {
                    malformed(line, format!("cannot interpret `value` {raw} as a number"))
                })?;
                Outcome::Value(number)
            }
        };

        let mut strata = BTreeMap::new();
        for key in &strata_keys {
            let raw = object.get(key).expect("key comes from this object");
            let text = json_text(raw)
                .ok_or_else(|| malformed(line, format!("stratum `{key}` must be a string or number")))?;
            if text.is_empty() {
                return Err(malformed(line, format!("empty value for stratum `{key}`")));
            }
            strata.insert(key.clone(), text);
        }

        records.push(EvaluationRecord {
            id,
            strata,
            outcome,
        });
    }

    RecordSet::new(records)
}

fn outcome_columns(kind: OutcomeKind) -> &'static [&'static str] {
    match kind {
        OutcomeKind::Correctness => &["correct"],
        OutcomeKind::Classification => &["actual", "predicted"],
        OutcomeKind::Continuous => &["value"],
    }
}

fn render_csv<W: Write>(set: &RecordSet, writer: W) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);

    let mut header: Vec<&str> = vec!["id"];
    header.extend(set.strata_keys().iter().map(|k| k.as_str()));
    header.extend(outcome_columns(set.outcome_kind()));
    csv_writer
        .write_record(&header)
        .map_err(|e| from_csv_error(e, 1))?;

    for (index, record) in set.iter().enumerate() {
        let mut row: Vec<String> = vec![record.id.clone()];
        for key in set.strata_keys() {
            row.push(record.strata[key].clone());
        }
        match &record.outcome {
            Outcome::Correct(flag) => row.push(flag.to_string()),
            Outcome::Label { actual, predicted } => {
                row.push(actual.clone());
                row.push(predicted.clone());
            }
            Outcome::Value(value) => {
                if !value.is_finite() {
                    return Err(Error::NonFiniteValue {
                        id: record.id.clone(),
                    });
                }
                row.push(value.to_string());
            }
        }
        csv_writer
            .write_record(&row)
            .map_err(|e| from_csv_error(e, index + 2))?;
    }
    csv_writer.flush()?;
    Ok(())
}

fn render_jsonl<W: Write>(set: &RecordSet, mut writer: W) -> Result<()> {
    for record in set.iter() {
        let mut object = serde_json::Map::new();
        object.insert("id".into(), Value::String(record.id.clone()));
        for (key, value) in &record.strata {
            object.insert(key.clone(), Value::String(value.clone()));
        }
        match &record.outcome {
            Outcome::Correct(flag) => {
                object.insert("correct".into(), Value::Bool(*flag));
            }
            Outcome::Label { actual, predicted } => {
                object.insert("actual".into(), Value::String(actual.clone()));
                object.insert("predicted".into(), Value::String(predicted.clone()));
            }
            Outcome::Value(value) => {
                let number =
                    serde_json::Number::from_f64(*value).ok_or_else(|| Error::NonFiniteValue {
                        id: record.id.clone(),
                    })?;
                object.insert("value".into(), Value::Number(number));
            }
        }
        let text = serde_json::to_string(&Value::Object(object))
            .expect("string-keyed maps of finite numbers always serialize");
        writer.write_all(text.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
