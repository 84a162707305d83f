//! Dataset loading and the bundled toy generators.
//!
//! Everything downstream works on a [`Dataset`]: a named
//! [`MixedIntegerSequence`] of code rows, optionally paired with a numeric
//! label per row (the last CSV column for benchmark data). Loaders normalize
//! raw files into that shape — text lines become padded symbol-code rows,
//! CSV columns with fractional values are quantized onto an integer code
//! range — and the generators build the small deterministic corpora used for
//! smoke experiments.

use std::fs;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::{encode_text_row, MixedIntegerSequence};
use crate::error::{HtmError, Result};

/// Code range used when a fractional CSV column is quantized. Codes start at
/// 1 so code 0 keeps its pad/wildcard meaning.
pub const QUANTIZATION_LEVELS: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// Rows of numbers; predictions render as space-joined values.
    Numeric,
    /// Rows of symbol codes; predictions render as text.
    Text,
}

/// A named, normalized dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub kind: DataKind,
    pub records: MixedIntegerSequence,
    /// Per-row labels (benchmark data keeps its last column here).
    pub labels: Option<Vec<f64>>,
}

impl Dataset {
    fn new(
        name: impl Into<String>,
        kind: DataKind,
        records: MixedIntegerSequence,
        labels: Option<Vec<f64>>,
    ) -> Result<Dataset> {
        if let Some(labels) = &labels {
            if labels.len() != records.len() {
                return Err(HtmError::Data(format!(
                    "{} labels for {} records",
                    labels.len(),
                    records.len()
                )));
            }
        }
        Ok(Dataset {
            name: name.into(),
            kind,
            records,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    /// Rows as learned by the pipeline: the record codes, with the label
    /// (rounded to a code) appended for labeled data.
    pub fn unit_rows(&self) -> Vec<Vec<i64>> {
        match &self.labels {
            None => self.records.rows().to_vec(),
            Some(labels) => self
                .records
                .rows()
                .iter()
                .zip(labels)
                .map(|(row, label)| {
                    let mut unit = row.clone();
                    unit.push(label.round() as i64);
                    unit
                })
                .collect(),
        }
    }
}

/// Quantizes one column of raw values to integer codes. Columns that are
/// already integral pass through unchanged; anything fractional is min-max
/// scaled onto `1..=QUANTIZATION_LEVELS`.
fn column_codes(values: &[f64]) -> Vec<i64> {
    let integral = values
        .iter()
        .all(|v| v.fract() == 0.0 && v.abs() < 2f64.powi(53));
    if integral {
        return values.iter().map(|&v| v as i64).collect();
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return vec![1; values.len()];
    }
    values
        .iter()
        .map(|&v| 1 + ((v - min) / (max - min) * (QUANTIZATION_LEVELS - 1) as f64).round() as i64)
        .collect()
}

fn parse_csv(content: &str, name: &str, has_labels: bool, skip_header: bool) -> Result<Dataset> {
    let mut raw: Vec<Vec<f64>> = Vec::new();
    let mut arity = None;
    for (line_no, line) in content.lines().enumerate() {
        if line.trim().is_empty() || (skip_header && line_no == 0) {
            continue;
        }
        let row_no = raw.len() + 1;
        let mut row = Vec::new();
        for (col, cell) in line.split(',').enumerate() {
            let cell = cell.trim();
            let value: f64 = cell.parse().map_err(|_| {
                HtmError::Data(format!(
                    "row {row_no}, column {}: invalid number `{cell}`",
                    col + 1
                ))
            })?;
            if !value.is_finite() {
                return Err(HtmError::Data(format!(
                    "row {row_no}, column {}: non-finite value",
                    col + 1
                )));
            }
            row.push(value);
        }
        match arity {
            None => arity = Some(row.len()),
            Some(a) if a != row.len() => {
                return Err(HtmError::Data(format!(
                    "row {row_no} has {} columns, expected {a}",
                    row.len()
                )));
            }
            _ => {}
        }
        raw.push(row);
    }
    let arity = arity.ok_or_else(|| HtmError::Data(format!("{name}: no data rows")))?;
    if has_labels && arity < 2 {
        return Err(HtmError::Data(format!(
            "{name}: labeled data needs at least 2 columns, found {arity}"
        )));
    }

    let feature_cols = if has_labels { arity - 1 } else { arity };
    let labels = has_labels.then(|| raw.iter().map(|r| r[feature_cols]).collect::<Vec<f64>>());

    // Quantize column by column so each keeps its own scale.
    let mut codes = vec![vec![0i64; feature_cols]; raw.len()];
    for col in 0..feature_cols {
        let column: Vec<f64> = raw.iter().map(|r| r[col]).collect();
        for (row, code) in codes.iter_mut().zip(column_codes(&column)) {
            row[col] = code;
        }
    }
    Dataset::new(
        name,
        DataKind::Numeric,
        MixedIntegerSequence::new(codes)?,
        labels,
    )
}

/// Loads a comma-separated numeric file. With `has_labels` the last column
/// is split off as the label vector; with `skip_header` the first line is
/// dropped. Cell errors report 1-based row and column coordinates.
pub fn load_csv(path: &Path, has_labels: bool, skip_header: bool) -> Result<Dataset> {
    let content = fs::read_to_string(path)
        .map_err(|e| HtmError::Data(format!("cannot read {}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("csv")
        .to_string();
    parse_csv(&content, &name, has_labels, skip_header)
}

fn parse_text(content: &str, name: &str) -> Result<Dataset> {
    let lines: Vec<&str> = content
        .lines()
        .filter(|l| !l.trim_end().is_empty())
        .collect();
    if lines.is_empty() {
        return Err(HtmError::Data(format!("{name}: no text lines")));
    }
    let width = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let rows = lines
        .iter()
        .map(|line| encode_text_row(line.trim_end(), width))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(name, DataKind::Text, MixedIntegerSequence::new(rows)?, None)
}

/// Loads a file of newline-separated strings as a text dataset: every line
/// becomes one symbol-code row, right-padded to the longest line. Blank
/// lines are skipped.
pub fn load_text(path: &Path) -> Result<Dataset> {
    let content = fs::read_to_string(path)
        .map_err(|e| HtmError::Data(format!("cannot read {}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("text")
        .to_string();
    parse_text(&content, &name)
}

/// Multiplication-table corpus: rows `(a, b, a*b)` for `a, b` in
/// `[2, limit]`, followed by one query exemplar whose product is masked to 0
/// (the `(2, 3)` row, or `(2, 2)` when the table is that small). The mask is
/// what the predictor is later asked to fill in.
pub fn generate_times_table(limit: i64) -> Result<Dataset> {
    if limit < 2 {
        return Err(HtmError::config("times_limit", "must be at least 2"));
    }
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for a in 2..=limit {
        for b in 2..=limit {
            rows.push(vec![a, b, a * b]);
        }
    }
    let (qa, qb) = if limit >= 3 { (2, 3) } else { (2, 2) };
    rows.push(vec![qa, qb, 0]);
    Dataset::new(
        "times",
        DataKind::Numeric,
        MixedIntegerSequence::new(rows)?,
        None,
    )
}

/// Periodic binary label series: records cycle through the phases
/// `1..=period` and the label spikes to 1 on the last phase of every cycle,
/// staying 0 elsewhere. Phase codes start at 1 so no record collides with
/// the pad code.
pub fn generate_periodic_binary(period: usize, cycles: usize) -> Result<Dataset> {
    if period < 2 {
        return Err(HtmError::config("periodic_period", "must be at least 2"));
    }
    if cycles < 1 {
        return Err(HtmError::config("periodic_cycles", "must be at least 1"));
    }
    let mut rows = Vec::with_capacity(period * cycles);
    let mut labels = Vec::with_capacity(period * cycles);
    for _ in 0..cycles {
        for phase in 0..period {
            rows.push(vec![phase as i64 + 1]);
            labels.push(if phase == period - 1 { 1.0 } else { 0.0 });
        }
    }
    Dataset::new(
        "periodic",
        DataKind::Numeric,
        MixedIntegerSequence::new(rows)?,
        Some(labels),
    )
}

/// Deterministic two-class benchmark stand-in: each class has its own
/// per-feature code centers and rows alternate classes, with seeded jitter.
/// Codes stay in `1..=QUANTIZATION_LEVELS` and the label is the class.
pub fn generate_classification_surrogate(
    name: &str,
    rows: usize,
    features: usize,
    seed: u64,
) -> Result<Dataset> {
    if rows == 0 || features == 0 {
        return Err(HtmError::config(
            "surrogate",
            "rows and features must be at least 1",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for i in 0..rows {
        let class = (i % 2) as i64;
        let mut row = Vec::with_capacity(features);
        for j in 0..features {
            let center = if class == 0 {
                16 + (j as i64 * 3) % 20
            } else {
                40 + (j as i64 * 5) % 20
            };
            let jitter = rng.random_range(-6..=6i64);
            row.push((center + jitter).clamp(1, QUANTIZATION_LEVELS));
        }
        records.push(row);
        labels.push(class as f64);
    }
    Dataset::new(
        name,
        DataKind::Numeric,
        MixedIntegerSequence::new(records)?,
        Some(labels),
    )
}

/// Heart-disease-shaped surrogate (270 rows x 13 features, binary label).
pub fn heart_surrogate() -> Dataset {
    generate_classification_surrogate("heart_surrogate", 270, 13, 0x4845_4152)
        .expect("fixed parameters are valid")
}

/// Credit-screening-shaped surrogate (690 rows x 14 features, binary label).
pub fn australian_surrogate() -> Dataset {
    generate_classification_surrogate("australian_surrogate", 690, 14, 0x4155_5354)
        .expect("fixed parameters are valid")
}

const WORD3A: &str = include_str!("../assets/word3a.txt");
const WORD3B: &str = include_str!("../assets/word3b.txt");
const WORD3C: &str = include_str!("../assets/word3c.txt");

/// Raw text of a bundled word-list fixture, if the name matches one.
pub fn word_fixture_text(name: &str) -> Option<&'static str> {
    match name {
        "word3a" => Some(WORD3A),
        "word3b" => Some(WORD3B),
        "word3c" => Some(WORD3C),
        _ => None,
    }
}

/// Loads one of the bundled word-list fixtures (`word3a`, `word3b`,
/// `word3c`) as a text dataset.
pub fn word_fixture(name: &str) -> Result<Dataset> {
    let content = word_fixture_text(name)
        .ok_or_else(|| HtmError::Data(format!("unknown word fixture `{name}`")))?;
    parse_text(content, name)
}
