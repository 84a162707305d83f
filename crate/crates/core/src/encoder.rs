//! Encoders that bridge raw records and the pooler's bit space.
//!
//! Records are normalized to rows of small integer codes (a
//! [`MixedIntegerSequence`]). A [`RowEncoder`] then turns each row into one
//! concatenated SDR, one slot per column, using either a bucketed scalar
//! encoder (nearby values share bits) or a one-hot identity encoder.
//!
//! Code 0 is reserved as the pad/blank marker throughout the pipeline: text
//! rows are right-padded with it, and downstream prefix matching treats it as
//! a wildcard.

use serde::{Deserialize, Serialize};

use crate::error::{HtmError, Result};
use crate::sdr::Sdr;

/// Reserved pad/blank code.
pub const PAD_CODE: i64 = 0;

/// Printable ASCII range accepted by the text codec.
const SYMBOL_MIN: i64 = 32;
const SYMBOL_MAX: i64 = 126;

/// Rows of integer codes with a uniform arity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedIntegerSequence {
    arity: usize,
    rows: Vec<Vec<i64>>,
}

impl MixedIntegerSequence {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(HtmError::Data("empty record sequence".into()));
        };
        let arity = first.len();
        if arity == 0 {
            return Err(HtmError::Data(
                "records must have at least one column".into(),
            ));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != arity) {
            return Err(HtmError::Data(format!(
                "ragged records: row {} has {} columns, expected {arity}",
                i + 1,
                row.len()
            )));
        }
        Ok(MixedIntegerSequence { arity, rows })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Per-column `(min, max)` over all rows.
    pub fn column_bounds(&self) -> Vec<(i64, i64)> {
        let mut bounds = vec![(i64::MAX, i64::MIN); self.arity];
        for row in &self.rows {
            for (b, &v) in bounds.iter_mut().zip(row) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        bounds
    }
}

/// Bucketed scalar encoder. A value maps to one of `buckets` buckets by
/// linear interpolation over `[min_value, max_value]` (out-of-range values
/// clamp), and lights `active_width` consecutive bits starting at its bucket,
/// so neighbouring values share bits and equal buckets encode identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarEncoderParams {
    pub min_value: f64,
    pub max_value: f64,
    pub buckets: usize,
    pub active_width: usize,
}

impl ScalarEncoderParams {
    pub fn new(
        min_value: f64,
        max_value: f64,
        buckets: usize,
        active_width: usize,
    ) -> Result<Self> {
        let params = ScalarEncoderParams {
            min_value,
            max_value,
            buckets,
            active_width,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.min_value.is_finite() || !self.max_value.is_finite() {
            return Err(HtmError::config("scalar_encoder", "bounds must be finite"));
        }
        if self.min_value >= self.max_value {
            return Err(HtmError::config(
                "scalar_encoder",
                format!(
                    "min_value {} must be below max_value {}",
                    self.min_value, self.max_value
                ),
            ));
        }
        if self.buckets < 2 {
            return Err(HtmError::config("buckets", "need at least 2 buckets"));
        }
        if self.active_width < 1 {
            return Err(HtmError::config("active_width", "must be at least 1"));
        }
        Ok(())
    }

    /// Total bit width of one encoded value.
    pub fn total_width(&self) -> usize {
        self.buckets + self.active_width - 1
    }

    pub fn is_out_of_range(&self, value: f64) -> bool {
        value < self.min_value || value > self.max_value
    }

    /// Bucket index for a value, clamping out-of-range inputs to the edges.
    pub fn bucket(&self, value: f64) -> usize {
        let clamped = value.clamp(self.min_value, self.max_value);
        let t = (clamped - self.min_value) / (self.max_value - self.min_value);
        (t * (self.buckets - 1) as f64).round() as usize
    }

    /// Representative value of a bucket (inverse of [`Self::bucket`] up to
    /// quantization).
    pub fn bucket_value(&self, bucket: usize) -> f64 {
        self.min_value
            + bucket as f64 * (self.max_value - self.min_value) / (self.buckets - 1) as f64
    }

    pub fn encode(&self, value: f64) -> Sdr {
        let start = self.bucket(value);
        let bits: Vec<usize> = (start..start + self.active_width).collect();
        // Indices are in range by construction: start <= buckets - 1.
        Sdr::new(self.total_width(), bits).expect("scalar encoding stays in range")
    }
}

/// Integer code for one printable character.
pub fn symbol_code(c: char) -> Result<i64> {
    let code = c as i64;
    if !(SYMBOL_MIN..=SYMBOL_MAX).contains(&code) {
        return Err(HtmError::Data(format!("unsupported character {c:?}")));
    }
    Ok(code)
}

/// Character for one integer code. The pad code decodes to a blank.
pub fn code_symbol(code: i64) -> Result<char> {
    if code == PAD_CODE {
        return Ok(' ');
    }
    if !(SYMBOL_MIN..=SYMBOL_MAX).contains(&code) {
        return Err(HtmError::Data(format!("unsupported symbol code {code}")));
    }
    Ok(code as u8 as char)
}

/// Encodes one line of text as integer codes, right-padded with [`PAD_CODE`]
/// to `pad_to` columns. Errors (with the character position) if the line is
/// longer than `pad_to` or contains an unsupported character.
pub fn encode_text_row(line: &str, pad_to: usize) -> Result<Vec<i64>> {
    let mut codes = Vec::with_capacity(pad_to);
    for (i, c) in line.chars().enumerate() {
        if i >= pad_to {
            return Err(HtmError::Data(format!(
                "line {line:?} longer than the row width {pad_to}"
            )));
        }
        codes.push(symbol_code(c).map_err(|_| {
            HtmError::Data(format!("unsupported character {c:?} at position {}", i + 1))
        })?);
    }
    codes.resize(pad_to, PAD_CODE);
    Ok(codes)
}

/// Decodes a code row back to text. Interior pads render as spaces (recalled
/// rows can have gaps); trailing pads are trimmed.
pub fn decode_row(codes: &[i64]) -> Result<String> {
    let mut out = String::with_capacity(codes.len());
    for &code in codes {
        out.push(code_symbol(code)?);
    }
    Ok(out.trim_end().to_string())
}

/// How row columns are mapped to bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderMode {
    /// Bucketed scalar slots; nearby values share bits.
    Scalar,
    /// One-hot slots; every distinct code gets its own bit.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
enum SlotEncoder {
    Scalar(ScalarEncoderParams),
    Identity { alphabet: usize },
}

impl SlotEncoder {
    fn width(&self) -> usize {
        match self {
            SlotEncoder::Scalar(params) => params.total_width(),
            SlotEncoder::Identity { alphabet } => *alphabet,
        }
    }
}

/// Per-column encoder for integer rows. Each column owns a contiguous slot of
/// bits; a row encodes to the concatenation of its column encodings.
#[derive(Debug, Clone, PartialEq)]
pub struct RowEncoder {
    slots: Vec<SlotEncoder>,
    offsets: Vec<usize>,
    width: usize,
}

impl RowEncoder {
    /// Scalar encoder with per-column value bounds (typically the observed
    /// column minima and maxima). Constant columns are widened by one so the
    /// value range stays non-degenerate.
    pub fn scalar(
        bounds: &[(i64, i64)],
        buckets: usize,
        active_width: usize,
    ) -> Result<RowEncoder> {
        let slots = bounds
            .iter()
            .map(|&(lo, hi)| {
                let hi = if lo == hi { hi + 1 } else { hi };
                Ok(SlotEncoder::Scalar(ScalarEncoderParams::new(
                    lo as f64,
                    hi as f64,
                    buckets,
                    active_width,
                )?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_slots(slots))
    }

    /// Scalar encoder with one shared parameter set for every column (used
    /// for text, where all columns range over the same symbol codes).
    pub fn scalar_uniform(arity: usize, params: ScalarEncoderParams) -> Result<RowEncoder> {
        params.validate()?;
        if arity == 0 {
            return Err(HtmError::Data(
                "row encoder needs at least one column".into(),
            ));
        }
        Ok(Self::from_slots(vec![SlotEncoder::Scalar(params); arity]))
    }

    /// One-hot encoder: column `j` gets `max_j + 1` bits and code `c` lights
    /// bit `c`. Requires non-negative codes.
    pub fn identity(bounds: &[(i64, i64)]) -> Result<RowEncoder> {
        let slots = bounds
            .iter()
            .map(|&(lo, hi)| {
                if lo < 0 {
                    return Err(HtmError::config(
                        "encoder",
                        format!("identity encoding needs non-negative codes, saw {lo}"),
                    ));
                }
                Ok(SlotEncoder::Identity {
                    alphabet: (hi as usize + 1).max(2),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_slots(slots))
    }

    fn from_slots(slots: Vec<SlotEncoder>) -> RowEncoder {
        let mut offsets = Vec::with_capacity(slots.len());
        let mut width = 0;
        for slot in &slots {
            offsets.push(width);
            width += slot.width();
        }
        RowEncoder {
            slots,
            offsets,
            width,
        }
    }

    /// Total input width for the pooler.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    /// Encodes a row to one concatenated SDR. Out-of-range codes clamp to the
    /// slot edges (count them with [`Self::clamp_count`]).
    pub fn encode_row(&self, row: &[i64]) -> Result<Sdr> {
        if row.len() != self.slots.len() {
            return Err(HtmError::Data(format!(
                "row has {} columns, encoder expects {}",
                row.len(),
                self.slots.len()
            )));
        }
        let mut bits = Vec::new();
        for ((slot, &offset), &code) in self.slots.iter().zip(&self.offsets).zip(row) {
            match slot {
                SlotEncoder::Scalar(params) => {
                    let start = offset + params.bucket(code as f64);
                    bits.extend(start..start + params.active_width);
                }
                SlotEncoder::Identity { alphabet } => {
                    let idx = code.clamp(0, *alphabet as i64 - 1) as usize;
                    bits.push(offset + idx);
                }
            }
        }
        Sdr::new(self.width, bits)
    }

    /// Number of columns whose code falls outside the slot's range and would
    /// be clamped by [`Self::encode_row`].
    pub fn clamp_count(&self, row: &[i64]) -> usize {
        self.slots
            .iter()
            .zip(row)
            .filter(|(slot, &code)| match slot {
                SlotEncoder::Scalar(params) => params.is_out_of_range(code as f64),
                SlotEncoder::Identity { alphabet } => code < 0 || code >= *alphabet as i64,
            })
            .count()
    }

    /// Decodes per-bit support (how often each input bit was reconstructed)
    /// back to one code per column: each slot picks the code whose bits carry
    /// the most support, ties toward the lower code, and a slot with no
    /// support at all decodes to [`PAD_CODE`].
    pub fn decode_support(&self, support: &[u32]) -> Result<Vec<i64>> {
        if support.len() != self.width {
            return Err(HtmError::WidthMismatch {
                left: support.len(),
                right: self.width,
            });
        }
        let mut row = Vec::with_capacity(self.slots.len());
        for (slot, &offset) in self.slots.iter().zip(&self.offsets) {
            let window = &support[offset..offset + slot.width()];
            let code = match slot {
                SlotEncoder::Scalar(params) => {
                    let mut best_bucket = 0usize;
                    let mut best_sum = 0u64;
                    for bucket in 0..params.buckets {
                        let sum: u64 = window[bucket..bucket + params.active_width]
                            .iter()
                            .map(|&s| s as u64)
                            .sum();
                        if sum > best_sum {
                            best_sum = sum;
                            best_bucket = bucket;
                        }
                    }
                    if best_sum == 0 {
                        PAD_CODE
                    } else {
                        params.bucket_value(best_bucket).round() as i64
                    }
                }
                SlotEncoder::Identity { .. } => {
                    match window.iter().enumerate().max_by(|a, b| {
                        a.1.cmp(b.1).then(b.0.cmp(&a.0)) // ties toward the lower code
                    }) {
                        Some((idx, &s)) if s > 0 => idx as i64,
                        _ => PAD_CODE,
                    }
                }
            };
            row.push(code);
        }
        Ok(row)
    }
}
