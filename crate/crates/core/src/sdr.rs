//! Sparse distributed representations (SDRs) and the small bit-set algebra
//! the rest of the pipeline is built on.
//!
//! An SDR is a fixed-width binary vector with few active bits. We store only
//! the sorted active indices; [`Sdr::dense`] materializes the full bit vector
//! when a brute-force view is clearer (mostly in tests).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{HtmError, Result};

/// Fixed-width binary vector stored as a sorted, deduplicated set of active
/// bit indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sdr {
    width: usize,
    active: Vec<usize>,
}

impl Sdr {
    /// Builds an SDR from any collection of bit indices. Indices are sorted
    /// and deduplicated; an index outside `[0, width)` is rejected.
    pub fn new(width: usize, mut active: Vec<usize>) -> Result<Self> {
        active.sort_unstable();
        active.dedup();
        if let Some(&bad) = active.iter().find(|&&i| i >= width) {
            return Err(HtmError::Data(format!(
                "active bit {bad} out of range for width {width}"
            )));
        }
        Ok(Sdr { width, active })
    }

    /// All-zero SDR of the given width.
    pub fn empty(width: usize) -> Self {
        Sdr {
            width,
            active: Vec::new(),
        }
    }

    pub fn from_dense(bits: &[bool]) -> Self {
        let active = bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        Sdr {
            width: bits.len(),
            active,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Sorted active bit indices.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn contains(&self, bit: usize) -> bool {
        self.active.binary_search(&bit).is_ok()
    }

    /// Fraction of bits that are active, in `[0, 1]`.
    pub fn sparsity(&self) -> f64 {
        if self.width == 0 {
            0.0
        } else {
            self.active.len() as f64 / self.width as f64
        }
    }

    /// Dense bit-vector view.
    pub fn dense(&self) -> Vec<bool> {
        let mut bits = vec![false; self.width];
        for &i in &self.active {
            bits[i] = true;
        }
        bits
    }

    /// Packs the active bits into 64-bit words (little-endian bit order) for
    /// fast intersection counting against permanence masks.
    pub fn to_words(&self) -> Vec<u64> {
        let words = self.width.div_ceil(64);
        let mut mask = vec![0u64; words];
        for &i in &self.active {
            mask[i / 64] |= 1u64 << (i % 64);
        }
        mask
    }

    /// Number of active bits the two SDRs share. Symmetric, and never larger
    /// than the smaller active count. Errors if the widths differ.
    pub fn overlap(&self, other: &Sdr) -> Result<usize> {
        self.check_width(other)?;
        let (mut i, mut j, mut shared) = (0, 0, 0);
        while i < self.active.len() && j < other.active.len() {
            match self.active[i].cmp(&other.active[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    shared += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(shared)
    }

    /// Bitwise OR of two same-width SDRs.
    pub fn union(&self, other: &Sdr) -> Result<Sdr> {
        self.check_width(other)?;
        let mut merged = Vec::with_capacity(self.active.len() + other.active.len());
        merged.extend_from_slice(&self.active);
        merged.extend_from_slice(&other.active);
        merged.sort_unstable();
        merged.dedup();
        Ok(Sdr {
            width: self.width,
            active: merged,
        })
    }

    fn check_width(&self, other: &Sdr) -> Result<()> {
        if self.width != other.width {
            return Err(HtmError::WidthMismatch {
                left: self.width,
                right: other.width,
            });
        }
        Ok(())
    }
}

/// Picks the `k` highest-scoring indices from `(index, score)` pairs.
///
/// Scores that are not strictly positive never win; ties resolve toward the
/// lowest index so winner selection is reproducible run to run. The returned
/// indices are sorted ascending. Fewer than `k` indices come back when fewer
/// than `k` scores are positive.
pub fn top_k(scores: &[(usize, f64)], k: usize) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(HtmError::EmptyScores);
    }
    let mut positive: Vec<(usize, f64)> =
        scores.iter().copied().filter(|&(_, s)| s > 0.0).collect();
    positive.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    let mut winners: Vec<usize> = positive.into_iter().take(k).map(|(i, _)| i).collect();
    winners.sort_unstable();
    Ok(winners)
}
