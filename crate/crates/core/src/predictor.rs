//! Greedy prefix prediction over learned recognition units.
//!
//! Every training row becomes a recognition unit: its original integer codes
//! plus its pooled column SDR. A query is a code prefix (code 0 positions are
//! wildcards — they match nothing and demand nothing); the predictor scores
//! every unit by positional agreement, greedily keeps the best, and accepts
//! it only when the score reaches `per_adjust` percent of the best achievable
//! score. The accepted unit's full stored row is the completion.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::encoder::PAD_CODE;
use crate::error::{HtmError, Result};
use crate::sdr::Sdr;

/// One learned association: a stored code row and its pooled representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionUnit {
    pub id: u64,
    /// Original integer codes of the training row.
    pub row: Vec<i64>,
    /// Winning-column SDR the pooler produced for this row.
    pub pooled: Sdr,
}

/// Insertion-ordered collection of recognition units with unique ids, all of
/// one arity and one pooled width.
#[derive(Debug, Clone, Default)]
pub struct RecognitionStore {
    units: Vec<RecognitionUnit>,
    ids: HashSet<u64>,
}

impl RecognitionStore {
    pub fn new() -> RecognitionStore {
        RecognitionStore::default()
    }

    pub fn ingest(&mut self, unit: RecognitionUnit) -> Result<()> {
        if !self.ids.insert(unit.id) {
            return Err(HtmError::DuplicateUnit(unit.id));
        }
        if let Some(first) = self.units.first() {
            if unit.row.len() != first.row.len() {
                return Err(HtmError::Data(format!(
                    "unit {} has {} columns, the store holds {}-column rows",
                    unit.id,
                    unit.row.len(),
                    first.row.len()
                )));
            }
            if unit.pooled.width() != first.pooled.width() {
                return Err(HtmError::WidthMismatch {
                    left: unit.pooled.width(),
                    right: first.pooled.width(),
                });
            }
        }
        self.units.push(unit);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn units(&self) -> &[RecognitionUnit] {
        &self.units
    }

    /// Arity of the stored rows.
    pub fn arity(&self) -> Option<usize> {
        self.units.first().map(|u| u.row.len())
    }
}

/// Result of one greedy prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionOutcome {
    /// Full stored row of the chosen unit.
    pub predicted_row: Vec<i64>,
    /// Id of the chosen unit.
    pub source_unit: u64,
    /// Achieved match score.
    pub score: usize,
    /// Best achievable score for this query.
    pub best_possible: usize,
    /// Whether the score cleared the `per_adjust` acceptance bar.
    pub accepted: bool,
}

/// Acceptance bar: the smallest score that counts as a recognition,
/// `ceil(per_adjust% of best_possible)` in exact integer arithmetic.
fn acceptance_threshold(per_adjust: u32, best_possible: usize) -> usize {
    (per_adjust as usize * best_possible).div_ceil(100)
}

fn pick_best<I: Iterator<Item = (u64, usize)>>(scored: I) -> Option<(u64, usize)> {
    let mut best: Option<(u64, usize)> = None;
    for (id, score) in scored {
        best = match best {
            None => Some((id, score)),
            // Strictly better score wins; equal scores go to the lower id.
            Some((bid, bscore)) if score > bscore || (score == bscore && id < bid) => {
                Some((id, score))
            }
            keep => keep,
        };
    }
    best
}

fn validate_query(store: &RecognitionStore, effective_positions: usize) -> Result<()> {
    if store.is_empty() {
        return Err(HtmError::EmptyStore);
    }
    if effective_positions == 0 {
        return Err(HtmError::Data(
            "query carries no information (every position is blank)".into(),
        ));
    }
    Ok(())
}

/// Greedy code-level prediction: scores every unit by the number of prefix
/// positions whose nonzero code matches the unit's code exactly, keeps the
/// best (ties to the lowest unit id), and accepts it iff the score reaches
/// `per_adjust` percent of the number of nonzero prefix positions.
///
/// The prefix may be shorter than the stored rows; positions beyond it are
/// unconstrained, as are pad-code positions inside it.
pub fn greedy_predict(
    prefix: &[i64],
    store: &RecognitionStore,
    per_adjust: u32,
) -> Result<PredictionOutcome> {
    if let Some(arity) = store.arity() {
        if prefix.len() > arity {
            return Err(HtmError::Data(format!(
                "query has {} positions, stored rows only {arity}",
                prefix.len()
            )));
        }
    }
    let best_possible = prefix.iter().filter(|&&c| c != PAD_CODE).count();
    validate_query(store, best_possible)?;

    let scored = store.units.iter().map(|unit| {
        let score = prefix
            .iter()
            .zip(&unit.row)
            .filter(|&(&q, &u)| q != PAD_CODE && q == u)
            .count();
        (unit.id, score)
    });
    let (source_unit, score) = pick_best(scored).expect("store is non-empty");
    finish(store, source_unit, score, best_possible, per_adjust)
}

/// Greedy SDR-level prediction: same selection and acceptance logic, but the
/// score is the bit overlap between the query's pooled SDR and each unit's,
/// and the best achievable score is the query's active count.
pub fn greedy_predict_sdr(
    query: &Sdr,
    store: &RecognitionStore,
    per_adjust: u32,
) -> Result<PredictionOutcome> {
    let best_possible = query.active_count();
    validate_query(store, best_possible)?;
    let mut scored = Vec::with_capacity(store.len());
    for unit in &store.units {
        scored.push((unit.id, query.overlap(&unit.pooled)?));
    }
    let (source_unit, score) = pick_best(scored.into_iter()).expect("store is non-empty");
    finish(store, source_unit, score, best_possible, per_adjust)
}

fn finish(
    store: &RecognitionStore,
    source_unit: u64,
    score: usize,
    best_possible: usize,
    per_adjust: u32,
) -> Result<PredictionOutcome> {
    let unit = store
        .units
        .iter()
        .find(|u| u.id == source_unit)
        .expect("winner comes from the store");
    Ok(PredictionOutcome {
        predicted_row: unit.row.clone(),
        source_unit,
        score,
        best_possible,
        accepted: score >= acceptance_threshold(per_adjust, best_possible),
    })
}

/// Runs [`greedy_predict`] over a batch of queries.
pub fn predict_all(
    queries: &[Vec<i64>],
    store: &RecognitionStore,
    per_adjust: u32,
) -> Result<Vec<PredictionOutcome>> {
    queries
        .iter()
        .map(|q| greedy_predict(q, store, per_adjust))
        .collect()
}
