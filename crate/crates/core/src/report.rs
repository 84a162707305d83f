//! Experiment report: the single JSON document a run produces, plus the CSV
//! artifact renderers.
//!
//! Everything in the report is a pure function of the configuration (and so
//! of the seed) except `wall_clock_ms`, which is why it sits on its own line
//! at the end of the document: [`strip_volatile`] removes it when two runs
//! are compared byte for byte.

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::data::DataKind;
use crate::error::Result;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub kind: DataKind,
    pub total_rows: usize,
    /// Rows actually processed (`seq_size` is an upper bound).
    pub rows_used: usize,
    pub truncated: bool,
    /// Columns per learned row (label column included when labeled).
    pub arity: usize,
    pub labeled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolingSummary {
    pub input_width: usize,
    /// Winning columns kept per row, after resolving the config's
    /// count/percent alternatives and defaults.
    pub effective_local_activity: usize,
    pub iterations: usize,
    pub best_iteration: usize,
    pub best_mape: f64,
    /// Reconstruction MAPE of every trial, in trial order.
    pub curve: Vec<f64>,
    /// Codes that fell outside their encoder slot and were clamped.
    pub clamped_codes: usize,
    /// Per row: the smallest overlap among its winning columns.
    pub min_winning_overlaps: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalSummary {
    /// Permanence given to freshly grown synapses, after defaulting.
    pub effective_initial_permanence: f64,
    pub steps: usize,
    /// Total winner-column activations across all steps.
    pub winner_activations: usize,
    /// Winner-column activations that burst.
    pub bursting_columns: usize,
    pub bursting_rate: f64,
    pub segments_grown: usize,
    pub total_segments: usize,
    pub evictions: u64,
    /// Steps (after the first) whose winner set was predicted exactly.
    pub transitions_matched: usize,
    /// `transitions_matched` over the checkable steps, as a percentage.
    pub transition_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub row: usize,
    /// Completed integer codes.
    pub values: Vec<i64>,
    /// Rendered completion (decoded text, or space-joined values).
    pub text: String,
    pub source_unit: u64,
    pub score: usize,
    pub best_possible: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionMetrics {
    /// RMSE between true and completed code rows, over all positions.
    pub rmse_codes: f64,
    /// RMSE between true labels and completed label codes (labeled data).
    pub rmse_labels: Option<f64>,
    /// MAPE over nonzero true codes.
    pub mape: Option<f64>,
    pub mape_excluded_zero_terms: usize,
    /// Exact-match percentage (labels for labeled data, else code positions).
    pub accuracy: f64,
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub kind: String,
    pub rmse: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub dataset: DatasetSummary,
    pub pooling: PoolingSummary,
    pub temporal: TemporalSummary,
    pub predictions: Vec<PredictionRecord>,
    pub metrics: PredictionMetrics,
    pub baseline: Option<BaselineSummary>,
    /// The one field that varies between identical runs.
    pub wall_clock_ms: u64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        Ok(json)
    }

    pub fn from_json(json: &str) -> Result<ExperimentReport> {
        Ok(serde_json::from_str(json)?)
    }

    /// `iteration,mape` rows of the Monte Carlo curve.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("iteration,mape\n");
        for (i, m) in self.pooling.curve.iter().enumerate() {
            out.push_str(&format!("{i},{m}\n"));
        }
        out
    }

    /// `row_index,predicted,score,accepted` rows.
    pub fn predictions_csv(&self) -> String {
        let mut out = String::from("row_index,predicted,score,accepted\n");
        for p in &self.predictions {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.row,
                csv_field(&p.text),
                p.score,
                p.accepted
            ));
        }
        out
    }
}

/// Quotes a CSV field when it needs it.
fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// Drops the lines that legitimately differ between two identical runs
/// (the wall-clock field), for byte-level comparison of reports.
pub fn strip_volatile(json: &str) -> String {
    json.lines()
        .filter(|line| !line.contains("\"wall_clock_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}
