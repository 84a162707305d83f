//! Experiment configuration: defaults, the flat `key = value` file format,
//! validation, and the config identity hash.
//!
//! A config file is plain text: one `key = value` pair per line, `#` starts
//! a comment, unknown keys are rejected by name. Every key can also be
//! overridden from the command line, with precedence CLI > file > defaults.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoder::EncoderMode;
use crate::error::{HtmError, Result};
use crate::temporal::LearningRule;

/// Where the experiment's data comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// A bundled generator or fixture, named in `data`.
    Toy,
    /// A CSV file at the path in `data`.
    Csv,
    /// A newline-separated text file at the path in `data`.
    Text,
}

/// How predictions are scored against stored units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringMode {
    /// Positional agreement of integer codes (pads are wildcards).
    Integer,
    /// Bit overlap of pooled SDRs.
    Sdr,
}

/// Full parameter set of one experiment run. Field defaults follow the
/// standard smoke-test setup (50 pooling trials, overlap cutoff 2, connect
/// threshold 0.21, 2 winning columns, window of 700 rows, 99% acceptance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Data source kind.
    pub data_kind: DataSource,
    /// Toy name (`times`, `periodic`, `word3a`, `word3b`, `word3c`,
    /// `heart_surrogate`, `australian_surrogate`) or a file path.
    pub data: String,
    /// For CSV data: treat the last column as the label.
    pub has_labels: bool,
    /// For CSV data: skip the first line.
    pub header: bool,

    /// Monte Carlo pooling trials.
    pub iters: usize,
    /// Column overlap cutoff.
    pub min_overlap: u32,
    /// Permanence level at which a synapse is connected.
    pub perms_th: f64,
    /// Winning columns per input (absolute). Exclusive with
    /// `sparsity_percent`.
    pub desired_local_activity: Option<usize>,
    /// Winning columns as a percentage of all columns. Exclusive with
    /// `desired_local_activity`.
    pub sparsity_percent: Option<f64>,
    /// Upper bound on how many rows of the dataset are processed.
    pub seq_size: usize,
    /// Acceptance bar for predictions, in percent.
    pub per_adjust: u32,
    /// Master RNG seed.
    pub seed: u64,

    pub encoder: EncoderMode,
    pub learning_rule: LearningRule,
    pub scoring: ScoringMode,

    /// Reinforcement rate.
    pub p_plus: f64,
    /// Decay rate.
    pub p_minus: f64,
    /// Segment activation threshold (strict lower bound).
    pub theta: usize,
    pub cells_per_column: usize,
    /// Pooler columns.
    pub columns: usize,
    /// Scalar encoder buckets per slot.
    pub buckets: usize,
    /// Scalar encoder active bits per value.
    pub active_width: usize,
    /// Probability a proximal synapse is in a column's potential pool.
    pub potential_fraction: f64,
    /// Permanence of freshly grown distal synapses; defaults to just above
    /// the connect threshold.
    pub initial_permanence: Option<f64>,
    pub max_segments_per_cell: usize,

    /// Toy generator parameters.
    pub times_limit: i64,
    pub periodic_period: usize,
    pub periodic_cycles: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data_kind: DataSource::Toy,
            data: "times".into(),
            has_labels: true,
            header: false,
            iters: 50,
            min_overlap: 2,
            perms_th: 0.21,
            desired_local_activity: None,
            sparsity_percent: None,
            seq_size: 700,
            per_adjust: 99,
            seed: 42,
            encoder: EncoderMode::Scalar,
            learning_rule: LearningRule::Multiplicative,
            scoring: ScoringMode::Integer,
            p_plus: 0.1,
            p_minus: 0.02,
            theta: 1,
            cells_per_column: 4,
            columns: 64,
            buckets: 64,
            active_width: 3,
            potential_fraction: 0.5,
            initial_permanence: None,
            max_segments_per_cell: 32,
            times_limit: 12,
            periodic_period: 12,
            periodic_cycles: 10,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| HtmError::config(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(HtmError::config(
            key,
            format!("expected a boolean, got `{value}`"),
        )),
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment. Keys are the struct field
    /// names; the legacy spelling `desired_localActivity` is accepted as an
    /// alias. Unknown keys are an error naming the offending key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let normalized = key.trim().to_ascii_lowercase();
        let value = value.trim();
        match normalized.as_str() {
            "data_kind" => {
                self.data_kind = match value {
                    "toy" => DataSource::Toy,
                    "csv" => DataSource::Csv,
                    "text" => DataSource::Text,
                    _ => {
                        return Err(HtmError::config(
                            "data_kind",
                            format!("expected toy|csv|text, got `{value}`"),
                        ))
                    }
                }
            }
            "data" => self.data = value.to_string(),
            "has_labels" => self.has_labels = parse_bool("has_labels", value)?,
            "header" => self.header = parse_bool("header", value)?,
            "iters" => self.iters = parse_value("iters", value)?,
            "min_overlap" => self.min_overlap = parse_value("min_overlap", value)?,
            "perms_th" => self.perms_th = parse_value("perms_th", value)?,
            "desired_local_activity" | "desired_localactivity" => {
                self.desired_local_activity = Some(parse_value("desired_local_activity", value)?)
            }
            "sparsity_percent" => {
                self.sparsity_percent = Some(parse_value("sparsity_percent", value)?)
            }
            "seq_size" => self.seq_size = parse_value("seq_size", value)?,
            "per_adjust" => self.per_adjust = parse_value("per_adjust", value)?,
            "seed" => self.seed = parse_value("seed", value)?,
            "encoder" => {
                self.encoder = match value {
                    "scalar" => EncoderMode::Scalar,
                    "identity" => EncoderMode::Identity,
                    _ => {
                        return Err(HtmError::config(
                            "encoder",
                            format!("expected scalar|identity, got `{value}`"),
                        ))
                    }
                }
            }
            "learning_rule" => {
                self.learning_rule = match value {
                    "multiplicative" => LearningRule::Multiplicative,
                    "additive" => LearningRule::Additive,
                    _ => {
                        return Err(HtmError::config(
                            "learning_rule",
                            format!("expected multiplicative|additive, got `{value}`"),
                        ))
                    }
                }
            }
            "scoring" => {
                self.scoring = match value {
                    "integer" => ScoringMode::Integer,
                    "sdr" => ScoringMode::Sdr,
                    _ => {
                        return Err(HtmError::config(
                            "scoring",
                            format!("expected integer|sdr, got `{value}`"),
                        ))
                    }
                }
            }
            "p_plus" => self.p_plus = parse_value("p_plus", value)?,
            "p_minus" => self.p_minus = parse_value("p_minus", value)?,
            "theta" => self.theta = parse_value("theta", value)?,
            "cells_per_column" => self.cells_per_column = parse_value("cells_per_column", value)?,
            "columns" => self.columns = parse_value("columns", value)?,
            "buckets" => self.buckets = parse_value("buckets", value)?,
            "active_width" => self.active_width = parse_value("active_width", value)?,
            "potential_fraction" => {
                self.potential_fraction = parse_value("potential_fraction", value)?
            }
            "initial_permanence" => {
                self.initial_permanence = Some(parse_value("initial_permanence", value)?)
            }
            "max_segments_per_cell" => {
                self.max_segments_per_cell = parse_value("max_segments_per_cell", value)?
            }
            "times_limit" => self.times_limit = parse_value("times_limit", value)?,
            "periodic_period" => self.periodic_period = parse_value("periodic_period", value)?,
            "periodic_cycles" => self.periodic_cycles = parse_value("periodic_cycles", value)?,
            _ => return Err(HtmError::config(key, "unknown configuration key")),
        }
        Ok(())
    }

    /// Parses the flat `key = value` format on top of the defaults.
    pub fn from_kv_text(text: &str) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(HtmError::config(
                    format!("line {}", line_no + 1),
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            config.set(key, value)?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HtmError::config("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_kv_text(&text)
    }

    /// Winning columns per input, resolving the absolute-vs-percent choice.
    /// Exactly one of the two knobs may be set; with neither, the default is
    /// an absolute 2.
    pub fn effective_activity(&self) -> Result<usize> {
        match (self.desired_local_activity, self.sparsity_percent) {
            (Some(_), Some(_)) => Err(HtmError::config(
                "desired_local_activity",
                "set either desired_local_activity or sparsity_percent, not both",
            )),
            (Some(k), None) => Ok(k),
            (None, Some(pct)) => Ok(((self.columns as f64 * pct / 100.0).round() as usize).max(1)),
            (None, None) => Ok(2),
        }
    }

    /// Permanence assigned to freshly grown distal synapses.
    pub fn effective_initial_permanence(&self) -> f64 {
        self.initial_permanence.unwrap_or(self.perms_th + 0.01)
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.is_empty() {
            return Err(HtmError::config("data", "must name a toy or a file"));
        }
        if self.iters == 0 {
            return Err(HtmError::config("iters", "must be at least 1"));
        }
        if self.seq_size == 0 {
            return Err(HtmError::config("seq_size", "must be at least 1"));
        }
        if !(self.perms_th > 0.0 && self.perms_th < 1.0) {
            return Err(HtmError::config("perms_th", "must lie in (0, 1)"));
        }
        if self.per_adjust > 100 {
            return Err(HtmError::config(
                "per_adjust",
                "is a percentage; must be <= 100",
            ));
        }
        if self.columns == 0 {
            return Err(HtmError::config("columns", "must be at least 1"));
        }
        if self.cells_per_column == 0 {
            return Err(HtmError::config("cells_per_column", "must be at least 1"));
        }
        if self.buckets < 2 {
            return Err(HtmError::config("buckets", "need at least 2 buckets"));
        }
        if self.active_width == 0 {
            return Err(HtmError::config("active_width", "must be at least 1"));
        }
        if !(self.potential_fraction > 0.0 && self.potential_fraction <= 1.0) {
            return Err(HtmError::config("potential_fraction", "must lie in (0, 1]"));
        }
        if !(self.p_plus > 0.0 && self.p_plus <= 1.0) {
            return Err(HtmError::config("p_plus", "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.p_minus) {
            return Err(HtmError::config("p_minus", "must lie in [0, 1]"));
        }
        if let Some(pct) = self.sparsity_percent {
            if !(pct > 0.0 && pct <= 100.0) {
                return Err(HtmError::config("sparsity_percent", "must lie in (0, 100]"));
            }
        }
        if let Some(k) = self.desired_local_activity {
            if k == 0 {
                return Err(HtmError::config(
                    "desired_local_activity",
                    "must be at least 1",
                ));
            }
        }
        let initial = self.effective_initial_permanence();
        if initial < self.perms_th || initial > 1.0 {
            return Err(HtmError::config(
                "initial_permanence",
                format!("{initial} must lie in [perms_th, 1]"),
            ));
        }
        if self.max_segments_per_cell == 0 {
            return Err(HtmError::config(
                "max_segments_per_cell",
                "must be at least 1",
            ));
        }
        self.effective_activity()?;
        Ok(())
    }

    /// Hex SHA-256 over the canonical JSON form: two runs with the same hash
    /// ran the same configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
