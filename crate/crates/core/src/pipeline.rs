//! The end-to-end experiment pipeline: resolve a dataset, evolve a pooling
//! matrix, run the temporal stage over the pooled sequence, learn every row
//! as a recognition unit, predict, and score — all captured in one
//! [`ExperimentReport`]. Also home to the naive baselines and the comparison
//! table against previously reported reference results.

use std::env;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::config::{DataSource, ExperimentConfig, ScoringMode};
use crate::data::{
    australian_surrogate, generate_periodic_binary, generate_times_table, heart_surrogate,
    load_csv, load_text, word_fixture, DataKind, Dataset,
};
use crate::encoder::{
    decode_row, EncoderMode, MixedIntegerSequence, RowEncoder, ScalarEncoderParams,
};
use crate::error::{HtmError, Result};
use crate::metrics;
use crate::predictor::{
    greedy_predict_sdr, predict_all, PredictionOutcome, RecognitionStore, RecognitionUnit,
};
use crate::report::{
    BaselineSummary, DatasetSummary, ExperimentReport, PoolingSummary, PredictionMetrics,
    PredictionRecord, TemporalSummary, REPORT_SCHEMA_VERSION,
};
use crate::spatial::{evolve_sdr, EvolveParams, NetworkTopology};
use crate::temporal::{LearningParams, TemporalMemory, TemporalParams};

/// Symbol-code range shared by every text column.
const TEXT_CODE_MIN: f64 = 0.0;
const TEXT_CODE_MAX: f64 = 126.0;

/// Environment variable naming a directory with real benchmark CSV files
/// (`heart.csv`, `australian.csv`). When present, the surrogate toys load
/// the real data instead.
pub const DATA_DIR_ENV: &str = "HTM_DATA_DIR";

fn benchmark_or_surrogate(stem: &str, surrogate: Dataset) -> Result<Dataset> {
    if let Ok(dir) = env::var(DATA_DIR_ENV) {
        let path = PathBuf::from(dir).join(format!("{stem}.csv"));
        if path.is_file() {
            return load_csv(&path, true, false);
        }
    }
    Ok(surrogate)
}

/// Materializes the dataset a config names.
pub fn resolve_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    match config.data_kind {
        DataSource::Toy => match config.data.as_str() {
            "times" => generate_times_table(config.times_limit),
            "periodic" => generate_periodic_binary(config.periodic_period, config.periodic_cycles),
            "word3a" | "word3b" | "word3c" => word_fixture(&config.data),
            "heart_surrogate" => benchmark_or_surrogate("heart", heart_surrogate()),
            "australian_surrogate" => benchmark_or_surrogate("australian", australian_surrogate()),
            other => Err(HtmError::config(
                "data",
                format!(
                    "unknown toy `{other}` (expected times, periodic, word3a, word3b, \
                     word3c, heart_surrogate, australian_surrogate)"
                ),
            )),
        },
        DataSource::Csv => load_csv(Path::new(&config.data), config.has_labels, config.header),
        DataSource::Text => load_text(Path::new(&config.data)),
    }
}

/// Builds the row encoder a config asks for, sized to the working rows.
fn build_encoder(
    config: &ExperimentConfig,
    kind: DataKind,
    working: &MixedIntegerSequence,
) -> Result<RowEncoder> {
    match (config.encoder, kind) {
        // Text columns share one symbol-code range so every position decodes
        // on the same scale.
        (EncoderMode::Scalar, DataKind::Text) => RowEncoder::scalar_uniform(
            working.arity(),
            ScalarEncoderParams::new(
                TEXT_CODE_MIN,
                TEXT_CODE_MAX,
                config.buckets,
                config.active_width,
            )?,
        ),
        (EncoderMode::Scalar, DataKind::Numeric) => RowEncoder::scalar(
            &working.column_bounds(),
            config.buckets,
            config.active_width,
        ),
        (EncoderMode::Identity, _) => RowEncoder::identity(&working.column_bounds()),
    }
}

/// Renders a completed row the way the dataset reads: decoded text for text
/// data, space-joined codes for numeric data.
pub fn render_row(kind: DataKind, codes: &[i64]) -> Result<String> {
    match kind {
        DataKind::Text => decode_row(codes),
        DataKind::Numeric => Ok(codes
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ")),
    }
}

/// Runs one full experiment. Everything in the returned report except
/// `wall_clock_ms` is a pure function of the configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    config.validate()?;
    let dataset = resolve_dataset(config)?;

    let unit_rows = dataset.unit_rows();
    let rows_used = unit_rows.len().min(config.seq_size);
    let truncated = unit_rows.len() > rows_used;
    let working = MixedIntegerSequence::new(unit_rows[..rows_used].to_vec())?;

    let encoder = build_encoder(config, dataset.kind, &working)?;
    let clamped_codes = working.rows().iter().map(|r| encoder.clamp_count(r)).sum();

    // Stage 1: Monte Carlo pooling search.
    let desired_activity = config.effective_activity()?;
    let evolve_params = EvolveParams {
        iters: config.iters,
        min_overlap: config.min_overlap,
        desired_activity,
        connect_threshold: config.perms_th,
        potential_fraction: config.potential_fraction,
        columns: config.columns,
    };
    let (trace, pooled) = evolve_sdr(working.rows(), &encoder, &evolve_params, config.seed)?;

    // Stage 2: temporal pass over the pooled sequence.
    let topology = NetworkTopology {
        columns: config.columns,
        cells_per_column: config.cells_per_column,
        input_width: encoder.width(),
    };
    let mut tm = TemporalMemory::new(
        topology,
        config.perms_th,
        config.theta,
        config.max_segments_per_cell,
        TemporalParams {
            learning: LearningParams {
                p_plus: config.p_plus,
                p_minus: config.p_minus,
            },
            rule: config.learning_rule,
            initial_permanence: config.effective_initial_permanence(),
        },
    )?;
    let mut winner_activations = 0usize;
    let mut bursting_columns = 0usize;
    let mut segments_grown = 0usize;
    let mut transitions_matched = 0usize;
    let mut checkable_transitions = 0usize;
    let mut predicted: Option<Vec<usize>> = None;
    for inh in &pooled {
        if let Some(prev) = predicted.take() {
            checkable_transitions += 1;
            if prev == inh.winners {
                transitions_matched += 1;
            }
        }
        let stats = tm.step(&inh.winners, true)?;
        winner_activations += inh.winners.len();
        bursting_columns += stats.bursting_columns;
        segments_grown += stats.segments_grown;
        predicted = Some(tm.predicted_columns());
    }

    // Stage 3: every working row becomes a recognition unit.
    let mut store = RecognitionStore::new();
    for (i, (row, inh)) in working.rows().iter().zip(&pooled).enumerate() {
        store.ingest(RecognitionUnit {
            id: i as u64,
            row: row.clone(),
            pooled: inh.winner_sdr(),
        })?;
    }

    // Stage 4: predict. Labeled data queries by feature prefix (the label is
    // what we want back); unlabeled data queries by its own full rows, where
    // pad codes act as wildcards.
    let outcomes: Vec<PredictionOutcome> = match config.scoring {
        ScoringMode::Integer => {
            let queries: Vec<Vec<i64>> = if dataset.is_labeled() {
                dataset.records.rows()[..rows_used].to_vec()
            } else {
                working.rows().to_vec()
            };
            predict_all(&queries, &store, config.per_adjust)?
        }
        ScoringMode::Sdr => pooled
            .iter()
            .map(|inh| greedy_predict_sdr(&inh.winner_sdr(), &store, config.per_adjust))
            .collect::<Result<Vec<_>>>()?,
    };

    // Stage 5: score.
    let truth_flat: Vec<f64> = working.rows().iter().flatten().map(|&v| v as f64).collect();
    let pred_flat: Vec<f64> = outcomes
        .iter()
        .flat_map(|o| o.predicted_row.iter().map(|&v| v as f64))
        .collect();
    let rmse_codes = metrics::rmse(&truth_flat, &pred_flat)?;
    let (mape, mape_excluded) = match metrics::mape(&truth_flat, &pred_flat) {
        Ok((v, e)) => (Some(v), e),
        Err(HtmError::UndefinedMetric(_)) => (None, truth_flat.len()),
        Err(other) => return Err(other),
    };
    let (rmse_labels, accuracy) = match &dataset.labels {
        Some(labels) => {
            let truth = &labels[..rows_used];
            let pred: Vec<f64> = outcomes
                .iter()
                .map(|o| *o.predicted_row.last().expect("unit rows are non-empty") as f64)
                .collect();
            (
                Some(metrics::rmse(truth, &pred)?),
                metrics::accuracy(truth, &pred)?,
            )
        }
        None => (None, metrics::accuracy(&truth_flat, &pred_flat)?),
    };
    let baseline = match &dataset.labels {
        Some(labels) => Some(run_baseline(
            &labels[..rows_used],
            BaselineKind::MajorityClass,
        )?),
        None => None,
    };

    let predictions = outcomes
        .iter()
        .enumerate()
        .map(|(row, o)| {
            Ok(PredictionRecord {
                row,
                values: o.predicted_row.clone(),
                text: render_row(dataset.kind, &o.predicted_row)?,
                source_unit: o.source_unit,
                score: o.score,
                best_possible: o.best_possible,
                accepted: o.accepted,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let accepted = predictions.iter().filter(|p| p.accepted).count();

    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config_hash: config.hash(),
        config: config.clone(),
        dataset: DatasetSummary {
            name: dataset.name.clone(),
            kind: dataset.kind,
            total_rows: unit_rows.len(),
            rows_used,
            truncated,
            arity: working.arity(),
            labeled: dataset.is_labeled(),
        },
        pooling: PoolingSummary {
            input_width: encoder.width(),
            effective_local_activity: desired_activity,
            iterations: trace.mape.len(),
            best_iteration: trace.best_iteration,
            best_mape: trace.best_mape,
            curve: trace.mape.clone(),
            clamped_codes,
            min_winning_overlaps: pooled.iter().map(|p| p.min_winning_overlap()).collect(),
        },
        temporal: TemporalSummary {
            effective_initial_permanence: config.effective_initial_permanence(),
            steps: pooled.len(),
            winner_activations,
            bursting_columns,
            bursting_rate: if winner_activations == 0 {
                0.0
            } else {
                bursting_columns as f64 / winner_activations as f64
            },
            segments_grown,
            total_segments: tm.store().total_segments(),
            evictions: tm.store().evictions(),
            transitions_matched,
            transition_accuracy: (checkable_transitions > 0)
                .then(|| 100.0 * transitions_matched as f64 / checkable_transitions as f64),
        },
        predictions,
        metrics: PredictionMetrics {
            rmse_codes,
            rmse_labels,
            mape,
            mape_excluded_zero_terms: mape_excluded,
            accuracy,
            accepted,
            rejected: outcomes.len() - accepted,
        },
        baseline,
        wall_clock_ms: started.elapsed().as_millis() as u64,
    })
}

/// Naive baselines the pipeline is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Predict each label as the previous one (the first as itself).
    LastValue,
    /// Predict every label as the most frequent one (ties to the smallest).
    MajorityClass,
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::LastValue => "last_value",
            BaselineKind::MajorityClass => "majority_class",
        }
    }
}

impl FromStr for BaselineKind {
    type Err = HtmError;

    fn from_str(s: &str) -> Result<BaselineKind> {
        match s {
            "last_value" => Ok(BaselineKind::LastValue),
            "majority_class" => Ok(BaselineKind::MajorityClass),
            other => Err(HtmError::config(
                "kind",
                format!("expected last_value|majority_class, got `{other}`"),
            )),
        }
    }
}

/// The label sequence a baseline would predict.
pub fn baseline_predictions(labels: &[f64], kind: BaselineKind) -> Vec<f64> {
    match kind {
        BaselineKind::LastValue => {
            let mut pred = Vec::with_capacity(labels.len());
            for (i, &l) in labels.iter().enumerate() {
                pred.push(if i == 0 { l } else { labels[i - 1] });
            }
            pred
        }
        BaselineKind::MajorityClass => {
            let mut sorted = labels.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("labels are finite"));
            let mut majority = sorted[0];
            let mut best_count = 0usize;
            let mut i = 0;
            while i < sorted.len() {
                let mut j = i;
                while j < sorted.len() && sorted[j] == sorted[i] {
                    j += 1;
                }
                // Strictly-greater keeps the smallest value on ties because
                // we scan ascending.
                if j - i > best_count {
                    best_count = j - i;
                    majority = sorted[i];
                }
                i = j;
            }
            vec![majority; labels.len()]
        }
    }
}

/// Scores one baseline against the labels it predicts.
pub fn run_baseline(labels: &[f64], kind: BaselineKind) -> Result<BaselineSummary> {
    if labels.is_empty() {
        return Err(HtmError::Data("baseline over an empty label series".into()));
    }
    let pred = baseline_predictions(labels, kind);
    Ok(BaselineSummary {
        kind: kind.name().into(),
        rmse: metrics::rmse(labels, &pred)?,
        accuracy: metrics::accuracy(labels, &pred)?,
    })
}

/// Previously reported reference results shipped with the crate.
const REFERENCE_RMSE: &str = include_str!("../assets/reference_rmse.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    pub dataset: String,
    pub os_elm_rbf: f64,
    pub os_elm_sig: f64,
    pub os_elm_sin: f64,
    pub htm_reported: f64,
}

/// Parses the bundled reference table.
pub fn reference_rows() -> Vec<ReferenceRow> {
    REFERENCE_RMSE
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut parts = line.split(',');
            let mut next = || parts.next().expect("reference table is well-formed");
            ReferenceRow {
                dataset: next().to_string(),
                os_elm_rbf: next().parse().expect("reference value"),
                os_elm_sig: next().parse().expect("reference value"),
                os_elm_sin: next().parse().expect("reference value"),
                htm_reported: next().parse().expect("reference value"),
            }
        })
        .collect()
}

/// Maps a measured dataset name onto its reference-table row, if any.
fn reference_alias(name: &str) -> Option<&'static str> {
    let lower = name.to_ascii_lowercase();
    if lower.contains("heart") {
        Some("heart_data")
    } else if lower.contains("australian") || lower.contains("credit") {
        Some("australian_data")
    } else if lower.contains("pressure") || lower.contains("periodic") {
        Some("pressure_data")
    } else {
        None
    }
}

/// Comparison of measured runs against the reference results, rendered as a
/// Markdown table and as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub markdown: String,
    pub csv: String,
}

fn fmt_opt(value: Option<f64>) -> String {
    value
        .map(|v| format!("{v:.4}"))
        .unwrap_or_else(|| "-".into())
}

/// Builds the comparison table for a set of run reports. Each report
/// contributes its measured label RMSE (falling back to the code RMSE for
/// unlabeled data) and its baseline; datasets recognized by name also show
/// the previously reported reference numbers.
pub fn build_comparison(reports: &[ExperimentReport]) -> Result<Comparison> {
    if reports.is_empty() {
        return Err(HtmError::Data("no reports to compare".into()));
    }
    let references = reference_rows();

    let header = [
        "dataset",
        "measured_rmse",
        "baseline_rmse",
        "htm_reported",
        "os_elm_rbf",
        "os_elm_sig",
        "os_elm_sin",
    ];
    let mut md = String::new();
    md.push_str(&format!("| {} |\n", header.join(" | ")));
    md.push_str(&format!("|{}\n", "---|".repeat(header.len())));
    let mut csv = format!("{}\n", header.join(","));

    for report in reports {
        let name = &report.dataset.name;
        let measured = report
            .metrics
            .rmse_labels
            .unwrap_or(report.metrics.rmse_codes);
        let baseline = report.baseline.as_ref().map(|b| b.rmse);
        let reference =
            reference_alias(name).and_then(|key| references.iter().find(|r| r.dataset == key));
        let cells = [
            name.clone(),
            format!("{measured:.4}"),
            fmt_opt(baseline),
            fmt_opt(reference.map(|r| r.htm_reported)),
            fmt_opt(reference.map(|r| r.os_elm_rbf)),
            fmt_opt(reference.map(|r| r.os_elm_sig)),
            fmt_opt(reference.map(|r| r.os_elm_sin)),
        ];
        md.push_str(&format!("| {} |\n", cells.join(" | ")));
        csv.push_str(&format!("{}\n", cells.join(",")));
    }
    md.push_str("\nReference columns are previously reported results bundled in reference_rmse.csv; `-` marks datasets without a reference row.\n");
    Ok(Comparison { markdown: md, csv })
}
