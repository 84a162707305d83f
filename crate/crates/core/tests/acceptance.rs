//! Acceptance suite: eight numbered criteria covering equation-level oracle
//! equivalence, the bundled exemplar reproductions, benchmark substitute
//! properties, randomized property sweeps, sequence mastery, and artifact
//! determinism. Each criterion is one test that prints a `PASS` line with its
//! elapsed time (visible under `--nocapture`); tolerances and time limits are
//! pinned as constants here.

use std::time::{Duration, Instant};

use htm_core::config::{ExperimentConfig, ScoringMode};
use htm_core::pipeline::{build_comparison, run_experiment};
use htm_core::report::strip_volatile;
use htm_core::sdr::Sdr;
use htm_core::spatial::{column_overlaps, inhibit, NetworkTopology, ProximalPermanences};
use htm_core::temporal::{
    CellGrid, CellId, LearningParams, LearningRule, SegmentStore, TemporalMemory, TemporalParams,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const ORACLE_CASES: usize = 10_000;
const PROPERTY_CASES: usize = 10_000;
const MASTERY_SEQUENCES: usize = 100;
const BENCHMARK_SEEDS: [u64; 5] = [42, 7, 1234, 2026, 99991];

const ORACLE_LIMIT: Duration = Duration::from_secs(10);
const TIMES_LIMIT: Duration = Duration::from_secs(5);
const PERIODIC_LIMIT: Duration = Duration::from_secs(5);
const BENCHMARK_LIMIT_PER_DATASET: Duration = Duration::from_secs(60);
const PROPERTY_LIMIT: Duration = Duration::from_secs(10);
const MASTERY_LIMIT: Duration = Duration::from_secs(30);

// ---------------------------------------------------------------------------
// Independent entrywise evaluator of the three step equations, written
// directly against the documented contracts: predictive state from strict
// segment-overlap thresholding, active state from predicted-else-burst
// column activation, and the multiplicative permanence update. Everything is
// dense vectors and explicit loops so a disagreement with the library is a
// real disagreement.
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct OracleSegment {
    /// `((column, cell), permanence)`, sorted by presynaptic cell.
    synapses: Vec<((usize, usize), f64)>,
}

struct OracleCase {
    columns: usize,
    cells_per_column: usize,
    input_width: usize,
    threshold: f64,
    theta: usize,
    max_segments: usize,
    p_plus: f64,
    p_minus: f64,
    initial_permanence: f64,
    /// Proximal permanences, row-major `[column * input_width + bit]`.
    proximal: Vec<f64>,
    min_overlap: u32,
    desired_activity: usize,
    input_bits: Vec<bool>,
    /// Distal segments per cell index (`column * cells_per_column + cell`).
    segments: Vec<Vec<OracleSegment>>,
    prev_active: Vec<bool>,
    prev_predictive: Vec<bool>,
    prev_winners: Vec<(usize, usize)>,
}

#[derive(Debug, PartialEq, Eq)]
struct OracleStepOutcome {
    active: Vec<bool>,
    predictive: Vec<bool>,
    bursting_columns: usize,
    segments_reinforced: usize,
    segments_grown: usize,
    evictions: usize,
}

impl OracleCase {
    fn cell_index(&self, column: usize, cell: usize) -> usize {
        column * self.cells_per_column + cell
    }

    fn cell_count(&self) -> usize {
        self.columns * self.cells_per_column
    }

    /// Column overlap: connected proximal synapses onto active input bits,
    /// zeroed below the cutoff.
    fn overlaps(&self) -> Vec<u32> {
        (0..self.columns)
            .map(|c| {
                let mut raw = 0u32;
                for (b, &bit) in self.input_bits.iter().enumerate() {
                    if bit && self.proximal[c * self.input_width + b] >= self.threshold {
                        raw += 1;
                    }
                }
                if raw >= self.min_overlap {
                    raw
                } else {
                    0
                }
            })
            .collect()
    }

    /// k-winner inhibition: strictly positive scores only, ties to the lower
    /// column, result ascending.
    fn winners(&self, overlaps: &[u32]) -> Vec<usize> {
        let mut ranked: Vec<(usize, u32)> = overlaps
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, s)| s > 0)
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut winners: Vec<usize> = ranked
            .into_iter()
            .take(self.desired_activity)
            .map(|(c, _)| c)
            .collect();
        winners.sort_unstable();
        winners
    }

    fn segment_overlap(&self, segment: &OracleSegment, grid: &[bool]) -> usize {
        segment
            .synapses
            .iter()
            .filter(|((col, cell), p)| *p >= self.threshold && grid[self.cell_index(*col, *cell)])
            .count()
    }

    /// One full step: activation, reinforcement, growth, prediction.
    fn step(&mut self, winners: &[usize]) -> OracleStepOutcome {
        let n = self.cell_count();

        // Active state: a winning column activates its previously-predictive
        // cells, or every cell when it had none.
        let mut active = vec![false; n];
        let mut bursting: Vec<usize> = Vec::new();
        for &column in winners {
            let base = self.cell_index(column, 0);
            let predicted: Vec<usize> = (0..self.cells_per_column)
                .filter(|i| self.prev_predictive[base + i])
                .collect();
            if predicted.is_empty() {
                bursting.push(column);
                for i in 0..self.cells_per_column {
                    active[base + i] = true;
                }
            } else {
                for i in predicted {
                    active[base + i] = true;
                }
            }
        }

        // Reinforce segments that predicted correctly: cells active now and
        // predictive a step ago, segments whose connected overlap with the
        // previous activity strictly exceeded the threshold. The update is
        // `d + p_plus * (d * indicator) - p_minus * d`, clamped to [0, 1].
        let mut segments_reinforced = 0;
        for column in 0..self.columns {
            for cell in 0..self.cells_per_column {
                let idx = self.cell_index(column, cell);
                if !(active[idx] && self.prev_predictive[idx]) {
                    continue;
                }
                let reinforce: Vec<usize> = (0..self.segments[idx].len())
                    .filter(|&s| {
                        self.segment_overlap(&self.segments[idx][s], &self.prev_active) > self.theta
                    })
                    .collect();
                for s in reinforce {
                    segments_reinforced += 1;
                    for ((pcol, pcell), d) in self.segments[idx][s].synapses.iter_mut() {
                        let indicator = if self.prev_active[*pcol * self.cells_per_column + *pcell]
                        {
                            1.0
                        } else {
                            0.0
                        };
                        *d = (*d + self.p_plus * (*d * indicator) - self.p_minus * *d)
                            .clamp(0.0, 1.0);
                    }
                }
            }
        }

        // Growth sample: previous winner cells first, then other previously
        // active cells in (column, cell) order, up to theta + 1 of them.
        let budget = self.theta + 1;
        let mut sample: Vec<(usize, usize)> = self.prev_winners.clone();
        sample.sort_unstable();
        sample.dedup();
        if sample.len() < budget {
            for column in 0..self.columns {
                for cell in 0..self.cells_per_column {
                    if sample.len() >= budget {
                        break;
                    }
                    if self.prev_active[self.cell_index(column, cell)]
                        && !sample.contains(&(column, cell))
                    {
                        sample.push((column, cell));
                    }
                }
            }
            sample.sort_unstable();
        }
        sample.truncate(budget);

        // Every bursting column grows one segment on its winner cell: the
        // cell whose best existing segment overlaps the previous activity
        // most, ties toward the lowest cell. Oldest segment evicted at the
        // budget.
        let mut segments_grown = 0;
        let mut evictions = 0;
        if !sample.is_empty() {
            for &column in &bursting {
                let mut winner = 0usize;
                let mut best = 0usize;
                for cell in 0..self.cells_per_column {
                    let idx = self.cell_index(column, cell);
                    let overlap = self.segments[idx]
                        .iter()
                        .map(|s| self.segment_overlap(s, &self.prev_active))
                        .max()
                        .unwrap_or(0);
                    if overlap > best {
                        best = overlap;
                        winner = cell;
                    }
                }
                let idx = self.cell_index(column, winner);
                if self.segments[idx].len() == self.max_segments {
                    self.segments[idx].remove(0);
                    evictions += 1;
                }
                self.segments[idx].push(OracleSegment {
                    synapses: sample
                        .iter()
                        .map(|&c| (c, self.initial_permanence))
                        .collect(),
                });
                segments_grown += 1;
            }
        }

        // Predictive state: a cell fires iff one of its segments has strictly
        // more than theta connected synapses onto the cells active now.
        let predictive: Vec<bool> = (0..n)
            .map(|idx| {
                self.segments[idx]
                    .iter()
                    .any(|s| self.segment_overlap(s, &active) > self.theta)
            })
            .collect();

        let outcome = OracleStepOutcome {
            active,
            predictive: predictive.clone(),
            bursting_columns: bursting.len(),
            segments_reinforced,
            segments_grown,
            evictions,
        };
        self.prev_active = outcome.active.clone();
        self.prev_predictive = predictive;
        outcome
    }
}

fn random_case(rng: &mut ChaCha8Rng) -> OracleCase {
    let columns = rng.random_range(1..=4);
    let cells_per_column = rng.random_range(1..=2);
    let input_width = rng.random_range(1..=6);
    let threshold = rng.random_range(0.1..=0.6);
    let theta = rng.random_range(0..=2);
    let max_segments = 2;
    let n = columns * cells_per_column;

    let mut segments: Vec<Vec<OracleSegment>> = vec![Vec::new(); n];
    for seg_list in segments.iter_mut() {
        for _ in 0..rng.random_range(0..=max_segments) {
            let mut targets: Vec<usize> = (0..n).collect();
            targets.shuffle(rng);
            targets.truncate(rng.random_range(1..=3.min(n)));
            targets.sort_unstable();
            seg_list.push(OracleSegment {
                synapses: targets
                    .iter()
                    .map(|&t| {
                        (
                            (t / cells_per_column, t % cells_per_column),
                            rng.random_range(0.0..=1.0),
                        )
                    })
                    .collect(),
            });
        }
    }

    let prev_active: Vec<bool> = (0..n).map(|_| rng.random_bool(0.45)).collect();
    let prev_predictive: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
    let prev_winners: Vec<(usize, usize)> = (0..n)
        .filter(|&i| prev_active[i] && rng.random_bool(0.5))
        .map(|i| (i / cells_per_column, i % cells_per_column))
        .collect();

    OracleCase {
        columns,
        cells_per_column,
        input_width,
        threshold,
        theta,
        max_segments,
        p_plus: rng.random_range(0.01..=0.5),
        p_minus: rng.random_range(0.01..=0.5),
        initial_permanence: (threshold + rng.random_range(0.01..=0.2)).min(1.0),
        proximal: (0..columns * input_width)
            .map(|_| rng.random_range(0.0..=1.0))
            .collect(),
        min_overlap: rng.random_range(0..=3),
        desired_activity: rng.random_range(1..=columns),
        input_bits: (0..input_width).map(|_| rng.random_bool(0.5)).collect(),
        segments,
        prev_active,
        prev_predictive,
        prev_winners,
    }
}

/// Builds the library-side temporal memory carrying exactly the case's
/// segments, via the store's versioned JSON document.
fn library_memory(case: &OracleCase) -> TemporalMemory {
    let mut cells = Vec::new();
    for column in 0..case.columns {
        for cell in 0..case.cells_per_column {
            let idx = case.cell_index(column, cell);
            if case.segments[idx].is_empty() {
                continue;
            }
            let segments: Vec<Vec<serde_json::Value>> = case.segments[idx]
                .iter()
                .map(|s| {
                    s.synapses
                        .iter()
                        .map(|((pc, pi), p)| {
                            serde_json::json!({"column": pc, "cell": pi, "permanence": p})
                        })
                        .collect()
                })
                .collect();
            cells.push(serde_json::json!({
                "column": column,
                "cell": cell,
                "segments": segments,
            }));
        }
    }
    let doc = serde_json::json!({
        "version": 1,
        "columns": case.columns,
        "cells_per_column": case.cells_per_column,
        "connect_threshold": case.threshold,
        "activation_threshold": case.theta,
        "max_segments_per_cell": case.max_segments,
        "evictions": 0,
        "cells": cells,
    });
    let store = SegmentStore::from_json(&doc.to_string()).expect("case store is well-formed");
    let topology = NetworkTopology {
        columns: case.columns,
        cells_per_column: case.cells_per_column,
        input_width: case.input_width,
    };
    let params = TemporalParams {
        learning: LearningParams {
            p_plus: case.p_plus,
            p_minus: case.p_minus,
        },
        rule: LearningRule::Multiplicative,
        initial_permanence: case.initial_permanence,
    };
    let mut tm = TemporalMemory::from_store(store, topology, params);

    let mut prev_active = CellGrid::new(case.columns, case.cells_per_column);
    let mut prev_predictive = CellGrid::new(case.columns, case.cells_per_column);
    for column in 0..case.columns {
        for cell in 0..case.cells_per_column {
            let idx = case.cell_index(column, cell);
            prev_active.set(CellId::new(column, cell), case.prev_active[idx]);
            prev_predictive.set(CellId::new(column, cell), case.prev_predictive[idx]);
        }
    }
    let winners: Vec<CellId> = case
        .prev_winners
        .iter()
        .map(|&(c, i)| CellId::new(c, i))
        .collect();
    tm.set_context(prev_active, prev_predictive, winners)
        .expect("context fits the network");
    tm
}

fn grid_as_dense(grid: &CellGrid) -> Vec<bool> {
    let mut out = Vec::with_capacity(grid.columns() * grid.cells_per_column());
    for column in 0..grid.columns() {
        for cell in 0..grid.cells_per_column() {
            out.push(grid.get(CellId::new(column, cell)));
        }
    }
    out
}

#[test]
fn criterion_1_step_equations_match_an_independent_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    for case_no in 0..ORACLE_CASES {
        let mut case = random_case(&mut rng);

        // Spatial side: overlaps and winner selection.
        let input = Sdr::from_dense(&case.input_bits);
        let perms = ProximalPermanences::from_matrix(
            case.proximal.clone(),
            case.columns,
            case.input_width,
            case.threshold,
        )
        .expect("case matrix is well-formed");
        let overlaps = column_overlaps(&input, &perms, case.min_overlap).unwrap();
        assert_eq!(
            overlaps,
            case.overlaps(),
            "overlap mismatch in case {case_no}"
        );
        let inh = inhibit(&overlaps, case.desired_activity).unwrap();
        assert_eq!(
            inh.winners,
            case.winners(&overlaps),
            "winner mismatch in case {case_no}"
        );

        // Temporal side: one full step against the entrywise evaluator.
        let mut tm = library_memory(&case);
        let stats = tm.step(&inh.winners, true).expect("step succeeds");
        let expected = case.step(&inh.winners);
        assert_eq!(
            grid_as_dense(tm.active()),
            expected.active,
            "active-state mismatch in case {case_no}"
        );
        assert_eq!(
            grid_as_dense(tm.predictive()),
            expected.predictive,
            "predictive-state mismatch in case {case_no}"
        );
        assert_eq!(
            stats.bursting_columns, expected.bursting_columns,
            "case {case_no}"
        );
        assert_eq!(
            stats.segments_reinforced, expected.segments_reinforced,
            "case {case_no}"
        );
        assert_eq!(
            stats.segments_grown, expected.segments_grown,
            "case {case_no}"
        );
        assert_eq!(stats.evictions, expected.evictions, "case {case_no}");

        // Permanences must agree exactly, synapse by synapse.
        for column in 0..case.columns {
            for cell in 0..case.cells_per_column {
                let idx = case.cell_index(column, cell);
                let lib = tm.store().segments_for(CellId::new(column, cell));
                assert_eq!(lib.len(), case.segments[idx].len(), "case {case_no}");
                for (seg, expected_seg) in lib.iter().zip(&case.segments[idx]) {
                    let lib_syn: Vec<((usize, usize), f64)> = seg
                        .synapses()
                        .iter()
                        .map(|(c, p)| ((c.column, c.cell), *p))
                        .collect();
                    assert_eq!(lib_syn, expected_seg.synapses, "case {case_no}");
                }
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < ORACLE_LIMIT,
        "oracle sweep took {elapsed:?}, limit {ORACLE_LIMIT:?}"
    );
    println!(
        "criterion 1 (step equations match an independent oracle, {ORACLE_CASES} cases): \
         PASS in {elapsed:?}"
    );
}

#[test]
fn criterion_2_times_table_completes_the_masked_exemplar() {
    let started = Instant::now();
    let config = ExperimentConfig {
        data: "times".into(),
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&config).expect("times run succeeds");
    let last = report.predictions.last().expect("at least one prediction");
    assert_eq!(last.text, "2 3 6", "masked exemplar completion");
    assert!(
        last.accepted,
        "the completion must clear the acceptance bar"
    );
    let elapsed = started.elapsed();
    assert!(
        elapsed < TIMES_LIMIT,
        "times run took {elapsed:?}, limit {TIMES_LIMIT:?}"
    );
    println!(
        "criterion 2 (times-table masked exemplar completes to \"2 3 6\"): PASS in {elapsed:?}"
    );
}

#[test]
fn criterion_3_word_fixtures_complete_with_the_expected_prefixes() {
    let started = Instant::now();
    for (toy, prefix) in [("word3b", "Foot"), ("word3c", "Video")] {
        let config = ExperimentConfig {
            data: toy.into(),
            ..ExperimentConfig::default()
        };
        let report = run_experiment(&config).expect("word run succeeds");
        let accepted = report
            .predictions
            .iter()
            .find(|p| p.accepted)
            .unwrap_or_else(|| panic!("{toy}: no accepted prediction"));
        assert!(
            accepted.text.starts_with(prefix),
            "{toy}: expected a completion starting with {prefix:?}, got {:?}",
            accepted.text
        );
    }
    let elapsed = started.elapsed();
    println!("criterion 3 (word fixtures complete with \"Foot\"/\"Video\"): PASS in {elapsed:?}");
}

#[test]
fn criterion_4_periodic_binary_labels_recover_exactly() {
    let started = Instant::now();
    let config = ExperimentConfig {
        data: "periodic".into(),
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&config).expect("periodic run succeeds");
    let rmse = report
        .metrics
        .rmse_labels
        .expect("periodic data is labeled");
    assert!(rmse <= 1e-12, "label RMSE {rmse} above the 1e-12 bar");
    let elapsed = started.elapsed();
    assert!(
        elapsed < PERIODIC_LIMIT,
        "periodic run took {elapsed:?}, limit {PERIODIC_LIMIT:?}"
    );
    println!("criterion 4 (periodic-binary label RMSE <= 1e-12): PASS in {elapsed:?}");
}

#[test]
fn criterion_5_benchmark_runs_beat_the_baseline_and_render_references() {
    // The published benchmark numbers are not exactly reproducible from the
    // outside (unstated preprocessing, unseeded search, unpublished rates),
    // so the substitute properties are: beat the majority-class baseline on
    // every fixed seed, keep the best-so-far search curve non-increasing,
    // and render the reference values alongside the measured ones. With
    // `HTM_DATA_DIR` set, the same toys load the real benchmark CSVs.
    let suite_started = Instant::now();
    let mut reports = Vec::new();
    for dataset in ["heart_surrogate", "australian_surrogate"] {
        let started = Instant::now();
        for seed in BENCHMARK_SEEDS {
            let config = ExperimentConfig {
                data: dataset.into(),
                seed,
                ..ExperimentConfig::default()
            };
            let report = run_experiment(&config).expect("benchmark run succeeds");

            let rmse = report
                .metrics
                .rmse_labels
                .expect("benchmark data is labeled");
            let baseline = report
                .baseline
                .as_ref()
                .expect("labeled runs carry a baseline");
            assert!(
                rmse < baseline.rmse,
                "{dataset} seed {seed}: rmse {rmse} not below baseline {}",
                baseline.rmse
            );

            assert_eq!(
                report.pooling.curve.len(),
                50,
                "default search runs 50 trials"
            );
            let mut best_so_far = f64::INFINITY;
            let mut previous = f64::INFINITY;
            for &mape in &report.pooling.curve {
                best_so_far = best_so_far.min(mape);
                assert!(best_so_far <= previous, "best-so-far curve increased");
                previous = best_so_far;
            }
            assert_eq!(best_so_far, report.pooling.best_mape);

            if seed == 42 {
                reports.push(report);
            }
        }
        let elapsed = started.elapsed();
        assert!(
            elapsed < BENCHMARK_LIMIT_PER_DATASET,
            "{dataset} took {elapsed:?}, limit {BENCHMARK_LIMIT_PER_DATASET:?}"
        );
    }

    let comparison = build_comparison(&reports).expect("comparison builds");
    for reference in ["0.2582", "0.0381", "1.5275", "0.7164", "1.5816", "0.8249"] {
        assert!(
            comparison.markdown.contains(reference),
            "comparison table must carry the reference value {reference}"
        );
    }
    println!(
        "criterion 5 (benchmarks beat the baseline on {} fixed seeds, curve non-increasing, \
         references rendered): PASS in {:?}",
        BENCHMARK_SEEDS.len(),
        suite_started.elapsed()
    );
}

#[test]
fn criterion_6_sdr_and_pooler_property_sweep() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);

    for case_no in 0..PROPERTY_CASES {
        // SDR overlap: symmetric, bounded by both active counts, and exact on
        // self-overlap.
        let width = rng.random_range(1..=64);
        let a = Sdr::from_dense(&(0..width).map(|_| rng.random_bool(0.3)).collect::<Vec<_>>());
        let b = Sdr::from_dense(&(0..width).map(|_| rng.random_bool(0.3)).collect::<Vec<_>>());
        let ab = a.overlap(&b).unwrap();
        assert_eq!(
            ab,
            b.overlap(&a).unwrap(),
            "overlap asymmetric in case {case_no}"
        );
        assert!(
            ab <= a.active_count().min(b.active_count()),
            "overlap bound in case {case_no}"
        );
        assert_eq!(
            a.overlap(&a).unwrap(),
            a.active_count(),
            "self-overlap in case {case_no}"
        );

        // Winner selection: never more than desired, never below the cutoff,
        // never weaker than a losing column.
        let columns = rng.random_range(1..=16);
        let min_overlap = rng.random_range(0..=4u32);
        let raw: Vec<u32> = (0..columns).map(|_| rng.random_range(0..=8)).collect();
        let cut: Vec<u32> = raw
            .iter()
            .map(|&r| if r >= min_overlap { r } else { 0 })
            .collect();
        let desired = rng.random_range(1..=columns);
        let inh = inhibit(&cut, desired).unwrap();
        assert!(
            inh.winners.len() <= desired,
            "too many winners in case {case_no}"
        );
        let min_winner = inh.winners.iter().map(|&c| cut[c]).min();
        for &c in &inh.winners {
            assert!(
                raw[c] >= min_overlap,
                "winner below min_overlap in case {case_no}"
            );
            assert!(cut[c] > 0, "zero-overlap winner in case {case_no}");
        }
        if inh.winners.len() < desired {
            // Underfull winner sets mean every losing column scored zero.
            for (c, &score) in cut.iter().enumerate() {
                if !inh.winners.contains(&c) {
                    assert_eq!(
                        score, 0,
                        "case {case_no}: loser {c} outscored an empty slot"
                    );
                }
            }
        } else if let Some(min_winner) = min_winner {
            for (c, &score) in cut.iter().enumerate() {
                if !inh.winners.contains(&c) {
                    assert!(
                        score <= min_winner,
                        "case {case_no}: loser {c} outscored a winner"
                    );
                }
            }
        }
    }

    // Permanence clamping: random learn steps over random stores, with rates
    // spanning the full legal range, never push a permanence out of [0, 1].
    let mut learn_steps = 0usize;
    for _ in 0..10 {
        let mut case = random_case(&mut rng);
        // Reuse the case's segments through the library store.
        let tm = library_memory(&case);
        let mut store = tm.store().clone();
        let mut owners: Vec<(CellId, usize)> = Vec::new();
        for column in 0..case.columns {
            for cell in 0..case.cells_per_column {
                let id = CellId::new(column, cell);
                for s in 0..store.segments_for(id).len() {
                    owners.push((id, s));
                }
            }
        }
        if owners.is_empty() {
            case.segments[0].push(OracleSegment {
                synapses: vec![((0, 0), 0.5)],
            });
            let tm = library_memory(&case);
            store = tm.store().clone();
            owners.push((CellId::new(0, 0), 0));
        }
        for _ in 0..100 {
            let reinforced: Vec<(CellId, usize)> = owners
                .iter()
                .filter(|_| rng.random_bool(0.5))
                .copied()
                .collect();
            let mut grid = CellGrid::new(case.columns, case.cells_per_column);
            for column in 0..case.columns {
                for cell in 0..case.cells_per_column {
                    grid.set(CellId::new(column, cell), rng.random_bool(0.5));
                }
            }
            let params = LearningParams {
                p_plus: rng.random_range(0.001..=1.0),
                p_minus: rng.random_range(0.0..=1.0),
            };
            let rule = if rng.random_bool(0.5) {
                LearningRule::Multiplicative
            } else {
                LearningRule::Additive
            };
            store.learn(&reinforced, &grid, params, rule).unwrap();
            learn_steps += 1;
            for column in 0..case.columns {
                for cell in 0..case.cells_per_column {
                    for segment in store.segments_for(CellId::new(column, cell)) {
                        for (_, p) in segment.synapses() {
                            assert!(
                                (0.0..=1.0).contains(p),
                                "permanence {p} escaped [0, 1] after {learn_steps} learn steps"
                            );
                        }
                    }
                }
            }
        }
    }
    assert!(
        learn_steps >= 1000,
        "the clamp property needs at least 1000 learn steps"
    );

    let elapsed = started.elapsed();
    assert!(
        elapsed < PROPERTY_LIMIT,
        "property sweep took {elapsed:?}, limit {PROPERTY_LIMIT:?}"
    );
    println!(
        "criterion 6 (SDR/pooler property sweep, {PROPERTY_CASES} cases + {learn_steps} learn \
         steps): PASS in {elapsed:?}"
    );
}

#[test]
fn criterion_7_cyclic_sequences_are_mastered_after_twenty_cycles() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    const COLUMNS: usize = 16;
    const TRAINING_CYCLES: usize = 20;

    for sequence_no in 0..MASTERY_SEQUENCES {
        // A cyclic sequence over up to 8 distinct symbols, each grounded as
        // its own pair of columns.
        let length = rng.random_range(1..=8);
        let mut all_columns: Vec<usize> = (0..COLUMNS).collect();
        all_columns.shuffle(&mut rng);
        let symbol_columns: Vec<Vec<usize>> = (0..length)
            .map(|s| {
                let mut pair = vec![all_columns[2 * s], all_columns[2 * s + 1]];
                pair.sort_unstable();
                pair
            })
            .collect();

        let topology = NetworkTopology {
            columns: COLUMNS,
            cells_per_column: 4,
            input_width: COLUMNS,
        };
        let params = TemporalParams {
            learning: LearningParams {
                p_plus: 0.1,
                p_minus: 0.02,
            },
            rule: LearningRule::Multiplicative,
            initial_permanence: 0.22,
        };
        let mut tm = TemporalMemory::new(topology, 0.21, 1, 32, params).unwrap();

        for _ in 0..TRAINING_CYCLES {
            for grounding in &symbol_columns {
                tm.step(grounding, true).unwrap();
            }
        }

        // One measured cycle: every step must be predicted exactly (so no
        // bursting) before it happens.
        for (symbol, grounding) in symbol_columns.iter().enumerate() {
            assert_eq!(
                &tm.predicted_columns(),
                grounding,
                "sequence {sequence_no}: symbol {symbol} not predicted exactly"
            );
            let stats = tm.step(grounding, true).unwrap();
            assert_eq!(
                stats.bursting_columns, 0,
                "sequence {sequence_no}: bursting after training"
            );
        }
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed < MASTERY_LIMIT,
        "mastery sweep took {elapsed:?}, limit {MASTERY_LIMIT:?}"
    );
    println!(
        "criterion 7 (100 random cyclic sequences mastered: zero bursting, exact next-symbol \
         prediction): PASS in {elapsed:?}"
    );
}

#[test]
fn criterion_8_artifacts_are_byte_identical_across_reruns() {
    let started = Instant::now();
    let dir = tempfile::tempdir().expect("temp dir");

    for (toy, scoring) in [
        ("times", ScoringMode::Integer),
        ("periodic", ScoringMode::Integer),
        ("times", ScoringMode::Sdr),
    ] {
        let config = ExperimentConfig {
            data: toy.into(),
            scoring,
            ..ExperimentConfig::default()
        };

        let mut artifact_sets = Vec::new();
        for run in 0..2 {
            let report = run_experiment(&config).expect("run succeeds");
            let tag = format!("{toy}-{scoring:?}-{run}");
            let report_path = dir.path().join(format!("report-{tag}.json"));
            let curve_path = dir.path().join(format!("curve-{tag}.csv"));
            let pred_path = dir.path().join(format!("predictions-{tag}.csv"));
            std::fs::write(&report_path, report.to_json().unwrap()).unwrap();
            std::fs::write(&curve_path, report.curve_csv()).unwrap();
            std::fs::write(&pred_path, report.predictions_csv()).unwrap();
            artifact_sets.push((
                std::fs::read_to_string(&report_path).unwrap(),
                std::fs::read(&curve_path).unwrap(),
                std::fs::read(&pred_path).unwrap(),
            ));
        }

        let (report_a, curve_a, pred_a) = &artifact_sets[0];
        let (report_b, curve_b, pred_b) = &artifact_sets[1];
        assert!(
            report_a.contains("wall_clock_ms"),
            "reports time themselves"
        );
        assert_eq!(
            strip_volatile(report_a),
            strip_volatile(report_b),
            "{toy}: report files differ beyond the timestamp field"
        );
        assert_eq!(curve_a, curve_b, "{toy}: curve files differ");
        assert_eq!(pred_a, pred_b, "{toy}: prediction files differ");
    }

    let elapsed = started.elapsed();
    println!("criterion 8 (rerun artifacts byte-identical modulo timestamp): PASS in {elapsed:?}");
}
