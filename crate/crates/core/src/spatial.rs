//! Spatial pooler: proximal permanences, overlap scoring, k-winner
//! inhibition, and the Monte Carlo search that evolves a pooling matrix.
//!
//! Columns compete over encoded input rows. A column's overlap is the number
//! of its connected synapses (permanence at or above the threshold) that meet
//! active input bits; overlaps below `min_overlap` are cut to zero, and the
//! `desired_activity` best columns win. Because a random permanence matrix
//! can pool anywhere from badly to well, [`evolve_sdr`] runs many independent
//! trials with fresh random matrices, scores each by how well the winning
//! columns reconstruct the input, and keeps the best.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::encoder::RowEncoder;
use crate::error::{HtmError, Result};
use crate::metrics;
use crate::sdr::{top_k, Sdr};

/// Shape of the network: pooler columns, cells per column (used by the
/// temporal stage), and the encoded input width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkTopology {
    pub columns: usize,
    pub cells_per_column: usize,
    pub input_width: usize,
}

impl NetworkTopology {
    pub fn validate(&self) -> Result<()> {
        if self.columns == 0 {
            return Err(HtmError::config("columns", "must be at least 1"));
        }
        if self.cells_per_column == 0 {
            return Err(HtmError::config("cells_per_column", "must be at least 1"));
        }
        if self.input_width == 0 {
            return Err(HtmError::config("input_width", "must be at least 1"));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.columns * self.cells_per_column
    }
}

/// Dense matrix of proximal permanences (columns x input bits) plus a cached
/// bitmask of connected synapses per column for fast overlap counting.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximalPermanences {
    columns: usize,
    input_width: usize,
    connect_threshold: f64,
    matrix: Vec<f64>,
    connected: Vec<u64>,
    words_per_column: usize,
}

impl ProximalPermanences {
    /// Samples a fresh random matrix: each synapse is in the column's
    /// potential pool with probability `potential_fraction` and then gets a
    /// uniform permanence in `[0, 1)`; synapses outside the pool stay at 0.
    /// The draw order (row-major, potential before permanence) is fixed so a
    /// seed pins the matrix bit for bit.
    pub fn sample(
        columns: usize,
        input_width: usize,
        connect_threshold: f64,
        potential_fraction: f64,
        rng: &mut ChaCha8Rng,
    ) -> ProximalPermanences {
        let mut matrix = vec![0.0f64; columns * input_width];
        for value in matrix.iter_mut() {
            if rng.random::<f64>() < potential_fraction {
                *value = rng.random::<f64>();
            }
        }
        Self::from_matrix(matrix, columns, input_width, connect_threshold)
            .expect("sampled matrix has the declared shape")
    }

    /// Wraps an explicit matrix (row-major, `columns * input_width`).
    pub fn from_matrix(
        matrix: Vec<f64>,
        columns: usize,
        input_width: usize,
        connect_threshold: f64,
    ) -> Result<ProximalPermanences> {
        if matrix.len() != columns * input_width {
            return Err(HtmError::Data(format!(
                "permanence matrix has {} entries, expected {} x {}",
                matrix.len(),
                columns,
                input_width
            )));
        }
        let words_per_column = input_width.div_ceil(64).max(1);
        let mut perms = ProximalPermanences {
            columns,
            input_width,
            connect_threshold,
            matrix,
            connected: vec![0u64; columns * words_per_column],
            words_per_column,
        };
        perms.rebuild_connected();
        Ok(perms)
    }

    fn rebuild_connected(&mut self) {
        self.connected.fill(0);
        for c in 0..self.columns {
            let row = &self.matrix[c * self.input_width..(c + 1) * self.input_width];
            let mask =
                &mut self.connected[c * self.words_per_column..(c + 1) * self.words_per_column];
            for (i, &p) in row.iter().enumerate() {
                if p >= self.connect_threshold {
                    mask[i / 64] |= 1u64 << (i % 64);
                }
            }
        }
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn connect_threshold(&self) -> f64 {
        self.connect_threshold
    }

    pub fn permanence(&self, column: usize, bit: usize) -> f64 {
        self.matrix[column * self.input_width + bit]
    }

    /// Whether the synapse from `bit` to `column` is connected
    /// (permanence >= threshold).
    pub fn is_connected(&self, column: usize, bit: usize) -> bool {
        self.permanence(column, bit) >= self.connect_threshold
    }

    fn connected_mask(&self, column: usize) -> &[u64] {
        &self.connected[column * self.words_per_column..(column + 1) * self.words_per_column]
    }

    fn overlap_with_mask(&self, column: usize, input_mask: &[u64]) -> u32 {
        self.connected_mask(column)
            .iter()
            .zip(input_mask)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    /// Per-input-bit support: for each bit, how many of the given columns
    /// have a connected synapse onto it. This is the reconstruction signal.
    pub fn input_support(&self, columns: &[usize]) -> Vec<u32> {
        let mut support = vec![0u32; self.input_width];
        for &c in columns {
            let mask = self.connected_mask(c);
            for (w, &word) in mask.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let i = w * 64 + bits.trailing_zeros() as usize;
                    support[i] += 1;
                    bits &= bits - 1;
                }
            }
        }
        support
    }
}

/// Overlap of every column against one encoded input, with the `min_overlap`
/// cutoff applied: a column whose raw overlap falls below the cutoff scores 0.
pub fn column_overlaps(
    input: &Sdr,
    perms: &ProximalPermanences,
    min_overlap: u32,
) -> Result<Vec<u32>> {
    if input.width() != perms.input_width {
        return Err(HtmError::WidthMismatch {
            left: input.width(),
            right: perms.input_width,
        });
    }
    let mask = input.to_words();
    Ok((0..perms.columns)
        .map(|c| {
            let raw = perms.overlap_with_mask(c, &mask);
            if raw >= min_overlap {
                raw
            } else {
                0
            }
        })
        .collect())
}

/// Winning columns for one input, plus the post-cutoff overlap scores they
/// were chosen from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InhibitionResult {
    /// Winning column indices, sorted ascending.
    pub winners: Vec<usize>,
    /// Post-cutoff overlap per column.
    pub overlaps: Vec<u32>,
}

impl InhibitionResult {
    /// Winner set as an SDR over the columns.
    pub fn winner_sdr(&self) -> Sdr {
        Sdr::new(self.overlaps.len(), self.winners.clone()).expect("winners are column indices")
    }

    /// Smallest overlap among the winners (0 when nothing won).
    pub fn min_winning_overlap(&self) -> u32 {
        self.winners
            .iter()
            .map(|&c| self.overlaps[c])
            .min()
            .unwrap_or(0)
    }
}

/// Global k-winner inhibition over post-cutoff overlap scores. At most
/// `desired_activity` columns win; columns with zero overlap never win, so
/// fewer can come back when few columns clear the cutoff.
pub fn inhibit(overlaps: &[u32], desired_activity: usize) -> Result<InhibitionResult> {
    if desired_activity == 0 {
        return Err(HtmError::config("desired_activity", "must be at least 1"));
    }
    let scores: Vec<(usize, f64)> = overlaps
        .iter()
        .enumerate()
        .map(|(i, &s)| (i, s as f64))
        .collect();
    let winners = top_k(&scores, desired_activity)?;
    Ok(InhibitionResult {
        winners,
        overlaps: overlaps.to_vec(),
    })
}

/// Parameters of the Monte Carlo pooling search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveParams {
    /// Number of independent random-matrix trials.
    pub iters: usize,
    /// Overlap cutoff below which a column scores 0.
    pub min_overlap: u32,
    /// Winners kept per input row.
    pub desired_activity: usize,
    /// Permanence level at which a synapse counts as connected.
    pub connect_threshold: f64,
    /// Probability that a synapse is in a column's potential pool.
    pub potential_fraction: f64,
    /// Pooler columns.
    pub columns: usize,
}

impl EvolveParams {
    pub fn validate(&self) -> Result<()> {
        if self.iters == 0 {
            return Err(HtmError::config("iters", "must be at least 1"));
        }
        if self.desired_activity == 0 {
            return Err(HtmError::config("desired_activity", "must be at least 1"));
        }
        if self.columns == 0 {
            return Err(HtmError::config("columns", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.connect_threshold) {
            return Err(HtmError::config("perms_th", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.potential_fraction) || self.potential_fraction == 0.0 {
            return Err(HtmError::config("potential_fraction", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Trace of one Monte Carlo search: the reconstruction error of every trial
/// and which trial won.
#[derive(Debug, Clone)]
pub struct McTrace {
    /// Reconstruction MAPE (percent) per trial, in trial order.
    pub mape: Vec<f64>,
    /// Index of the winning (lowest-MAPE) trial; ties go to the earlier one.
    pub best_iteration: usize,
    /// MAPE of the winning trial.
    pub best_mape: f64,
    /// Permanence matrix of the winning trial.
    pub best_permanences: ProximalPermanences,
}

impl McTrace {
    /// Best-so-far curve: entry `i` is the lowest MAPE among trials `0..=i`.
    pub fn running_min(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.mape
            .iter()
            .map(|&m| {
                best = best.min(m);
                best
            })
            .collect()
    }
}

/// Derives the RNG seed of one trial from the master seed (splitmix64-style
/// mixing, so trials are decorrelated but fully determined by the master).
fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut z = master ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_trial(
    params: &EvolveParams,
    input_width: usize,
    master_seed: u64,
    trial: usize,
) -> ProximalPermanences {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(master_seed, trial));
    ProximalPermanences::sample(
        params.columns,
        input_width,
        params.connect_threshold,
        params.potential_fraction,
        &mut rng,
    )
}

/// Pools every row through one permanence matrix.
pub fn pool_rows(
    rows: &[Vec<i64>],
    encoder: &RowEncoder,
    perms: &ProximalPermanences,
    min_overlap: u32,
    desired_activity: usize,
) -> Result<Vec<InhibitionResult>> {
    rows.iter()
        .map(|row| {
            let sdr = encoder.encode_row(row)?;
            let overlaps = column_overlaps(&sdr, perms, min_overlap)?;
            inhibit(&overlaps, desired_activity)
        })
        .collect()
}

/// Decodes each row's winner set back to integer codes: every winning
/// column votes for the input bits it is connected to, and the encoder picks
/// the best-supported code per column slot.
pub fn reconstruct_rows(
    results: &[InhibitionResult],
    perms: &ProximalPermanences,
    encoder: &RowEncoder,
) -> Result<Vec<Vec<i64>>> {
    results
        .iter()
        .map(|r| encoder.decode_support(&perms.input_support(&r.winners)))
        .collect()
}

/// Monte Carlo pooling search: `iters` independent trials, each with a fresh
/// seeded random permanence matrix, scored by the MAPE between the original
/// rows and their reconstructions from the winning columns. Returns the trace
/// plus the winning matrix's pooled rows. Deterministic in `(rows, params,
/// seed)`.
pub fn evolve_sdr(
    rows: &[Vec<i64>],
    encoder: &RowEncoder,
    params: &EvolveParams,
    seed: u64,
) -> Result<(McTrace, Vec<InhibitionResult>)> {
    params.validate()?;
    if rows.is_empty() {
        return Err(HtmError::Data("nothing to pool: no rows".into()));
    }

    // Encoding does not depend on the trial, so do it once.
    let encoded: Vec<Sdr> = rows
        .iter()
        .map(|r| encoder.encode_row(r))
        .collect::<Result<Vec<_>>>()?;
    let masks: Vec<Vec<u64>> = encoded.iter().map(Sdr::to_words).collect();
    let truth: Vec<f64> = rows.iter().flatten().map(|&v| v as f64).collect();

    let mut curve = Vec::with_capacity(params.iters);
    let mut best: Option<(usize, f64)> = None;
    for trial in 0..params.iters {
        let perms = sample_trial(params, encoder.width(), seed, trial);
        let mut predicted = Vec::with_capacity(truth.len());
        for mask in &masks {
            let overlaps: Vec<u32> = (0..params.columns)
                .map(|c| {
                    let raw = perms.overlap_with_mask(c, mask);
                    if raw >= params.min_overlap {
                        raw
                    } else {
                        0
                    }
                })
                .collect();
            let chosen = inhibit(&overlaps, params.desired_activity)?;
            let decoded = encoder.decode_support(&perms.input_support(&chosen.winners))?;
            predicted.extend(decoded.iter().map(|&v| v as f64));
        }
        let (mape, _) = metrics::mape(&truth, &predicted)?;
        curve.push(mape);
        if best.is_none_or(|(_, b)| mape < b) {
            best = Some((trial, mape));
        }
    }

    let (best_iteration, best_mape) = best.expect("iters >= 1 guarantees a best trial");
    // Re-derive the winning matrix from its trial seed instead of cloning
    // every candidate along the way.
    let best_permanences = sample_trial(params, encoder.width(), seed, best_iteration);
    let pooled = pool_rows(
        rows,
        encoder,
        &best_permanences,
        params.min_overlap,
        params.desired_activity,
    )?;
    let trace = McTrace {
        mape: curve,
        best_iteration,
        best_mape,
        best_permanences,
    };
    Ok((trace, pooled))
}
