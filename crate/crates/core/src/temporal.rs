//! Temporal memory: per-column cells with distal segments, stepped once per
//! pooled input.
//!
//! Three rules drive the state machine:
//!
//! * a cell becomes *predictive* when any of its segments has more than
//!   `activation_threshold` connected synapses onto currently active cells
//!   (strictly more — meeting the threshold is not enough);
//! * a winning column *activates* its previously-predictive cells, or bursts
//!   (activates every cell) when none of its cells saw the input coming;
//! * segment permanences update multiplicatively: active presynaptic cells
//!   reinforce by `p_plus` times the current permanence, everything decays by
//!   `p_minus` times the current permanence, clamped to `[0, 1]`.
//!
//! Because the multiplicative rule can never lift a zero permanence, new
//! knowledge enters only through [`SegmentStore::grow_segment`]: every
//! bursting column grows one segment on its winner cell, wired to the cells
//! that were active one step earlier. An `additive` rule variant (fixed
//! increments instead of multiplicative ones) is available for comparison.
//!
//! The whole module is RNG-free: growth samples previous winner cells in a
//! fixed order, so a training run is a pure function of its input sequence.

use serde::{Deserialize, Serialize};

use crate::error::{HtmError, Result};
use crate::spatial::NetworkTopology;

/// Address of one cell within the cell grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub column: usize,
    pub cell: usize,
}

impl CellId {
    pub fn new(column: usize, cell: usize) -> CellId {
        CellId { column, cell }
    }
}

/// Dense binary matrix over all cells (`cells_per_column` rows by `columns`
/// columns), used for the active and predictive states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellGrid {
    columns: usize,
    cells_per_column: usize,
    bits: Vec<bool>,
}

impl CellGrid {
    pub fn new(columns: usize, cells_per_column: usize) -> CellGrid {
        CellGrid {
            columns,
            cells_per_column,
            bits: vec![false; columns * cells_per_column],
        }
    }

    fn index(&self, cell: CellId) -> usize {
        debug_assert!(cell.column < self.columns && cell.cell < self.cells_per_column);
        cell.column * self.cells_per_column + cell.cell
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn cells_per_column(&self) -> usize {
        self.cells_per_column
    }

    pub fn get(&self, cell: CellId) -> bool {
        self.bits[self.index(cell)]
    }

    pub fn set(&mut self, cell: CellId, value: bool) {
        let i = self.index(cell);
        self.bits[i] = value;
    }

    /// Number of set cells in one column.
    pub fn count_in_column(&self, column: usize) -> usize {
        (0..self.cells_per_column)
            .filter(|&c| self.get(CellId::new(column, c)))
            .count()
    }

    /// All set cells, in `(column, cell)` order.
    pub fn active_cells(&self) -> Vec<CellId> {
        let mut out = Vec::new();
        for column in 0..self.columns {
            for cell in 0..self.cells_per_column {
                let id = CellId::new(column, cell);
                if self.get(id) {
                    out.push(id);
                }
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Columns with at least one set cell, ascending.
    pub fn columns_with_activity(&self) -> Vec<usize> {
        (0..self.columns)
            .filter(|&c| self.count_in_column(c) > 0)
            .collect()
    }

    fn same_shape(&self, other: &CellGrid) -> bool {
        self.columns == other.columns && self.cells_per_column == other.cells_per_column
    }
}

/// Permanence update rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningParams {
    /// Reinforcement rate for synapses onto active cells.
    pub p_plus: f64,
    /// Decay rate applied to every synapse.
    pub p_minus: f64,
}

impl LearningParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_plus) || self.p_plus == 0.0 {
            return Err(HtmError::config("p_plus", "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.p_minus) {
            return Err(HtmError::config("p_minus", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Which permanence update rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRule {
    /// Reinforcement and decay both proportional to the current permanence:
    /// `d += p_plus * (d * active) - p_minus * d`. Zero is absorbing, so new
    /// connections enter only through segment growth.
    Multiplicative,
    /// Additive: `d += p_plus` when the presynaptic cell is active, else
    /// `d -= p_minus`.
    Additive,
}

/// One distal segment: sparse synapses onto presynaptic cells. A cell pair
/// absent from the list has permanence zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    synapses: Vec<(CellId, f64)>,
}

impl Segment {
    fn new(sample: &[CellId], initial_permanence: f64) -> Segment {
        let mut cells: Vec<CellId> = sample.to_vec();
        cells.sort_unstable();
        cells.dedup();
        Segment {
            synapses: cells.into_iter().map(|c| (c, initial_permanence)).collect(),
        }
    }

    pub fn synapses(&self) -> &[(CellId, f64)] {
        &self.synapses
    }

    /// Number of connected synapses (permanence >= threshold) onto active
    /// cells.
    pub fn connected_overlap(&self, active: &CellGrid, connect_threshold: f64) -> usize {
        self.synapses
            .iter()
            .filter(|(cell, p)| *p >= connect_threshold && active.get(*cell))
            .count()
    }
}

const STORE_FORMAT_VERSION: u32 = 1;

/// All distal segments of the network, indexed by owning cell, plus the
/// activation parameters they are read with.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentStore {
    columns: usize,
    cells_per_column: usize,
    connect_threshold: f64,
    /// Strict lower bound on connected overlap for a segment to activate.
    activation_threshold: usize,
    max_segments_per_cell: usize,
    /// Segments per cell in creation order, indexed `column * M + cell`.
    segments: Vec<Vec<Segment>>,
    evictions: u64,
}

impl SegmentStore {
    pub fn new(
        columns: usize,
        cells_per_column: usize,
        connect_threshold: f64,
        activation_threshold: usize,
        max_segments_per_cell: usize,
    ) -> Result<SegmentStore> {
        if columns == 0 || cells_per_column == 0 {
            return Err(HtmError::config(
                "topology",
                "columns and cells_per_column must be at least 1",
            ));
        }
        if !(0.0..=1.0).contains(&connect_threshold) {
            return Err(HtmError::config("perms_th", "must lie in [0, 1]"));
        }
        if max_segments_per_cell == 0 {
            return Err(HtmError::config(
                "max_segments_per_cell",
                "must be at least 1",
            ));
        }
        Ok(SegmentStore {
            columns,
            cells_per_column,
            connect_threshold,
            activation_threshold,
            max_segments_per_cell,
            segments: vec![Vec::new(); columns * cells_per_column],
            evictions: 0,
        })
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn cells_per_column(&self) -> usize {
        self.cells_per_column
    }

    pub fn connect_threshold(&self) -> f64 {
        self.connect_threshold
    }

    pub fn activation_threshold(&self) -> usize {
        self.activation_threshold
    }

    pub fn max_segments_per_cell(&self) -> usize {
        self.max_segments_per_cell
    }

    /// Segments evicted so far to enforce the per-cell budget.
    pub fn evictions(&self) -> u64 {
        self.evictions
    }

    fn cell_index(&self, cell: CellId) -> Result<usize> {
        if cell.column >= self.columns || cell.cell >= self.cells_per_column {
            return Err(HtmError::Data(format!(
                "cell ({}, {}) outside a {} x {} grid",
                cell.column, cell.cell, self.columns, self.cells_per_column
            )));
        }
        Ok(cell.column * self.cells_per_column + cell.cell)
    }

    pub fn segments_for(&self, cell: CellId) -> &[Segment] {
        let idx = cell.column * self.cells_per_column + cell.cell;
        &self.segments[idx]
    }

    pub fn total_segments(&self) -> usize {
        self.segments.iter().map(Vec::len).sum()
    }

    /// Largest connected overlap any of the cell's segments achieves against
    /// the given activity (0 for a segment-less cell).
    pub fn best_overlap(&self, cell: CellId, active: &CellGrid) -> usize {
        self.segments_for(cell)
            .iter()
            .map(|s| s.connected_overlap(active, self.connect_threshold))
            .max()
            .unwrap_or(0)
    }

    /// Grows one segment on `cell` with synapses at `initial_permanence` onto
    /// the sample cells. When the cell is at its segment budget, the oldest
    /// segment is evicted first. Returns whether an eviction happened.
    pub fn grow_segment(
        &mut self,
        cell: CellId,
        sample: &[CellId],
        initial_permanence: f64,
    ) -> Result<bool> {
        let idx = self.cell_index(cell)?;
        if sample.is_empty() {
            return Err(HtmError::Data(
                "cannot grow a segment with no synapses".into(),
            ));
        }
        for presyn in sample {
            self.cell_index(*presyn)?;
        }
        if initial_permanence < self.connect_threshold {
            return Err(HtmError::config(
                "initial_permanence",
                format!(
                    "{} starts below the connect threshold {}; the segment could never activate",
                    initial_permanence, self.connect_threshold
                ),
            ));
        }
        let mut evicted = false;
        if self.segments[idx].len() == self.max_segments_per_cell {
            self.segments[idx].remove(0);
            self.evictions += 1;
            evicted = true;
        }
        self.segments[idx].push(Segment::new(sample, initial_permanence));
        Ok(evicted)
    }

    /// Applies the permanence update rule to the given `(cell, segment)`
    /// pairs. Under the multiplicative rule each synapse moves by
    /// `p_plus * (d * active) - p_minus * d`; under the additive rule it
    /// moves by `+p_plus` or `-p_minus`. Results clamp to `[0, 1]`.
    pub fn learn(
        &mut self,
        reinforced: &[(CellId, usize)],
        prev_active: &CellGrid,
        params: LearningParams,
        rule: LearningRule,
    ) -> Result<()> {
        params.validate()?;
        for &(cell, seg_idx) in reinforced {
            let idx = self.cell_index(cell)?;
            let segment = self.segments[idx].get_mut(seg_idx).ok_or_else(|| {
                HtmError::Data(format!(
                    "segment {seg_idx} does not exist on cell ({}, {})",
                    cell.column, cell.cell
                ))
            })?;
            for (presyn, d) in segment.synapses.iter_mut() {
                let indicator = if prev_active.get(*presyn) { 1.0 } else { 0.0 };
                let updated = match rule {
                    LearningRule::Multiplicative => {
                        *d + params.p_plus * (*d * indicator) - params.p_minus * *d
                    }
                    LearningRule::Additive => {
                        if indicator == 1.0 {
                            *d + params.p_plus
                        } else {
                            *d - params.p_minus
                        }
                    }
                };
                *d = updated.clamp(0.0, 1.0);
            }
        }
        Ok(())
    }

    /// Serializes to a versioned JSON document (only cells that own
    /// segments are listed). Permanences survive the round trip through
    /// [`Self::from_json`] bit-exactly, so a restored store behaves
    /// identically to the original.
    pub fn to_json(&self) -> Result<String> {
        let mut cells = Vec::new();
        for column in 0..self.columns {
            for cell in 0..self.cells_per_column {
                let id = CellId::new(column, cell);
                let segs = self.segments_for(id);
                if segs.is_empty() {
                    continue;
                }
                cells.push(StoredCell {
                    column,
                    cell,
                    segments: segs
                        .iter()
                        .map(|s| {
                            s.synapses
                                .iter()
                                .map(|(c, p)| StoredSynapse {
                                    column: c.column,
                                    cell: c.cell,
                                    permanence: *p,
                                })
                                .collect()
                        })
                        .collect(),
                });
            }
        }
        let doc = StoreDoc {
            version: STORE_FORMAT_VERSION,
            columns: self.columns,
            cells_per_column: self.cells_per_column,
            connect_threshold: self.connect_threshold,
            activation_threshold: self.activation_threshold,
            max_segments_per_cell: self.max_segments_per_cell,
            evictions: self.evictions,
            cells,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(json: &str) -> Result<SegmentStore> {
        let doc: StoreDoc = serde_json::from_str(json)?;
        if doc.version != STORE_FORMAT_VERSION {
            return Err(HtmError::Data(format!(
                "unsupported segment store format version {} (expected {})",
                doc.version, STORE_FORMAT_VERSION
            )));
        }
        let mut store = SegmentStore::new(
            doc.columns,
            doc.cells_per_column,
            doc.connect_threshold,
            doc.activation_threshold,
            doc.max_segments_per_cell,
        )?;
        store.evictions = doc.evictions;
        for stored in doc.cells {
            let owner = CellId::new(stored.column, stored.cell);
            let idx = store.cell_index(owner)?;
            if stored.segments.len() > store.max_segments_per_cell {
                return Err(HtmError::Data(format!(
                    "cell ({}, {}) lists {} segments, budget is {}",
                    stored.column,
                    stored.cell,
                    stored.segments.len(),
                    store.max_segments_per_cell
                )));
            }
            for synapses in stored.segments {
                let mut segment = Segment {
                    synapses: Vec::with_capacity(synapses.len()),
                };
                for s in synapses {
                    let presyn = CellId::new(s.column, s.cell);
                    store.cell_index(presyn)?;
                    if !(0.0..=1.0).contains(&s.permanence) {
                        return Err(HtmError::Data(format!(
                            "permanence {} outside [0, 1]",
                            s.permanence
                        )));
                    }
                    segment.synapses.push((presyn, s.permanence));
                }
                segment.synapses.sort_by_key(|s| s.0);
                store.segments[idx].push(segment);
            }
        }
        Ok(store)
    }
}

#[derive(Serialize, Deserialize)]
struct StoreDoc {
    version: u32,
    columns: usize,
    cells_per_column: usize,
    connect_threshold: f64,
    activation_threshold: usize,
    max_segments_per_cell: usize,
    evictions: u64,
    cells: Vec<StoredCell>,
}

#[derive(Serialize, Deserialize)]
struct StoredCell {
    column: usize,
    cell: usize,
    segments: Vec<Vec<StoredSynapse>>,
}

#[derive(Serialize, Deserialize)]
struct StoredSynapse {
    column: usize,
    cell: usize,
    permanence: f64,
}

/// Predictive state: a cell is predictive iff one of its segments has
/// strictly more than `activation_threshold` connected synapses onto active
/// cells.
pub fn compute_predictive(active: &CellGrid, store: &SegmentStore) -> CellGrid {
    let mut predictive = CellGrid::new(store.columns, store.cells_per_column);
    for column in 0..store.columns {
        for cell in 0..store.cells_per_column {
            let id = CellId::new(column, cell);
            let fires = store.segments_for(id).iter().any(|s| {
                s.connected_overlap(active, store.connect_threshold) > store.activation_threshold
            });
            if fires {
                predictive.set(id, true);
            }
        }
    }
    predictive
}

/// Active state from the winning columns: a winning column activates its
/// previously-predictive cells, or bursts every cell when it had none.
/// Non-winning columns stay silent.
pub fn compute_active(
    winners: &[usize],
    prev_predictive: &CellGrid,
    topology: &NetworkTopology,
) -> Result<CellGrid> {
    let mut active = CellGrid::new(topology.columns, topology.cells_per_column);
    for &column in winners {
        if column >= topology.columns {
            return Err(HtmError::Data(format!(
                "winner column {column} outside a {}-column network",
                topology.columns
            )));
        }
        if prev_predictive.count_in_column(column) == 0 {
            for cell in 0..topology.cells_per_column {
                active.set(CellId::new(column, cell), true);
            }
        } else {
            for cell in 0..topology.cells_per_column {
                let id = CellId::new(column, cell);
                if prev_predictive.get(id) {
                    active.set(id, true);
                }
            }
        }
    }
    Ok(active)
}

/// Per-step bookkeeping.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    /// Winning columns that had no predictive cell and burst.
    pub bursting_columns: usize,
    pub segments_grown: usize,
    pub segments_reinforced: usize,
    pub evictions: usize,
}

/// Learning-side parameters of the temporal stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalParams {
    pub learning: LearningParams,
    pub rule: LearningRule,
    /// Permanence assigned to the synapses of a freshly grown segment.
    pub initial_permanence: f64,
}

/// The temporal stage: a segment store plus the rolling two-step state
/// (current and previous active/predictive grids and the previous winner
/// cells).
#[derive(Debug, Clone)]
pub struct TemporalMemory {
    topology: NetworkTopology,
    params: TemporalParams,
    store: SegmentStore,
    active: CellGrid,
    predictive: CellGrid,
    prev_active: CellGrid,
    prev_predictive: CellGrid,
    prev_winner_cells: Vec<CellId>,
    steps: u64,
}

impl TemporalMemory {
    pub fn new(
        topology: NetworkTopology,
        connect_threshold: f64,
        activation_threshold: usize,
        max_segments_per_cell: usize,
        params: TemporalParams,
    ) -> Result<TemporalMemory> {
        topology.validate()?;
        params.learning.validate()?;
        let store = SegmentStore::new(
            topology.columns,
            topology.cells_per_column,
            connect_threshold,
            activation_threshold,
            max_segments_per_cell,
        )?;
        Ok(Self::from_store(store, topology, params))
    }

    /// Rebuilds a temporal memory around an existing (for example
    /// deserialized) segment store. State starts empty; use
    /// [`Self::set_context`] to restore mid-sequence state.
    pub fn from_store(
        store: SegmentStore,
        topology: NetworkTopology,
        params: TemporalParams,
    ) -> TemporalMemory {
        let columns = store.columns();
        let cells = store.cells_per_column();
        TemporalMemory {
            topology,
            params,
            store,
            active: CellGrid::new(columns, cells),
            predictive: CellGrid::new(columns, cells),
            prev_active: CellGrid::new(columns, cells),
            prev_predictive: CellGrid::new(columns, cells),
            prev_winner_cells: Vec::new(),
            steps: 0,
        }
    }

    pub fn store(&self) -> &SegmentStore {
        &self.store
    }

    pub fn params(&self) -> &TemporalParams {
        &self.params
    }

    pub fn active(&self) -> &CellGrid {
        &self.active
    }

    pub fn predictive(&self) -> &CellGrid {
        &self.predictive
    }

    /// Columns containing at least one predictive cell: the network's
    /// prediction of the next winner set.
    pub fn predicted_columns(&self) -> Vec<usize> {
        self.predictive.columns_with_activity()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Installs an explicit previous state (replay, restore, and the oracle
    /// tests go through here).
    pub fn set_context(
        &mut self,
        prev_active: CellGrid,
        prev_predictive: CellGrid,
        prev_winner_cells: Vec<CellId>,
    ) -> Result<()> {
        let shape_ok = prev_active.same_shape(&self.prev_active)
            && prev_predictive.same_shape(&self.prev_predictive);
        if !shape_ok {
            return Err(HtmError::Data(
                "context grids do not match the network shape".into(),
            ));
        }
        for c in &prev_winner_cells {
            self.store.cell_index(*c)?;
        }
        self.prev_active = prev_active;
        self.prev_predictive = prev_predictive;
        self.prev_winner_cells = prev_winner_cells;
        Ok(())
    }

    /// Cells to wire a new segment to: previous winner cells first, then any
    /// other previously-active cells, in `(column, cell)` order, up to
    /// `activation_threshold + 1` of them (the minimum that can make the new
    /// segment's overlap exceed the threshold).
    fn growth_sample(&self) -> Vec<CellId> {
        let budget = self.store.activation_threshold() + 1;
        let mut sample: Vec<CellId> = self.prev_winner_cells.clone();
        sample.sort_unstable();
        sample.dedup();
        if sample.len() < budget {
            for cell in self.prev_active.active_cells() {
                if sample.len() >= budget {
                    break;
                }
                if !sample.contains(&cell) {
                    sample.push(cell);
                }
            }
            sample.sort_unstable();
        }
        sample.truncate(budget);
        sample
    }

    /// The winner cell of a bursting column: the cell whose best segment
    /// overlaps the previous activity most, ties toward the lowest cell
    /// index (so a segment-less column elects cell 0).
    fn burst_winner(&self, column: usize) -> CellId {
        let mut best = CellId::new(column, 0);
        let mut best_overlap = 0usize;
        for cell in 0..self.topology.cells_per_column {
            let id = CellId::new(column, cell);
            let overlap = self.store.best_overlap(id, &self.prev_active);
            if overlap > best_overlap {
                best_overlap = overlap;
                best = id;
            }
        }
        best
    }

    /// Advances one step for the given winning columns (sorted, as produced
    /// by inhibition): activation, then learning and growth (when enabled),
    /// then the new predictive state, then the state rotation.
    pub fn step(&mut self, winners: &[usize], learning_enabled: bool) -> Result<StepStats> {
        let active = compute_active(winners, &self.prev_predictive, &self.topology)?;
        let mut stats = StepStats::default();
        let mut winner_cells: Vec<CellId> = Vec::new();
        let mut burst_columns: Vec<usize> = Vec::new();

        for &column in winners {
            if self.prev_predictive.count_in_column(column) == 0 {
                stats.bursting_columns += 1;
                burst_columns.push(column);
            } else {
                for cell in 0..self.topology.cells_per_column {
                    let id = CellId::new(column, cell);
                    if active.get(id) {
                        winner_cells.push(id);
                    }
                }
            }
        }
        for &column in &burst_columns {
            winner_cells.push(self.burst_winner(column));
        }
        winner_cells.sort_unstable();

        if learning_enabled {
            // Reinforce the segments that correctly predicted their column:
            // segments (on cells both active now and predictive a step ago)
            // whose connected overlap with the previous activity cleared the
            // activation threshold.
            let mut reinforced: Vec<(CellId, usize)> = Vec::new();
            for cell in active.active_cells() {
                if !self.prev_predictive.get(cell) {
                    continue;
                }
                for (seg_idx, segment) in self.store.segments_for(cell).iter().enumerate() {
                    let overlap = segment
                        .connected_overlap(&self.prev_active, self.store.connect_threshold());
                    if overlap > self.store.activation_threshold() {
                        reinforced.push((cell, seg_idx));
                    }
                }
            }
            stats.segments_reinforced = reinforced.len();
            self.store.learn(
                &reinforced,
                &self.prev_active,
                self.params.learning,
                self.params.rule,
            )?;

            // Every bursting column grows one segment on its winner cell,
            // wired to the previous activity (skipped on the very first step
            // when there is nothing to wire to).
            let sample = self.growth_sample();
            if !sample.is_empty() {
                for &column in &burst_columns {
                    let winner = self.burst_winner(column);
                    let evicted =
                        self.store
                            .grow_segment(winner, &sample, self.params.initial_permanence)?;
                    stats.segments_grown += 1;
                    if evicted {
                        stats.evictions += 1;
                    }
                }
            }
        }

        let predictive = compute_predictive(&active, &self.store);

        self.prev_active = active.clone();
        self.prev_predictive = predictive.clone();
        self.prev_winner_cells = winner_cells;
        self.active = active;
        self.predictive = predictive;
        self.steps += 1;
        Ok(stats)
    }
}
