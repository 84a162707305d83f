//! A cortical-learning prediction library: scalar/symbol encoders feed a
//! spatial pooling stage whose connection matrix is chosen by Monte Carlo
//! search, a temporal stage learns sequence transitions on distal segments,
//! and a greedy recognizer completes partially specified rows from the
//! learned units. Runs are seed-deterministic end to end; the only
//! non-reproducible report field is the wall-clock duration.
//!
//! The high-level entry point is [`pipeline::run_experiment`], driven by an
//! [`config::ExperimentConfig`]. The layers underneath are usable on their
//! own:
//!
//! - [`encoder`] turns integer-coded rows into sparse bit vectors,
//! - [`spatial`] evolves and applies the pooling matrix,
//! - [`temporal`] models per-cell sequence memory,
//! - [`predictor`] completes rows against a store of learned units,
//! - [`metrics`] scores predictions (RMSE, MAPE, exact-match accuracy).

pub mod config;
pub mod data;
pub mod encoder;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod predictor;
pub mod report;
pub mod sdr;
pub mod spatial;
pub mod temporal;

pub use config::{DataSource, ExperimentConfig, ScoringMode};
pub use data::{DataKind, Dataset};
pub use error::{HtmError, Result};
pub use pipeline::{build_comparison, run_baseline, run_experiment, BaselineKind};
pub use report::ExperimentReport;
pub use sdr::Sdr;
