//! Power models for virtualized base-station schedulers.
//!
//! The CPU power drawn by a software base station depends on the airtime
//! it schedules, the channel SNR and the selected MCS. This crate models
//! that relationship three ways and provides everything needed to compare
//! them end to end:
//!
//! * [`regression`] - two hand-crafted piecewise models (one for data from
//!   the stock scheduler, one for full-grid data from a custom scheduler)
//!   with least-squares fitters;
//! * [`mlp`] - a small fully connected ReLU network trained from scratch
//!   with Adam and L1 activity regularization;
//! * [`datagen`] - seeded synthetic measurement campaigns that mimic the
//!   two collection geometries;
//! * [`eval`] - train/test splitting, RMSE/MAE reporting and the A/B/C/D
//!   evaluation scenarios;
//! * [`dataset`] / [`modelfile`] - the CSV dataset schema and the TOML
//!   model-file format shared by the CLI pipeline.
//!
//! Every random choice flows from explicit seeds; equal inputs reproduce
//! results bit-for-bit.

pub mod datagen;
pub mod dataset;
pub mod error;
pub mod eval;
mod linalg;
pub mod mlp;
pub mod modelfile;
mod neldermead;
pub mod profile;
pub mod regression;

pub use dataset::{emit_csv, ingest_csv, DataSource, Dataset, Sample, Scheduler};
pub use error::{CoreError, DatagenError, EvalError, FitError, TrainError};
pub use modelfile::{load_model, save_model, ModelFile, ModelKind, ModelPayload};
pub use profile::PlatformProfile;
