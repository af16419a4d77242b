//! # envtrack
//!
//! Cortical speech-tracking analysis toolkit.
//!
//! The pipeline runs from raw material to group statistics:
//!
//! ```text
//! audio ──► envelope ──┐
//!                      ├──► decoder (ridge backward model, LOO) ──► stats
//! EEG ────► eegprep ───┘
//! audio + video frames ──► features ──► speaker profiles ──► stats
//! ```
//!
//! - [`sigcore`]: FIR/IIR design, zero-phase filtering, Hilbert envelope,
//!   gammatone filterbank, rational resampling, z-scoring.
//! - [`envelope`]: broadband speech envelope at 64 Hz.
//! - [`eegprep`]: bad-channel detection, epoch rejection, common-average
//!   reference, spherical-spline interpolation and epoching.
//! - [`decoder`]: lagged design matrices, ridge regression, lambda grid search
//!   with leave-one-out cross-validation, lag sweeps and permutation chance.
//! - [`features`]: multitaper spectra, periodic band power, voice metrics and
//!   lip features, normalized speaker profiles.
//! - [`stats`]: paired t-tests, repeated-measures ANOVA with
//!   Greenhouse-Geisser correction, Holm-Bonferroni, Spearman correlation.
//! - [`sim`]: synthetic forward-model EEG for end-to-end validation.
//! - [`io`]: binary signal files, WAV/PGM readers, manifests and CSV tables.

pub mod conditions;
pub mod decoder;
pub mod eegprep;
pub mod envelope;
pub mod error;
pub mod features;
pub mod io;
pub mod sigcore;
pub mod sim;
pub mod stats;

mod seed;

#[cfg(test)]
pub(crate) mod testutil;

pub use conditions::{Cell, Condition, Noise};
pub use error::{Error, Result};
pub use sigcore::Signal;

/// Sample rate of envelopes, preprocessed EEG and decoder inputs.
pub const ANALYSIS_RATE_HZ: f64 = 64.0;

/// Duration of one condition epoch in seconds.
pub const EPOCH_SECONDS: f64 = 30.0;
