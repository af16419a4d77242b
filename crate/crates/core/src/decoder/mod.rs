//! Backward (stimulus-reconstruction) models: lagged EEG predicts the speech
//! envelope, fitted by ridge regression with leave-one-out averaging of
//! per-trial weights within each subject × condition cell.
//!
//! Design columns and the target are z-scored per trial before fitting, so
//! reconstruction accuracy does not depend on channel or envelope units.

mod chance;
mod lag;
mod loo;
mod ridge;

pub use chance::{chance_level, chance_sweep, ChanceSummary, LambdaChoice};
pub use lag::{build_lag_matrix, LagSpec, LAG_STEP_MS, SWEEP_LAGS, WINDOW_OF_INTEREST_MS};
pub use loo::{
    fit_cell_model, lagged_model, lambda_mse_curve, loo_scores, select_lambda, single_lag_sweep, window_model,
    SweepPoint,
};
pub use ridge::ridge_fit;

use serde::{Deserialize, Serialize};

use crate::conditions::Cell;
use crate::error::{Error, Result};

/// Ridge grid: 1e-2 … 1e4, 5e4, 1e5 … 1e9.
pub const LAMBDA_GRID: [f64; 13] = [
    1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3, 1e4, 5e4, 1e5, 1e6, 1e7, 1e8, 1e9,
];

/// One EEG epoch paired with the envelope presented during it, both at 64 Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPair {
    /// Channels × samples.
    pub eeg: Vec<Vec<f64>>,
    pub envelope: Vec<f64>,
    pub cell: Cell,
    pub subject_id: String,
    pub speaker_id: String,
    pub trial_id: String,
}

impl TrialPair {
    pub fn new(
        eeg: Vec<Vec<f64>>,
        envelope: Vec<f64>,
        cell: Cell,
        subject_id: impl Into<String>,
        speaker_id: impl Into<String>,
        trial_id: impl Into<String>,
    ) -> Result<Self> {
        if eeg.is_empty() {
            return Err(Error::invalid("trial has no EEG channels"));
        }
        if let Some(c) = eeg.iter().position(|ch| ch.len() != envelope.len()) {
            return Err(Error::LengthMismatch(format!(
                "EEG channel {c} has {} samples but the envelope has {}",
                eeg[c].len(),
                envelope.len()
            )));
        }
        Ok(Self {
            eeg,
            envelope,
            cell,
            subject_id: subject_id.into(),
            speaker_id: speaker_id.into(),
            trial_id: trial_id.into(),
        })
    }

    pub fn n_channels(&self) -> usize {
        self.eeg.len()
    }

    pub fn n_samples(&self) -> usize {
        self.envelope.len()
    }
}

/// Subject × condition × noise grouping key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub subject_id: String,
    pub cell: Cell,
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.subject_id, self.cell)
    }
}

/// Averaged decoder for one cell. Weights refer to z-scored design columns,
/// ordered channel-major by lag, intercept last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderModel {
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub n_channels: usize,
    pub lag_indices: Vec<usize>,
    pub window_ms: [f64; 2],
    pub training_trial_ids: Vec<String>,
}

impl DecoderModel {
    /// Weight of channel `c` at the `l`-th lag.
    pub fn weight(&self, c: usize, l: usize) -> f64 {
        self.weights[c * self.lag_indices.len() + l]
    }

    pub fn intercept(&self) -> f64 {
        *self.weights.last().expect("non-empty weights")
    }
}

/// Reconstruction accuracy of one held-out trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingScore {
    pub trial_id: String,
    pub subject_id: String,
    pub speaker_id: String,
    pub cell: Cell,
    /// `lag16`, `200-325ms`, ...
    pub lag_or_window: String,
    pub lambda: f64,
    pub r: f64,
    pub r_z: f64,
}

/// Fisher z-transform, `atanh(r)`.
pub fn fisher_z(r: f64) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(Error::invalid(format!("Fisher z needs |r| < 1, got {r}")));
    }
    // evaluated on |r| so the transform is exactly odd
    Ok(r.signum() * r.abs().atanh())
}

/// Largest |r| passed to the Fisher transform when scoring; a perfect
/// reconstruction would otherwise map to infinity.
const R_CLAMP: f64 = 1.0 - 1e-12;

pub(crate) fn score_z(r: f64) -> f64 {
    let r = r.clamp(-R_CLAMP, R_CLAMP);
    r.signum() * r.abs().atanh()
}
