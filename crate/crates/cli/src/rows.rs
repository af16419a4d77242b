//! Row types of the versioned CSV tables.

use envtrack::decoder::TrackingScore;
use envtrack::{Cell, Condition, Noise};
use serde::{Deserialize, Serialize};

pub const SCORES: &str = "scores";
pub const SWEEP: &str = "sweep";
pub const CHANCE: &str = "chance";
pub const FEATURES: &str = "features";
pub const PROFILES: &str = "profiles";
pub const RADAR: &str = "radar";
pub const STATS: &str = "stats";
pub const REJECTIONS: &str = "rejections";
pub const POSITIONS: &str = "positions";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub subject_id: String,
    pub trial_id: String,
    pub speaker_id: String,
    pub condition: Condition,
    pub noise: Noise,
    pub lag_or_window: String,
    pub lambda: f64,
    pub r: f64,
    pub r_z: f64,
}

impl From<&TrackingScore> for ScoreRow {
    fn from(s: &TrackingScore) -> Self {
        Self {
            subject_id: s.subject_id.clone(),
            trial_id: s.trial_id.clone(),
            speaker_id: s.speaker_id.clone(),
            condition: s.cell.condition,
            noise: s.cell.noise,
            lag_or_window: s.lag_or_window.clone(),
            lambda: s.lambda,
            r: s.r,
            r_z: s.r_z,
        }
    }
}

impl ScoreRow {
    pub fn cell(&self) -> Cell {
        Cell::new(self.condition, self.noise)
    }

    pub fn to_score(&self) -> TrackingScore {
        TrackingScore {
            trial_id: self.trial_id.clone(),
            subject_id: self.subject_id.clone(),
            speaker_id: self.speaker_id.clone(),
            cell: self.cell(),
            lag_or_window: self.lag_or_window.clone(),
            lambda: self.lambda,
            r: self.r,
            r_z: self.r_z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub subject_id: String,
    pub condition: Condition,
    pub noise: Noise,
    pub lag_index: usize,
    pub lag_ms: f64,
    pub lambda: f64,
    pub n_trials: usize,
    pub mean_r: f64,
    pub mean_rz: f64,
    /// Permutation mean and 95% interval of the mean r_z; absent without
    /// permutations.
    pub chance_mean: Option<f64>,
    pub chance_q025: Option<f64>,
    pub chance_q975: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChanceRow {
    pub subject_id: String,
    pub condition: Condition,
    pub noise: Noise,
    pub lag_or_window: String,
    pub lambda: f64,
    pub n_perm: usize,
    pub mean_r: f64,
    pub mean_rz: f64,
    pub sd_rz: f64,
    pub q025: f64,
    pub q975: f64,
    pub p95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarRow {
    pub feature: String,
    pub speaker_id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    /// `anova`, `planned` or `spearman`.
    pub family: String,
    pub test: String,
    pub statistic: f64,
    pub df_num: Option<f64>,
    pub df_den: Option<f64>,
    pub p_raw: f64,
    pub p_adjusted: Option<f64>,
    pub effect_size: Option<f64>,
    pub epsilon: Option<f64>,
    pub n: usize,
    /// False where the p-value is descriptive only.
    pub p_reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRow {
    pub recording: String,
    pub epoch_index: usize,
    pub trial_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionRow {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}
