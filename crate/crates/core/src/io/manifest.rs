use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conditions::{Cell, Condition, Noise};
use crate::error::{Error, Result};
use crate::features::Roi;

pub const DEFAULT_TRIAL_SECONDS: f64 = 30.0;

fn default_duration() -> f64 {
    DEFAULT_TRIAL_SECONDS
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub subject_id: String,
    /// Carried through unchanged; not used in any computation.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub likeability_ratings: serde_json::Value,
}

/// One 30-s stimulus block. Paths are relative to the manifest's directory
/// unless absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestTrial {
    pub trial_id: String,
    pub speaker_id: String,
    pub condition: Condition,
    pub noise: Noise,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eeg_path: Option<PathBuf>,
    #[serde(default)]
    pub eeg_offset_s: f64,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    /// Precomputed 64 Hz envelope, as written by the envelope stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_path: Option<PathBuf>,
    /// Directory of PGM frames for the lip features.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lip_roi: Option<Roi>,
    /// Set by preprocessing when an artifact overlaps the trial.
    #[serde(default, skip_serializing_if = "is_false")]
    pub rejected: bool,
}

impl ManifestTrial {
    pub fn cell(&self) -> Cell {
        Cell::new(self.condition, self.noise)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialManifest {
    pub metadata: Metadata,
    pub trials: Vec<ManifestTrial>,
    /// Directory relative paths resolve against; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl TrialManifest {
    pub fn subject_id(&self) -> &str {
        &self.metadata.subject_id
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Unique trial ids, sane timing, and every referenced file present.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for t in &self.trials {
            if !seen.insert(t.trial_id.as_str()) {
                return Err(Error::invalid(format!("duplicate trial id '{}'", t.trial_id)));
            }
            if !(t.duration_s > 0.0) || !(t.eeg_offset_s >= 0.0) {
                return Err(Error::invalid(format!(
                    "trial '{}': duration must be positive and offset non-negative",
                    t.trial_id
                )));
            }
            let paths = [&t.audio_path, &t.eeg_path, &t.envelope_path, &t.video_dir];
            for p in paths.into_iter().flatten() {
                let full = self.resolve(p);
                if !full.exists() {
                    return Err(Error::invalid(format!(
                        "trial '{}' references missing file {}",
                        t.trial_id,
                        full.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut m: TrialManifest =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("manifest: {e}")))?;
        m.base_dir = base_dir.to_path_buf();
        Ok(m)
    }

    /// Parse and validate.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let m = Self::from_json(&text, &base).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
