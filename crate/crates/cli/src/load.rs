//! Trial loading from manifests.

use std::path::{Path, PathBuf};

use envtrack::decoder::TrialPair;
use envtrack::io::{read_signal_file, SignalFile, TrialManifest};
use envtrack::{Error, Result, ANALYSIS_RATE_HZ};
use log::warn;

pub fn load_manifests(paths: &[PathBuf]) -> Result<Vec<TrialManifest>> {
    paths.iter().map(|p| TrialManifest::load(p)).collect()
}

/// `len` samples of `file` from `offset_s`, as f64 rows.
fn slice(file: &SignalFile, offset_s: f64, len: usize, what: &str) -> Result<Vec<Vec<f64>>> {
    let start = (offset_s * file.rate_hz).round() as usize;
    if start + len > file.n_samples() {
        return Err(Error::TooShort {
            needed: start + len,
            got: file.n_samples(),
        });
    }
    if file.n_channels() == 0 {
        return Err(Error::invalid(format!("{what} has no channels")));
    }
    Ok(file
        .data
        .iter()
        .map(|row| row[start..start + len].iter().map(|&v| v as f64).collect())
        .collect())
}

fn require_rate(file: &SignalFile, path: &Path) -> Result<()> {
    if file.rate_hz != ANALYSIS_RATE_HZ {
        return Err(Error::invalid(format!(
            "{} is sampled at {} Hz; decoding needs {ANALYSIS_RATE_HZ} Hz input (run preproc/envelope first)",
            path.display(),
            file.rate_hz
        )));
    }
    Ok(())
}

/// EEG–envelope pairs of every non-rejected trial, plus the EEG channel
/// labels of the first trial.
pub fn load_pairs(manifests: &[TrialManifest]) -> Result<(Vec<TrialPair>, Vec<String>)> {
    let mut pairs = Vec::new();
    let mut labels: Option<Vec<String>> = None;
    for m in manifests {
        for t in &m.trials {
            if t.rejected {
                warn!("trial {} of {} is marked rejected; skipped", t.trial_id, m.subject_id());
                continue;
            }
            let (Some(eeg_path), Some(env_path)) = (&t.eeg_path, &t.envelope_path) else {
                return Err(Error::invalid(format!(
                    "trial {} needs both eeg_path and envelope_path",
                    t.trial_id
                )));
            };
            let (eeg_path, env_path) = (m.resolve(eeg_path), m.resolve(env_path));
            let eeg = read_signal_file(&eeg_path)?;
            let env = read_signal_file(&env_path)?;
            require_rate(&eeg, &eeg_path)?;
            require_rate(&env, &env_path)?;
            let len = (t.duration_s * ANALYSIS_RATE_HZ).round() as usize;
            let eeg_rows = slice(&eeg, t.eeg_offset_s, len, "EEG")?;
            let env_row = slice(&env, 0.0, len, "envelope")?.swap_remove(0);
            match &labels {
                None => labels = Some(eeg.labels.clone()),
                Some(l) if *l != eeg.labels => {
                    return Err(Error::invalid(format!(
                        "{} has a different channel set than earlier trials",
                        eeg_path.display()
                    )))
                }
                Some(_) => {}
            }
            pairs.push(TrialPair::new(
                eeg_rows,
                env_row,
                t.cell(),
                m.subject_id(),
                t.speaker_id.clone(),
                t.trial_id.clone(),
            )?);
        }
    }
    if pairs.is_empty() {
        return Err(Error::invalid("no usable trials in the given manifests"));
    }
    Ok((pairs, labels.unwrap_or_default()))
}

/// Absolute form of a manifest path for manifests written elsewhere.
pub fn absolute(m: &TrialManifest, p: &Path) -> Result<PathBuf> {
    Ok(std::fs::canonicalize(m.resolve(p))?)
}
