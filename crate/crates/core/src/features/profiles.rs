//! Per-speaker feature profiles: segment averaging, min-max normalization
//! and correlation pruning.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Features correlated above this |r| with an earlier retained one are dropped.
pub const PRUNE_ABS_R: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerProfile {
    pub speaker_id: String,
    /// Values aligned with `ProfileSet::feature_names`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub feature_names: Vec<String>,
    pub profiles: Vec<SpeakerProfile>,
    pub normalized: bool,
    /// Dropped features with the reason.
    pub dropped: Vec<(String, String)>,
}

/// One segment's feature vector, aligned with the feature names.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRow {
    pub speaker_id: String,
    pub values: Vec<f64>,
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Average segments per speaker (speakers in sorted order), min-max
/// normalize every feature across speakers, then walk the features in the
/// given order and drop any whose |r| with an already retained one exceeds
/// 0.8. Features constant across speakers are dropped with a warning.
pub fn build_profiles(feature_names: &[String], segments: &[SegmentRow]) -> Result<ProfileSet> {
    let k = feature_names.len();
    if let Some(s) = segments.iter().find(|s| s.values.len() != k) {
        return Err(Error::invalid(format!(
            "segment of speaker {} has {} values for {k} features",
            s.speaker_id,
            s.values.len()
        )));
    }
    if let Some(s) = segments.iter().find(|s| s.values.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid(format!("non-finite feature value for speaker {}", s.speaker_id)));
    }
    let mut sums: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for s in segments {
        let e = sums.entry(&s.speaker_id).or_insert_with(|| (vec![0.0; k], 0));
        e.0.iter_mut().zip(&s.values).for_each(|(a, v)| *a += v);
        e.1 += 1;
    }
    if sums.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 speakers, got {}", sums.len())));
    }
    let speakers: Vec<String> = sums.keys().map(|s| s.to_string()).collect();
    let means: Vec<Vec<f64>> = sums.values().map(|(s, n)| s.iter().map(|v| v / *n as f64).collect()).collect();

    let mut dropped = Vec::new();
    let mut columns: Vec<(usize, Vec<f64>)> = Vec::new();
    for j in 0..k {
        let col: Vec<f64> = means.iter().map(|m| m[j]).collect();
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            warn!("feature {} is constant across speakers; dropped", feature_names[j]);
            dropped.push((feature_names[j].clone(), "constant across speakers".to_string()));
            continue;
        }
        columns.push((j, col.iter().map(|v| (v - lo) / (hi - lo)).collect()));
    }

    let mut retained: Vec<(usize, Vec<f64>)> = Vec::new();
    for (j, col) in columns {
        if let Some((i, r)) = retained
            .iter()
            .map(|(i, c)| (*i, pearson(c, &col)))
            .find(|(_, r)| r.abs() > PRUNE_ABS_R)
        {
            dropped.push((
                feature_names[j].clone(),
                format!("|r| = {:.3} with {}", r.abs(), feature_names[i]),
            ));
            continue;
        }
        retained.push((j, col));
    }

    Ok(ProfileSet {
        feature_names: retained.iter().map(|(j, _)| feature_names[*j].clone()).collect(),
        profiles: speakers
            .into_iter()
            .enumerate()
            .map(|(s, speaker_id)| SpeakerProfile {
                speaker_id,
                values: retained.iter().map(|(_, c)| c[s]).collect(),
            })
            .collect(),
        normalized: true,
        dropped,
    })
}
