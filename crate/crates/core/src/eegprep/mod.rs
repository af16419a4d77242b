//! EEG preprocessing: bad channels, epoch rejection, re-referencing,
//! spherical-spline repair, filtering, resampling and condition epochs.

pub mod montage;
pub mod spline;

use log::warn;
use rayon::prelude::*;

use crate::conditions::{Condition, Noise};
use crate::error::{Error, Result};
use crate::sigcore::{apply_zero_phase, design_fir, resample, FilterKind, FirFilter, Signal, Window};

/// Multichannel recording, channels × samples, in µV.
#[derive(Debug, Clone, PartialEq)]
pub struct EegRecording {
    pub data: Vec<Vec<f64>>,
    pub rate: f64,
    pub channel_labels: Vec<String>,
    /// Unit-sphere electrode positions, one per channel.
    pub channel_positions: Option<Vec<[f64; 3]>>,
}

impl EegRecording {
    pub fn new(
        data: Vec<Vec<f64>>,
        rate: f64,
        channel_labels: Vec<String>,
        channel_positions: Option<Vec<[f64; 3]>>,
    ) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::invalid(format!("need at least 2 channels, got {}", data.len())));
        }
        let n = data[0].len();
        if data.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("all channels must have the same length"));
        }
        if channel_labels.len() != data.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} channels",
                channel_labels.len(),
                data.len()
            )));
        }
        if !(rate > 0.0) {
            return Err(Error::invalid(format!("sample rate must be positive, got {rate}")));
        }
        if let Some(pos) = &channel_positions {
            if pos.len() != data.len() {
                return Err(Error::invalid("one position per channel required"));
            }
            for (i, p) in pos.iter().enumerate() {
                let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                if (norm - 1.0).abs() > 1e-6 {
                    return Err(Error::invalid(format!(
                        "position of channel {} is not on the unit sphere (|p| = {norm})",
                        channel_labels[i]
                    )));
                }
            }
        }
        Ok(Self {
            data,
            rate,
            channel_labels,
            channel_positions,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.data.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    fn map_channels<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&Signal) -> Result<Signal> + Sync,
    {
        let data = self
            .data
            .par_iter()
            .map(|row| {
                f(&Signal {
                    samples: row.clone(),
                    rate: self.rate,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rate = data.first().map_or(self.rate, |s| s.rate);
        Ok(Self {
            data: data.into_iter().map(|s| s.samples).collect(),
            rate,
            channel_labels: self.channel_labels.clone(),
            channel_positions: self.channel_positions.clone(),
        })
    }

    fn select(&self, channels: &[usize]) -> Self {
        Self {
            data: channels.iter().map(|&c| self.data[c].clone()).collect(),
            rate: self.rate,
            channel_labels: channels.iter().map(|&c| self.channel_labels[c].clone()).collect(),
            channel_positions: self
                .channel_positions
                .as_ref()
                .map(|p| channels.iter().map(|&c| p[c]).collect()),
        }
    }
}

/// Condition tags carried alongside an epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMeta {
    pub trial_id: String,
    pub speaker_id: String,
    pub condition: Condition,
    pub noise: Noise,
}

/// Placement of one trial within a continuous recording.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialWindow {
    pub meta: TrialMeta,
    pub offset_s: f64,
    pub duration_s: f64,
}

/// One channels × samples block.
pub type Epoch = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct EpochSet {
    pub epochs: Vec<Epoch>,
    pub rate: f64,
    pub epoch_s: f64,
    pub rejection_mask: Vec<bool>,
    /// Why each rejected epoch was flagged; `None` for kept epochs.
    pub rejection_reasons: Vec<Option<RejectionReason>>,
    pub trial_meta: Vec<Option<TrialMeta>>,
    pub channel_labels: Vec<String>,
    pub bad_channels: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectionReason {
    Amplitude,
    Kurtosis,
}

impl RejectionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectionReason::Amplitude => "amplitude",
            RejectionReason::Kurtosis => "kurtosis",
        }
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_sd(x: &[f64]) -> f64 {
    crate::sigcore::variance(x).sqrt()
}

/// Channels whose standard deviation lies outside mean ± 2·SD of the
/// per-channel standard deviations.
pub fn detect_bad_channels(rec: &EegRecording) -> Vec<usize> {
    if rec.n_channels() < 3 {
        return Vec::new();
    }
    let sds: Vec<f64> = rec.data.iter().map(|row| sample_sd(row)).collect();
    let m = mean(&sds);
    let spread = sample_sd(&sds);
    let (lo, hi) = (m - 2.0 * spread, m + 2.0 * spread);
    sds.iter()
        .enumerate()
        .filter(|(_, &s)| s < lo || s > hi)
        .map(|(i, _)| i)
        .collect()
}

/// Non-excess kurtosis m4 / m2²; `None` for a constant epoch.
fn kurtosis(x: &[f64]) -> Option<f64> {
    let m = mean(x);
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in x {
        let d = (v - m) * (v - m);
        m2 += d;
        m4 += d * d;
    }
    let n = x.len() as f64;
    let (m2, m4) = (m2 / n, m4 / n);
    (m2 > 0.0).then(|| m4 / (m2 * m2))
}

/// Flag epochs by absolute amplitude and by per-channel kurtosis outliers.
///
/// An epoch is rejected if any sample exceeds `amp_threshold_uv` in
/// magnitude, or if on any channel its kurtosis lies more than
/// `kurtosis_sd` standard deviations above that channel's mean kurtosis
/// across epochs.
pub fn reject_epochs(epochs: &[Epoch], amp_threshold_uv: f64, kurtosis_sd: f64) -> Vec<bool> {
    reject_epochs_detailed(epochs, amp_threshold_uv, kurtosis_sd)
        .iter()
        .map(Option::is_some)
        .collect()
}

pub fn reject_epochs_detailed(
    epochs: &[Epoch],
    amp_threshold_uv: f64,
    kurtosis_sd: f64,
) -> Vec<Option<RejectionReason>> {
    let mut reasons: Vec<Option<RejectionReason>> = epochs
        .iter()
        .map(|ep| {
            ep.iter()
                .flatten()
                .any(|v| v.abs() > amp_threshold_uv)
                .then_some(RejectionReason::Amplitude)
        })
        .collect();
    let n_channels = epochs.first().map_or(0, Vec::len);
    for c in 0..n_channels {
        let kurt: Vec<Option<f64>> = epochs.iter().map(|ep| kurtosis(&ep[c])).collect();
        let valid: Vec<f64> = kurt.iter().flatten().copied().collect();
        if valid.len() < 2 {
            continue;
        }
        let (m, s) = (mean(&valid), sample_sd(&valid));
        if !(s > 0.0) {
            continue;
        }
        for (e, k) in kurt.iter().enumerate() {
            if let Some(k) = k {
                if (k - m) / s > kurtosis_sd && reasons[e].is_none() {
                    reasons[e] = Some(RejectionReason::Kurtosis);
                }
            }
        }
    }
    reasons
}

/// Subtract the across-channel mean at every sample.
pub fn rereference_common_average(rec: &EegRecording) -> EegRecording {
    let n = rec.n_samples();
    let c = rec.n_channels() as f64;
    let avg: Vec<f64> = (0..n)
        .map(|t| rec.data.iter().map(|row| row[t]).sum::<f64>() / c)
        .collect();
    EegRecording {
        data: rec
            .data
            .iter()
            .map(|row| row.iter().zip(&avg).map(|(v, a)| v - a).collect())
            .collect(),
        ..rec.clone()
    }
}

/// Replace `bad` channels with spherical-spline estimates from the others.
pub fn spherical_interpolate(rec: &EegRecording, bad: &[usize]) -> Result<EegRecording> {
    if bad.is_empty() {
        return Ok(rec.clone());
    }
    let n = rec.n_channels();
    if bad.len() + 3 >= n {
        return Err(Error::invalid(format!(
            "cannot interpolate {} of {n} channels (need |bad| < channels - 3)",
            bad.len()
        )));
    }
    if let Some(&b) = bad.iter().find(|&&b| b >= n) {
        return Err(Error::invalid(format!("bad channel index {b} out of range")));
    }
    let pos = rec
        .channel_positions
        .as_ref()
        .ok_or_else(|| Error::invalid("spherical interpolation needs channel positions"))?;
    let good: Vec<usize> = (0..n).filter(|c| !bad.contains(c)).collect();
    let sources: Vec<[f64; 3]> = good.iter().map(|&c| pos[c]).collect();
    let targets: Vec<[f64; 3]> = bad.iter().map(|&c| pos[c]).collect();
    let w = spline::interpolation_matrix(&sources, &targets)?;
    let mut out = rec.clone();
    for (t, &b) in bad.iter().enumerate() {
        let row = &mut out.data[b];
        for (s, v) in row.iter_mut().enumerate() {
            *v = good
                .iter()
                .enumerate()
                .map(|(j, &g)| w[(t, j)] * rec.data[g][s])
                .sum();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirSpec {
    pub cutoff_hz: f64,
    pub order: usize,
    pub window: Window,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocConfig {
    pub analysis_lowpass: FirSpec,
    pub analysis_rate: f64,
    pub analysis_highpass: FirSpec,
    pub rejection_epoch_s: f64,
    pub amp_threshold_uv: f64,
    pub kurtosis_sd: f64,
    pub final_lowpass: FirSpec,
    pub final_highpass: FirSpec,
    pub output_rate: f64,
    pub epoch_s: f64,
}

impl Default for PreprocConfig {
    fn default() -> Self {
        Self {
            analysis_lowpass: FirSpec { cutoff_hz: 40.0, order: 166, window: Window::Hamming },
            analysis_rate: 250.0,
            analysis_highpass: FirSpec { cutoff_hz: 1.0, order: 414, window: Window::Hamming },
            rejection_epoch_s: 1.0,
            amp_threshold_uv: 80.0,
            kurtosis_sd: 3.0,
            final_lowpass: FirSpec { cutoff_hz: 30.0, order: 220, window: Window::Hann },
            final_highpass: FirSpec { cutoff_hz: 0.3, order: 500, window: Window::Hann },
            output_rate: crate::ANALYSIS_RATE_HZ,
            epoch_s: crate::EPOCH_SECONDS,
        }
    }
}

fn fir(kind: FilterKind, spec: FirSpec, rate: f64) -> Result<FirFilter> {
    design_fir(kind, spec.cutoff_hz, spec.order, spec.window, rate)
}

/// 1-s rejection mask from the filtered analysis copy of the good channels.
fn analysis_rejection(
    rec: &EegRecording,
    config: &PreprocConfig,
) -> Result<(Vec<Option<RejectionReason>>, f64)> {
    let lp = fir(FilterKind::Lowpass, config.analysis_lowpass, rec.rate)?;
    let copy = rec.map_channels(|s| resample(&apply_zero_phase(&lp, s)?, config.analysis_rate))?;
    let hp = fir(FilterKind::Highpass, config.analysis_highpass, copy.rate)?;
    let copy = copy.map_channels(|s| apply_zero_phase(&hp, s))?;
    let len = (config.rejection_epoch_s * copy.rate).round() as usize;
    let n_epochs = copy.n_samples() / len;
    let epochs: Vec<Epoch> = (0..n_epochs)
        .map(|e| copy.data.iter().map(|row| row[e * len..(e + 1) * len].to_vec()).collect())
        .collect();
    Ok((
        reject_epochs_detailed(&epochs, config.amp_threshold_uv, config.kurtosis_sd),
        config.rejection_epoch_s,
    ))
}

/// Full preprocessing chain producing clean condition epochs.
///
/// Stages: bad-channel detection on the raw data; an analysis copy
/// (lowpass, downsample, highpass) that yields 1-s rejection statistics;
/// final lowpass and highpass on the full-rate data; common-average
/// reference over good channels; spline repair of bad channels; resampling
/// to the output rate; and cutting into condition epochs. A condition epoch
/// is flagged if any overlapping 1-s span was rejected.
///
/// Without `trials`, the recording is cut into consecutive epochs.
pub fn preprocess_pipeline(
    rec: &EegRecording,
    trials: Option<&[TrialWindow]>,
    config: &PreprocConfig,
) -> Result<EpochSet> {
    let duration = rec.n_samples() as f64 / rec.rate;
    let empty = |bad: Vec<usize>| EpochSet {
        epochs: Vec::new(),
        rate: config.output_rate,
        epoch_s: config.epoch_s,
        rejection_mask: Vec::new(),
        rejection_reasons: Vec::new(),
        trial_meta: Vec::new(),
        channel_labels: rec.channel_labels.clone(),
        bad_channels: bad,
    };
    if duration < config.epoch_s {
        warn!(
            "recording lasts {duration:.2} s, shorter than one {} s epoch; no epochs produced",
            config.epoch_s
        );
        return Ok(empty(Vec::new()));
    }
    if let Some(trials) = trials {
        for t in trials {
            if t.offset_s < 0.0 || t.offset_s + t.duration_s > duration + 1e-9 {
                return Err(Error::LengthMismatch(format!(
                    "trial {} spans {:.3}..{:.3} s but the recording lasts {duration:.3} s",
                    t.meta.trial_id,
                    t.offset_s,
                    t.offset_s + t.duration_s
                )));
            }
        }
    }

    let bad = detect_bad_channels(rec);
    let good: Vec<usize> = (0..rec.n_channels()).filter(|c| !bad.contains(c)).collect();
    let (short_reasons, short_s) = analysis_rejection(&rec.select(&good), config)?;

    let lp = fir(FilterKind::Lowpass, config.final_lowpass, rec.rate)?;
    let hp = fir(FilterKind::Highpass, config.final_highpass, rec.rate)?;
    let filtered = rec.map_channels(|s| apply_zero_phase(&hp, &apply_zero_phase(&lp, s)?))?;

    let referenced = rereference_common_average(&filtered.select(&good));
    let mut merged = filtered.clone();
    for (k, &c) in good.iter().enumerate() {
        merged.data[c] = referenced.data[k].clone();
    }
    let repaired = spherical_interpolate(&merged, &bad)?;
    let out = repaired.map_channels(|s| resample(s, config.output_rate))?;

    let windows: Vec<(f64, f64, Option<TrialMeta>)> = match trials {
        Some(ts) => ts
            .iter()
            .map(|t| (t.offset_s, t.duration_s, Some(t.meta.clone())))
            .collect(),
        None => {
            let n = (duration / config.epoch_s).floor() as usize;
            (0..n)
                .map(|k| (k as f64 * config.epoch_s, config.epoch_s, None))
                .collect()
        }
    };

    let mut set = empty(bad);
    for (offset, dur, meta) in windows {
        let start = (offset * out.rate).round() as usize;
        let len = (dur * out.rate).round() as usize;
        if start + len > out.n_samples() {
            return Err(Error::LengthMismatch(format!(
                "epoch at {offset:.3} s exceeds the resampled recording"
            )));
        }
        let epoch: Epoch = out.data.iter().map(|row| row[start..start + len].to_vec()).collect();
        let reason = short_reasons
            .iter()
            .enumerate()
            .filter(|(j, _)| {
                let (s0, s1) = (*j as f64 * short_s, (*j + 1) as f64 * short_s);
                s1 > offset && s0 < offset + dur
            })
            .find_map(|(_, r)| *r);
        set.epochs.push(epoch);
        set.rejection_mask.push(reason.is_some());
        set.rejection_reasons.push(reason);
        set.trial_meta.push(meta);
    }
    Ok(set)
}
