//! Autocorrelation pitch tracking, harmonicity and intensity.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigcore::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchConfig {
    pub floor_hz: f64,
    pub ceiling_hz: f64,
    pub frame_s: f64,
    pub hop_s: f64,
    /// Strength of the unvoiced candidate in loud frames.
    pub voicing_threshold: f64,
    /// Relative frame peak below which the unvoiced candidate gains strength.
    pub silence_threshold: f64,
    /// Strength bonus per octave toward higher pitch.
    pub octave_cost: f64,
    /// Path penalty per octave of f0 change between neighbouring frames.
    pub octave_jump_cost: f64,
    /// Path penalty for a voicing change between neighbouring frames.
    pub voiced_unvoiced_cost: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self {
            floor_hz: 75.0,
            ceiling_hz: 600.0,
            frame_s: 0.04,
            hop_s: 0.01,
            voicing_threshold: 0.45,
            silence_threshold: 0.03,
            octave_cost: 0.01,
            octave_jump_cost: 0.35,
            voiced_unvoiced_cost: 0.14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchTrack {
    /// Frame centers.
    pub times_s: Vec<f64>,
    /// f0 of voiced frames, `None` for unvoiced ones.
    pub f0_hz: Vec<Option<f64>>,
    /// Normalized autocorrelation at the chosen lag (0 for unvoiced frames).
    pub strength: Vec<f64>,
    pub floor_hz: f64,
    pub ceiling_hz: f64,
}

impl PitchTrack {
    pub fn voiced(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.f0_hz.iter().enumerate().filter_map(|(i, f)| f.map(|v| (i, v)))
    }

    pub fn n_voiced(&self) -> usize {
        self.f0_hz.iter().flatten().count()
    }

    /// f0 at time `t` from the nearest frame, if voiced.
    pub fn f0_at(&self, t: f64) -> Option<f64> {
        if self.times_s.is_empty() {
            return None;
        }
        let hop = if self.times_s.len() > 1 { self.times_s[1] - self.times_s[0] } else { 1.0 };
        let i = ((t - self.times_s[0]) / hop).round();
        if i < 0.0 || i as usize >= self.times_s.len() {
            return None;
        }
        self.f0_hz[i as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchStats {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos())
        .collect()
}

/// Autocorrelation for lags 0..n via zero-padded FFT.
fn autocorr(x: &[f64], planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = x.len();
    let m = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(m, Complex64::new(0.0, 0.0));
    planner.plan_fft_forward(m).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex64::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    buf[..n].iter().map(|c| c.re / m as f64).collect()
}

struct FrameAnalyzer {
    window: Vec<f64>,
    window_ac: Vec<f64>,
    planner: FftPlanner<f64>,
    min_lag: f64,
    max_lag: f64,
}

impl FrameAnalyzer {
    fn new(frame_len: usize, rate: f64, config: &PitchConfig) -> Self {
        let window = hann(frame_len);
        let mut planner = FftPlanner::new();
        let ac = autocorr(&window, &mut planner);
        let window_ac = ac.iter().map(|v| v / ac[0]).collect();
        Self {
            window,
            window_ac,
            planner,
            min_lag: rate / config.ceiling_hz,
            max_lag: (rate / config.floor_hz).min(frame_len as f64 / 2.0),
        }
    }

    /// Window-corrected normalized autocorrelation of one frame.
    fn normalized_ac(&mut self, frame: &[f64]) -> Option<Vec<f64>> {
        let mean = frame.iter().sum::<f64>() / frame.len() as f64;
        let x: Vec<f64> = frame.iter().zip(&self.window).map(|(v, w)| (v - mean) * w).collect();
        let ac = autocorr(&x, &mut self.planner);
        if !(ac[0] > 0.0) {
            return None;
        }
        let hi = self.max_lag.ceil() as usize + 1;
        Some(
            (0..=hi.min(ac.len() - 1))
                .map(|l| ac[l] / ac[0] / self.window_ac[l])
                .collect(),
        )
    }

    /// Autocorrelation peaks as (f0, autocorrelation, strength), strongest
    /// first, at most `MAX_CANDIDATES`.
    fn candidates(&self, r: &[f64], floor_hz: f64, rate: f64, octave_cost: f64) -> Vec<Candidate> {
        let lo = (self.min_lag.floor() as usize).max(1);
        let hi = (self.max_lag.floor() as usize).min(r.len() - 2);
        let mut out = Vec::new();
        for l in lo..=hi {
            if !(r[l] > r[l - 1] && r[l] >= r[l + 1]) {
                continue;
            }
            let (a, b, c) = (r[l - 1], r[l], r[l + 1]);
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
            let lag = l as f64 + shift;
            if lag < self.min_lag || lag > self.max_lag {
                continue;
            }
            let value = b - 0.25 * (a - c) * shift;
            out.push(Candidate {
                f0: Some(rate / lag),
                value,
                strength: value - octave_cost * (floor_hz * lag / rate).log2(),
            });
        }
        out.sort_by(|x, y| y.strength.total_cmp(&x.strength));
        out.truncate(MAX_CANDIDATES);
        out
    }
}

const MAX_CANDIDATES: usize = 15;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    /// `None` for the unvoiced candidate.
    f0: Option<f64>,
    value: f64,
    strength: f64,
}

/// Highest-scoring candidate sequence: summed strengths minus octave-jump
/// and voicing-change penalties between neighbouring frames.
fn best_path(frames: &[Vec<Candidate>], config: &PitchConfig) -> Vec<Candidate> {
    let transition = |a: &Candidate, b: &Candidate| match (a.f0, b.f0) {
        (None, None) => 0.0,
        (Some(x), Some(y)) => config.octave_jump_cost * (x / y).log2().abs(),
        _ => config.voiced_unvoiced_cost,
    } * 0.01
        / config.hop_s;
    let mut score: Vec<f64> = frames[0].iter().map(|c| c.strength).collect();
    let mut back: Vec<Vec<usize>> = vec![Vec::new()];
    for t in 1..frames.len() {
        let mut next = Vec::with_capacity(frames[t].len());
        let mut from = Vec::with_capacity(frames[t].len());
        for c in &frames[t] {
            let (j, s) = frames[t - 1]
                .iter()
                .zip(&score)
                .map(|(p, s)| s - transition(p, c))
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |b, (j, s)| if s > b.1 { (j, s) } else { b });
            next.push(s + c.strength);
            from.push(j);
        }
        score = next;
        back.push(from);
    }
    let mut j = score
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (j, &s)| if s > b.1 { (j, s) } else { b })
        .0;
    let mut path = vec![frames[frames.len() - 1][j]; frames.len()];
    for t in (1..frames.len()).rev() {
        path[t] = frames[t][j];
        j = back[t][j];
    }
    path[0] = frames[0][j];
    path
}

/// Autocorrelation pitch: 40 ms Hann frames every 10 ms, window-corrected
/// normalized autocorrelation peaks between the ceiling and floor periods
/// with a small bonus toward higher candidates, one unvoiced candidate per
/// frame that grows stronger as the frame gets quieter, and the best path
/// through the candidates under octave-jump and voicing-change penalties.
pub fn pitch_track(audio: &Signal, config: &PitchConfig) -> Result<PitchTrack> {
    if !(config.floor_hz > 0.0 && config.ceiling_hz > config.floor_hz) {
        return Err(Error::invalid("pitch floor must be positive and below the ceiling"));
    }
    if config.ceiling_hz >= audio.rate / 2.0 {
        return Err(Error::invalid(format!(
            "pitch ceiling {} Hz needs a sample rate above {} Hz",
            config.ceiling_hz,
            2.0 * config.ceiling_hz
        )));
    }
    let rate = audio.rate;
    let needed = (0.1 * rate).ceil() as usize;
    if audio.len() < needed {
        return Err(Error::TooShort { needed, got: audio.len() });
    }
    let frame_len = (config.frame_s * rate).round() as usize;
    let hop = config.hop_s * rate;
    let n_frames = ((audio.len() - frame_len) as f64 / hop).floor() as usize + 1;
    let x = &audio.samples;
    let global_peak = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut analyzer = FrameAnalyzer::new(frame_len, rate, config);

    let mut times = Vec::with_capacity(n_frames);
    let mut frames = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let start = (i as f64 * hop).round() as usize;
        let frame = &x[start..start + frame_len];
        times.push((start as f64 + frame_len as f64 / 2.0) / rate);
        let local_peak = frame.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let relative = if global_peak > 0.0 { local_peak / global_peak } else { 0.0 };
        let unvoiced = config.voicing_threshold
            + (2.0 - relative / (config.silence_threshold / (1.0 + config.voicing_threshold))).max(0.0);
        let mut cands = vec![Candidate { f0: None, value: 0.0, strength: unvoiced }];
        if relative > 0.0 {
            if let Some(r) = analyzer.normalized_ac(frame) {
                cands.extend(analyzer.candidates(&r, config.floor_hz, rate, config.octave_cost));
            }
        }
        frames.push(cands);
    }
    let path = best_path(&frames, config);
    let f0 = path.iter().map(|c| c.f0).collect();
    let strength = path.iter().map(|c| if c.f0.is_some() { c.value.min(1.0) } else { 0.0 }).collect();
    Ok(PitchTrack {
        times_s: times,
        f0_hz: f0,
        strength,
        floor_hz: config.floor_hz,
        ceiling_hz: config.ceiling_hz,
    })
}

/// Summary over voiced frames; `Unvoiced` when there are none.
pub fn pitch_stats(track: &PitchTrack) -> Result<PitchStats> {
    let mut v: Vec<f64> = track.voiced().map(|(_, f)| f).collect();
    if v.is_empty() {
        return Err(Error::Unvoiced);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    v.sort_by(f64::total_cmp);
    let k = v.len();
    let median = if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) };
    Ok(PitchStats {
        mean,
        median,
        sd,
        min: v[0],
        max: v[k - 1],
    })
}

/// Mean noise-to-harmonics ratio `(1 − r)/r` over voiced frames, `r` the
/// normalized autocorrelation at the pitch lag.
pub fn mean_nhr(track: &PitchTrack) -> Result<f64> {
    let vals: Vec<f64> = track
        .voiced()
        .map(|(i, _)| {
            let r = track.strength[i].clamp(1e-6, 1.0);
            (1.0 - r) / r
        })
        .collect();
    if vals.is_empty() {
        return Err(Error::Unvoiced);
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

pub const INTENSITY_FRAME_S: f64 = 0.032;
pub const INTENSITY_HOP_S: f64 = 0.008;
/// Reference pressure for dB SPL (samples are taken as pascals).
pub const REFERENCE_PRESSURE: f64 = 2e-5;
/// Lower bound of the intensity contour; digital silence sits here.
pub const INTENSITY_FLOOR_DB: f64 = -100.0;

/// Intensity contour in dB: Hann-weighted mean square of each demeaned
/// 32 ms frame relative to (20 µPa)², floored at -100 dB.
pub fn intensity_contour(audio: &Signal) -> Result<Vec<f64>> {
    let rate = audio.rate;
    let frame_len = (INTENSITY_FRAME_S * rate).round() as usize;
    if audio.len() < frame_len || frame_len < 2 {
        return Err(Error::TooShort { needed: frame_len.max(2), got: audio.len() });
    }
    let hop = INTENSITY_HOP_S * rate;
    let n_frames = ((audio.len() - frame_len) as f64 / hop).floor() as usize + 1;
    let w = hann(frame_len);
    let wsum: f64 = w.iter().sum();
    Ok((0..n_frames)
        .map(|i| {
            let start = (i as f64 * hop).round() as usize;
            let frame = &audio.samples[start..start + frame_len];
            let mean = frame.iter().sum::<f64>() / frame_len as f64;
            let ms = frame.iter().zip(&w).map(|(v, wi)| wi * (v - mean) * (v - mean)).sum::<f64>() / wsum;
            let db = 10.0 * (ms / (REFERENCE_PRESSURE * REFERENCE_PRESSURE)).log10();
            if db.is_finite() { db.max(INTENSITY_FLOOR_DB) } else { INTENSITY_FLOOR_DB }
        })
        .collect())
}

pub fn min_intensity(audio: &Signal) -> Result<f64> {
    Ok(intensity_contour(audio)?.into_iter().fold(f64::INFINITY, f64::min))
}
