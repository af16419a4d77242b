//! Cycle-to-cycle period (jitter) and amplitude (shimmer) perturbation.

use serde::{Deserialize, Serialize};

use super::pitch::PitchTrack;
use crate::error::{Error, Result};
use crate::sigcore::Signal;

/// Longest allowed ratio between neighbouring periods within one run.
pub const MAX_PERIOD_FACTOR: f64 = 1.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterMetrics {
    pub loc: f64,
    /// Seconds.
    pub loc_abs: f64,
    pub rap: f64,
    /// `None` with fewer than five consecutive periods.
    pub ppq5: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShimmerMetrics {
    pub loc: f64,
    pub loc_db: f64,
    pub apq3: f64,
    pub apq5: Option<f64>,
    pub apq11: Option<f64>,
}

/// Sum and count of |x_i − x_{i−1}|.
fn diff_terms(x: &[f64]) -> (f64, usize) {
    let s = x.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    (s, x.len().saturating_sub(1))
}

/// Sum and count of |x_i − mean of the w-point window centred on i|.
fn window_terms(x: &[f64], w: usize) -> (f64, usize) {
    if x.len() < w {
        return (0.0, 0);
    }
    let s = x
        .windows(w)
        .map(|win| (win[w / 2] - win.iter().sum::<f64>() / w as f64).abs())
        .sum();
    (s, x.len() - w + 1)
}

fn pooled(runs: &[Vec<f64>], f: impl Fn(&[f64]) -> (f64, usize)) -> Option<f64> {
    let (s, n) = runs.iter().map(|r| f(r)).fold((0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    (n > 0).then(|| s / n as f64)
}

fn pooled_mean(runs: &[Vec<f64>]) -> f64 {
    let (s, n) = runs.iter().flatten().fold((0.0, 0), |a, v| (a.0 + v, a.1 + 1));
    s / n as f64
}

fn check_positive(runs: &[Vec<f64>], what: &str) -> Result<()> {
    if let Some(v) = runs.iter().flatten().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!("{what} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// Jitter pooled over several runs of consecutive periods (seconds).
pub fn jitter_from_runs(runs: &[Vec<f64>]) -> Result<JitterMetrics> {
    check_positive(runs, "periods")?;
    let longest = runs.iter().map(Vec::len).max().unwrap_or(0);
    if longest < 3 {
        return Err(Error::TooShort { needed: 3, got: longest });
    }
    let mean = pooled_mean(runs);
    let loc_abs = pooled(runs, diff_terms).expect("at least one difference");
    Ok(JitterMetrics {
        loc: loc_abs / mean,
        loc_abs,
        rap: pooled(runs, |r| window_terms(r, 3)).expect("run of three") / mean,
        ppq5: pooled(runs, |r| window_terms(r, 5)).map(|v| v / mean),
    })
}

/// Jitter of one sequence of consecutive periods (seconds).
pub fn jitter_metrics(periods: &[f64]) -> Result<JitterMetrics> {
    jitter_from_runs(&[periods.to_vec()])
}

/// Shimmer pooled over several runs of consecutive cycle peak amplitudes.
pub fn shimmer_from_runs(runs: &[Vec<f64>]) -> Result<ShimmerMetrics> {
    check_positive(runs, "amplitudes")?;
    let longest = runs.iter().map(Vec::len).max().unwrap_or(0);
    if longest < 3 {
        return Err(Error::TooShort { needed: 3, got: longest });
    }
    let mean = pooled_mean(runs);
    let db = pooled(runs, |r| {
        let s = r.windows(2).map(|w| (20.0 * (w[1] / w[0]).log10()).abs()).sum();
        (s, r.len().saturating_sub(1))
    })
    .expect("at least one difference");
    Ok(ShimmerMetrics {
        loc: pooled(runs, diff_terms).expect("at least one difference") / mean,
        loc_db: db,
        apq3: pooled(runs, |r| window_terms(r, 3)).expect("run of three") / mean,
        apq5: pooled(runs, |r| window_terms(r, 5)).map(|v| v / mean),
        apq11: pooled(runs, |r| window_terms(r, 11)).map(|v| v / mean),
    })
}

/// Shimmer of one sequence of consecutive peak amplitudes.
pub fn shimmer_metrics(amplitudes: &[f64]) -> Result<ShimmerMetrics> {
    shimmer_from_runs(&[amplitudes.to_vec()])
}

/// One glottal cycle marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub time_s: f64,
    pub amplitude: f64,
}

fn interpolated_peak(x: &[f64], i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= x.len() {
        return (i as f64, x[i]);
    }
    let (a, b, c) = (x[i - 1], x[i], x[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return (i as f64, b);
    }
    let shift = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    (i as f64 + shift, b - 0.25 * (a - c) * shift)
}

fn argmax(x: &[f64], lo: usize, hi: usize) -> usize {
    (lo..hi).fold(lo, |best, i| if x[i] > x[best] { i } else { best })
}

/// Cycle peaks within each voiced stretch of the pitch track: the first
/// peak is the waveform maximum within one period of the stretch onset,
/// each next one the maximum between 0.8 and 1.25 local periods later.
pub fn glottal_pulses(audio: &Signal, track: &PitchTrack) -> Vec<Vec<Pulse>> {
    let x = &audio.samples;
    let rate = audio.rate;
    let hop = if track.times_s.len() > 1 { track.times_s[1] - track.times_s[0] } else { 0.01 };
    let mut stretches: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<f64> = None;
    for (i, f) in track.f0_hz.iter().enumerate() {
        let t = track.times_s[i];
        match (f.is_some(), open) {
            (true, None) => open = Some(t - hop / 2.0),
            (false, Some(s)) => {
                stretches.push((s, t - hop / 2.0));
                open = None;
            }
            _ => {}
        }
    }
    if let (Some(s), Some(last)) = (open, track.times_s.last()) {
        stretches.push((s, last + hop / 2.0));
    }

    let to_index = |t: f64| ((t * rate).round().max(0.0) as usize).min(x.len());
    stretches
        .iter()
        .map(|&(start, end)| {
            let mut pulses = Vec::new();
            let Some(f0) = track.f0_at(start + hop / 2.0) else { return pulses };
            let (lo, hi) = (to_index(start), to_index((start + 1.0 / f0).min(end)));
            if hi <= lo {
                return pulses;
            }
            let (pos, amp) = interpolated_peak(x, argmax(x, lo, hi));
            pulses.push(Pulse { time_s: pos / rate, amplitude: amp });
            loop {
                let p = pulses.last().expect("non-empty").time_s;
                let Some(f0) = track.f0_at(p).or_else(|| track.f0_at(p - hop)) else { break };
                let period = 1.0 / f0;
                let (lo, hi) = (to_index(p + 0.8 * period), to_index((p + 1.25 * period).min(end)));
                if hi <= lo + 1 {
                    break;
                }
                let (pos, amp) = interpolated_peak(x, argmax(x, lo, hi));
                pulses.push(Pulse { time_s: pos / rate, amplitude: amp });
            }
            pulses
        })
        .filter(|p| p.len() >= 2)
        .collect()
}

/// Split pulses into runs of valid consecutive periods: each period within
/// [1/ceiling, 1/floor] and within a factor of 1.3 of its predecessor.
/// Returns (period runs, amplitude runs); amplitude runs have one more entry.
pub fn cycle_runs(pulses: &[Vec<Pulse>], floor_hz: f64, ceiling_hz: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut periods = Vec::new();
    let mut amps = Vec::new();
    for stretch in pulses {
        let mut run_p: Vec<f64> = Vec::new();
        let mut run_a: Vec<f64> = Vec::new();
        let mut flush = |rp: &mut Vec<f64>, ra: &mut Vec<f64>| {
            if !rp.is_empty() {
                periods.push(std::mem::take(rp));
                amps.push(std::mem::take(ra));
            }
            rp.clear();
            ra.clear();
        };
        for w in stretch.windows(2) {
            let p = w[1].time_s - w[0].time_s;
            let in_range = p >= 1.0 / ceiling_hz && p <= 1.0 / floor_hz;
            let smooth = run_p
                .last()
                .is_none_or(|&q| p / q <= MAX_PERIOD_FACTOR && q / p <= MAX_PERIOD_FACTOR);
            let positive = w[0].amplitude > 0.0 && w[1].amplitude > 0.0;
            if !(in_range && positive) {
                flush(&mut run_p, &mut run_a);
                continue;
            }
            if !smooth {
                flush(&mut run_p, &mut run_a);
            }
            if run_p.is_empty() {
                run_a.push(w[0].amplitude);
            }
            run_p.push(p);
            run_a.push(w[1].amplitude);
        }
        flush(&mut run_p, &mut run_a);
    }
    (periods, amps)
}
