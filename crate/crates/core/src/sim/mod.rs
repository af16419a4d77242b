//! Synthetic forward-model data: envelope-like stimuli, known spatiotemporal
//! kernels and controlled noise, for end-to-end checks of the decoder.

mod kernel;

pub use kernel::ForwardKernel;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::conditions::Cell;
use crate::decoder::TrialPair;
use crate::envelope::EnvelopeSeries;
use crate::error::{Error, Result};
use crate::seed;
use crate::sigcore::fft_convolve;
use crate::ANALYSIS_RATE_HZ;

/// Envelope pass band of the surrogate stimulus.
const ENV_BAND_HZ: (f64, f64) = (1.0, 10.0);

/// Share of noise power in the component common to all channels.
const SHARED_NOISE_FRACTION: f64 = 0.2;

/// Noise amplitude specification for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    /// Per-channel ratio of signal to noise power, in dB.
    SnrDb(f64),
    /// Absolute noise power per channel (µV²).
    Power(f64),
    /// Unit-power noise and no stimulus-driven signal.
    NoiseOnly,
}

fn gaussian_vec<R: rand::Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn mean_power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

fn demeaned(x: &[f64]) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - m).collect()
}

/// Shape white noise in the frequency domain; `gain(f)` multiplies bin `f` (Hz).
fn spectral_shape(white: &[f64], rate: f64, gain: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = white.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = white.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * rate / n as f64;
        *c *= gain(f) / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Surrogate speech envelope at 64 Hz: Gaussian noise band-limited to
/// 1–10 Hz, shifted to be non-negative and scaled to unit variance.
pub fn gen_envelope(duration_s: f64, seed: u64) -> Result<EnvelopeSeries> {
    if !(duration_s >= 1.0 && duration_s.is_finite()) {
        return Err(Error::invalid(format!("duration must be at least 1 s, got {duration_s}")));
    }
    let n = (duration_s * ANALYSIS_RATE_HZ).round() as usize;
    let mut rng = seed::stream(seed, &[seed::hash_str("envelope")]);
    let white = gaussian_vec(&mut rng, n);
    let band = spectral_shape(&white, ANALYSIS_RATE_HZ, |f| {
        if (ENV_BAND_HZ.0..=ENV_BAND_HZ.1).contains(&f) { 1.0 } else { 0.0 }
    });
    let min = band.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = band.iter().map(|v| v - min).collect();
    let sd = crate::sigcore::variance(&shifted).sqrt();
    Ok(EnvelopeSeries {
        samples: shifted.iter().map(|v| v / sd).collect(),
        rate: ANALYSIS_RATE_HZ,
        source_id: format!("sim-{seed}"),
    })
}

/// Generated EEG for one trial together with its noise-free part.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrial {
    /// Channels × samples.
    pub eeg: Vec<Vec<f64>>,
    pub envelope: Vec<f64>,
    pub signal_power: Vec<f64>,
    pub noise_power: Vec<f64>,
}

impl SimTrial {
    /// Per-channel 10·log10(signal power / noise power) actually realized.
    pub fn achieved_snr_db(&self) -> Vec<f64> {
        self.signal_power
            .iter()
            .zip(&self.noise_power)
            .map(|(s, n)| 10.0 * (s / n).log10())
            .collect()
    }

    pub fn into_pair(
        self,
        cell: Cell,
        subject_id: impl Into<String>,
        speaker_id: impl Into<String>,
        trial_id: impl Into<String>,
    ) -> Result<TrialPair> {
        TrialPair::new(self.eeg, self.envelope, cell, subject_id, speaker_id, trial_id)
    }
}

/// Unit-power noise, 80% independent per channel and 20% a pink component
/// shared by all channels.
fn channel_noise(n_channels: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seed::stream(seed, &[seed::hash_str("noise")]);
    let pink = spectral_shape(&gaussian_vec(&mut rng, n), ANALYSIS_RATE_HZ, |f| {
        if f > 0.0 { 1.0 / f.sqrt() } else { 0.0 }
    });
    let pink_scale = (SHARED_NOISE_FRACTION / mean_power(&pink)).sqrt();
    (0..n_channels)
        .map(|_| {
            let iid = gaussian_vec(&mut rng, n);
            let iid_scale = ((1.0 - SHARED_NOISE_FRACTION) / mean_power(&iid)).sqrt();
            let mixed: Vec<f64> = iid
                .iter()
                .zip(&pink)
                .map(|(a, b)| iid_scale * a + pink_scale * b)
                .collect();
            let p = mean_power(&mixed);
            mixed.iter().map(|v| v / p.sqrt()).collect()
        })
        .collect()
}

/// Forward model `eeg[c][t] = Σ_ℓ kernel[c][ℓ]·env[t−ℓ] + noise[c][t]`,
/// using the demeaned envelope (zero before the trial start).
pub fn gen_trial(
    envelope: &EnvelopeSeries,
    kernel: &ForwardKernel,
    noise: NoiseLevel,
    seed: u64,
) -> Result<SimTrial> {
    let n = envelope.len();
    if kernel.n_lags() >= n {
        return Err(Error::invalid(format!(
            "kernel spans {} lags but the epoch has {n} samples",
            kernel.n_lags()
        )));
    }
    let env = demeaned(&envelope.samples);
    let signal: Vec<Vec<f64>> = match noise {
        NoiseLevel::NoiseOnly => vec![vec![0.0; n]; kernel.n_channels()],
        _ => kernel
            .weights
            .iter()
            .map(|k| fft_convolve(&env, k)[..n].to_vec())
            .collect(),
    };
    let signal_power: Vec<f64> = signal.iter().map(|s| mean_power(s)).collect();
    let target_noise: Vec<f64> = match noise {
        NoiseLevel::SnrDb(db) => {
            if !db.is_finite() {
                return Err(Error::invalid(format!("SNR must be finite, got {db}")));
            }
            let mean_sp = signal_power.iter().sum::<f64>() / signal_power.len() as f64;
            if !(mean_sp > 0.0) {
                return Err(Error::invalid(
                    "SNR is undefined for a kernel that produces no signal",
                ));
            }
            let ratio = 10f64.powf(db / 10.0);
            // a silent channel gets the noise level of an average channel
            signal_power
                .iter()
                .map(|&sp| if sp > 0.0 { sp } else { mean_sp } / ratio)
                .collect()
        }
        NoiseLevel::Power(p) => {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!("noise power must be positive, got {p}")));
            }
            vec![p; signal.len()]
        }
        NoiseLevel::NoiseOnly => vec![1.0; signal.len()],
    };
    let unit = channel_noise(signal.len(), n, seed);
    let eeg: Vec<Vec<f64>> = signal
        .iter()
        .zip(&unit)
        .zip(&target_noise)
        .map(|((s, u), p)| s.iter().zip(u).map(|(a, b)| a + p.sqrt() * b).collect())
        .collect();
    Ok(SimTrial {
        eeg,
        envelope: envelope.samples.clone(),
        signal_power,
        noise_power: target_noise,
    })
}

/// Generator settings for one condition cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub cell: Cell,
    pub kernel: ForwardKernel,
    pub noise: NoiseLevel,
}

/// A synthetic 2×4 study.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub n_subjects: usize,
    pub trials_per_cell: usize,
    pub epoch_s: f64,
    pub cells: Vec<CellSpec>,
    pub seed: u64,
}

impl SimSpec {
    /// Every cell shares one kernel and noise level.
    pub fn uniform(
        n_subjects: usize,
        trials_per_cell: usize,
        kernel: ForwardKernel,
        noise: NoiseLevel,
        seed: u64,
    ) -> Self {
        Self {
            n_subjects,
            trials_per_cell,
            epoch_s: crate::EPOCH_SECONDS,
            cells: Cell::all()
                .into_iter()
                .map(|cell| CellSpec {
                    cell,
                    kernel: kernel.clone(),
                    noise,
                })
                .collect(),
            seed,
        }
    }

    pub fn cell_mut(&mut self, cell: Cell) -> Option<&mut CellSpec> {
        self.cells.iter_mut().find(|c| c.cell == cell)
    }
}

pub fn subject_id(s: usize) -> String {
    format!("sub{:02}", s + 1)
}

/// Trials for every subject × cell. Stimulus envelopes depend on
/// (cell, trial) and are shared across subjects; noise is drawn per
/// (subject, cell, trial). Speaker `k` voices trial `k` of every cell.
pub fn gen_condition_study(spec: &SimSpec) -> Result<Vec<TrialPair>> {
    if spec.n_subjects == 0 || spec.trials_per_cell == 0 || spec.cells.is_empty() {
        return Err(Error::invalid("study needs subjects, trials and cells"));
    }
    let jobs: Vec<(usize, usize, usize)> = (0..spec.n_subjects)
        .flat_map(|s| {
            (0..spec.cells.len()).flat_map(move |c| (0..spec.trials_per_cell).map(move |t| (s, c, t)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(s, c, t)| {
            let cs = &spec.cells[c];
            let cell_tag = seed::hash_str(&cs.cell.to_string());
            let env = gen_envelope(spec.epoch_s, seed::derive(spec.seed, &[cell_tag, t as u64]))?;
            let trial_seed = seed::derive(spec.seed, &[cell_tag, t as u64, s as u64 + 1]);
            let sim = gen_trial(&env, &cs.kernel, cs.noise, trial_seed)?;
            let sub = subject_id(s);
            let trial_id = format!("{sub}-{}-t{:02}", cs.cell, t + 1);
            sim.into_pair(cs.cell, sub, format!("spk{:02}", t + 1), trial_id)
        })
        .collect()
}
