use rand_distr::{Distribution, StandardNormal};

use crate::decoder::LAG_STEP_MS;
use crate::error::{Error, Result};
use crate::seed;

/// Default temporal profile: Gabor peak at 250 ms.
const GABOR_PEAK_MS: f64 = 250.0;
const GABOR_SIGMA_MS: f64 = 20.0;
const GABOR_CARRIER_HZ: f64 = 4.0;

/// Forward response, channels × lags (µV per unit envelope), lag ℓ at ℓ·15.625 ms.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardKernel {
    pub weights: Vec<Vec<f64>>,
    pub peak_lag_ms: f64,
}

impl ForwardKernel {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() || weights[0].is_empty() {
            return Err(Error::invalid("kernel needs at least one channel and one lag"));
        }
        let n_lags = weights[0].len();
        if weights.iter().any(|w| w.len() != n_lags) {
            return Err(Error::invalid("all kernel channels need the same number of lags"));
        }
        if weights.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("kernel weights must be finite"));
        }
        let mut profile = vec![0.0; n_lags];
        for w in &weights {
            for (p, v) in profile.iter_mut().zip(w) {
                *p += v * v;
            }
        }
        let peak = profile
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
            .0;
        Ok(Self {
            weights,
            peak_lag_ms: peak as f64 * LAG_STEP_MS,
        })
    }

    /// Separable kernel: `loading[c] · profile[ℓ]`.
    pub fn separable(loading: &[f64], profile: &[f64]) -> Result<Self> {
        Self::new(
            loading
                .iter()
                .map(|a| profile.iter().map(|p| a * p).collect())
                .collect(),
        )
    }

    /// Gabor profile peaking at 250 ms over lags 0..=32 with a seeded
    /// Gaussian spatial loading of unit mean square.
    pub fn gabor(n_channels: usize, seed: u64) -> Result<Self> {
        let profile: Vec<f64> = (0..=32)
            .map(|l| {
                let dt = (l as f64 * LAG_STEP_MS - GABOR_PEAK_MS) / 1000.0;
                let s = GABOR_SIGMA_MS / 1000.0;
                (-dt * dt / (2.0 * s * s)).exp() * (2.0 * std::f64::consts::PI * GABOR_CARRIER_HZ * dt).cos()
            })
            .collect();
        Self::separable(&random_loading(n_channels, seed), &profile)
    }

    /// Response at a single lag only.
    pub fn single_lag(n_channels: usize, lag: usize, seed: u64) -> Result<Self> {
        let mut profile = vec![0.0; lag + 1];
        profile[lag] = 1.0;
        Self::separable(&random_loading(n_channels, seed), &profile)
    }

    /// No stimulus-driven response.
    pub fn null(n_channels: usize, n_lags: usize) -> Self {
        Self {
            weights: vec![vec![0.0; n_lags]; n_channels],
            peak_lag_ms: 0.0,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            weights: self
                .weights
                .iter()
                .map(|w| w.iter().map(|v| v * factor).collect())
                .collect(),
            peak_lag_ms: self.peak_lag_ms,
        }
    }

    pub fn n_channels(&self) -> usize {
        self.weights.len()
    }

    pub fn n_lags(&self) -> usize {
        self.weights[0].len()
    }

    pub fn is_null(&self) -> bool {
        self.weights.iter().flatten().all(|v| *v == 0.0)
    }
}

fn random_loading(n_channels: usize, seed: u64) -> Vec<f64> {
    let mut rng = seed::stream(seed, &[seed::hash_str("loading")]);
    let raw: Vec<f64> = (0..n_channels).map(|_| StandardNormal.sample(&mut rng)).collect();
    let rms = (raw.iter().map(|v| v * v).sum::<f64>() / n_channels as f64).sqrt();
    raw.iter().map(|v| v / rms).collect()
}
