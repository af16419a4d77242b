//! Deterministic DSP primitives shared by the envelope, EEG and feature pipelines.

mod conv;
mod fir;
mod gammatone;
mod hilbert;
mod iir;
mod resample;

pub use fir::{apply_zero_phase, design_fir, FilterKind, FirDesign, FirFilter, Window};
pub use gammatone::{erb_hz, GammatoneBank};
pub use hilbert::{analytic_signal, hilbert_envelope};
pub use iir::{butterworth_lowpass, filtfilt, Biquad, IirBiquadChain};
pub use resample::resample;

pub(crate) use conv::fft_convolve;

use crate::error::{Error, Result};

/// A uniformly sampled real time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub samples: Vec<f64>,
    /// Samples per second.
    pub rate: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::invalid(format!("sample rate must be positive, got {rate}")));
        }
        if samples.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, rate })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance (n - 1 denominator).
pub(crate) fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

/// Z-normalize a signal to zero mean and unit sample standard deviation.
pub fn zscore(signal: &Signal) -> Result<Signal> {
    let x = &signal.samples;
    let var = variance(x);
    if !(var > 0.0) {
        return Err(Error::ZeroVariance("cannot z-normalize a constant signal".into()));
    }
    let m = mean(x);
    let sd = var.sqrt();
    Ok(Signal {
        samples: x.iter().map(|v| (v - m) / sd).collect(),
        rate: signal.rate,
    })
}

/// Odd (point) reflection about the first/last sample for out-of-range indices.
pub(crate) fn odd_reflect(x: &[f64], i: isize) -> f64 {
    let n = x.len() as isize;
    if i < 0 {
        let j = (-i).min(n - 1);
        2.0 * x[0] - x[j as usize]
    } else if i >= n {
        let j = (2 * (n - 1) - i).max(0);
        2.0 * x[(n - 1) as usize] - x[j as usize]
    } else {
        x[i as usize]
    }
}

/// Extend `x` by `pad` odd-reflected samples on each side.
pub(crate) fn odd_extend(x: &[f64], pad: usize) -> Vec<f64> {
    let pad = pad as isize;
    (-pad..x.len() as isize + pad)
        .map(|i| odd_reflect(x, i))
        .collect()
}
