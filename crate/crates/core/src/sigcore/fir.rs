use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{conv::fft_convolve, odd_extend, Signal};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Lowpass,
    Highpass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Hamming,
    Hann,
}

impl Window {
    /// Window value at tap `n` of an `order`-th order filter (`order + 1` taps).
    fn value(self, n: usize, order: usize) -> f64 {
        let phase = 2.0 * PI * n as f64 / order as f64;
        match self {
            Window::Hamming => 0.54 - 0.46 * phase.cos(),
            Window::Hann => 0.5 - 0.5 * phase.cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirDesign {
    pub kind: FilterKind,
    pub cutoff_hz: f64,
    pub order: usize,
    pub window: Window,
    pub rate: f64,
}

/// Linear-phase windowed-sinc FIR filter with `order + 1` symmetric taps.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    pub taps: Vec<f64>,
    pub design: FirDesign,
}

impl FirFilter {
    /// Magnitude of the frequency response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / self.design.rate;
        let (mut re, mut im) = (0.0, 0.0);
        for (n, h) in self.taps.iter().enumerate() {
            let phi = w * n as f64;
            re += h * phi.cos();
            im -= h * phi.sin();
        }
        re.hypot(im)
    }

    /// Group delay in samples.
    pub fn delay(&self) -> usize {
        self.design.order / 2
    }
}

/// Design a windowed-sinc lowpass or highpass filter.
///
/// Lowpass taps are normalized to unit DC gain; the highpass is the spectral
/// inversion of the matching lowpass, so its DC gain is zero by construction.
pub fn design_fir(
    kind: FilterKind,
    cutoff_hz: f64,
    order: usize,
    window: Window,
    rate: f64,
) -> Result<FirFilter> {
    if !(rate > 0.0) {
        return Err(Error::invalid(format!("sample rate must be positive, got {rate}")));
    }
    if !(cutoff_hz > 0.0 && cutoff_hz < rate / 2.0) {
        return Err(Error::invalid(format!(
            "cutoff {cutoff_hz} Hz must lie strictly between 0 and Nyquist ({} Hz)",
            rate / 2.0
        )));
    }
    if order < 2 || order % 2 != 0 {
        return Err(Error::invalid(format!("filter order must be even and >= 2, got {order}")));
    }
    let fc = cutoff_hz / rate;
    let mid = (order / 2) as f64;
    let mut taps: Vec<f64> = (0..=order)
        .map(|n| {
            let t = n as f64 - mid;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * t).sin() / (PI * t)
            };
            sinc * window.value(n, order)
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|h| *h /= dc);
    // symmetrize so the linear-phase property holds to the last bit
    for n in 0..order / 2 {
        let avg = 0.5 * (taps[n] + taps[order - n]);
        taps[n] = avg;
        taps[order - n] = avg;
    }
    if kind == FilterKind::Highpass {
        taps.iter_mut().for_each(|h| *h = -*h);
        taps[order / 2] += 1.0;
    }
    Ok(FirFilter {
        taps,
        design: FirDesign {
            kind,
            cutoff_hz,
            order,
            window,
            rate,
        },
    })
}

/// Apply an FIR filter without phase shift.
///
/// The symmetric filter's group delay is removed by centering the convolution
/// output; edges are odd-reflected over one filter length.
pub fn apply_zero_phase(filter: &FirFilter, signal: &Signal) -> Result<Signal> {
    let len = filter.taps.len();
    let needed = 3 * len + 1;
    if signal.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: signal.len(),
        });
    }
    let padded = odd_extend(&signal.samples, len);
    let full = fft_convolve(&padded, &filter.taps);
    let start = len + filter.delay();
    Ok(Signal {
        samples: full[start..start + signal.len()].to_vec(),
        rate: signal.rate,
    })
}
