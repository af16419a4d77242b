//! Multitaper spectra, fractal (1/f) fits and periodic band power.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::dpss::dpss;
use crate::error::{Error, Result};
use crate::sigcore::Signal;

pub const DEFAULT_SMOOTHING_HZ: f64 = 0.5;
pub const DEFAULT_RANGE_HZ: [f64; 2] = [0.3, 4500.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    pub freqs_hz: Vec<f64>,
    pub power: Vec<f64>,
    pub n_tapers: usize,
    pub smoothing_hz: f64,
}

/// One-sided multitaper power spectral density (units²/Hz) on the FFT grid
/// of the whole segment, restricted to `range_hz` (upper end clipped to
/// Nyquist). Tapers: DPSS with NW = T·smoothing, K = floor(2·T·smoothing) − 1.
pub fn multitaper_psd(segment: &Signal, smoothing_hz: f64, range_hz: [f64; 2]) -> Result<PowerSpectrum> {
    if !(smoothing_hz > 0.0) {
        return Err(Error::invalid(format!("smoothing must be positive, got {smoothing_hz}")));
    }
    if !(range_hz[0] >= 0.0 && range_hz[0] < range_hz[1]) {
        return Err(Error::invalid(format!("invalid frequency range {range_hz:?}")));
    }
    let n = segment.len();
    let rate = segment.rate;
    let duration = n as f64 / rate;
    let k = (2.0 * duration * smoothing_hz).floor() as i64 - 1;
    if k < 1 {
        return Err(Error::TooShort {
            needed: (2.0 / smoothing_hz * rate).ceil() as usize,
            got: n,
        });
    }
    let k = k as usize;
    let tapers = dpss(n, duration * smoothing_hz, k)?;
    let mean = segment.samples.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = segment.samples.iter().map(|v| v - mean).collect();

    let nyquist = rate / 2.0;
    let hi = range_hz[1].min(nyquist);
    let first = (range_hz[0] * n as f64 / rate).ceil() as usize;
    let last = ((hi * n as f64 / rate).floor() as usize).min(n / 2);
    if first > last {
        return Err(Error::invalid("frequency range contains no FFT bin"));
    }

    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let eigen: Vec<Vec<f64>> = tapers
        .par_iter()
        .map(|taper| {
            let mut buf: Vec<Complex64> = x.iter().zip(taper).map(|(a, w)| Complex64::new(a * w, 0.0)).collect();
            fft.process(&mut buf);
            buf[first..=last].iter().map(|c| c.norm_sqr()).collect()
        })
        .collect();
    let power: Vec<f64> = (first..=last)
        .enumerate()
        .map(|(j, bin)| {
            let mean = eigen.iter().map(|e| e[j]).sum::<f64>() / k as f64;
            let one_sided = if bin == 0 || (n % 2 == 0 && bin == n / 2) { 1.0 } else { 2.0 };
            one_sided * mean / rate
        })
        .collect();
    Ok(PowerSpectrum {
        freqs_hz: (first..=last).map(|b| b as f64 * rate / n as f64).collect(),
        power,
        n_tapers: k,
        smoothing_hz,
    })
}

/// Power-law background fit `log10 P = offset − alpha·log10 f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractalFit {
    pub alpha: f64,
    pub offset: f64,
    /// Spectrum divided by the fitted background.
    pub ratio: PowerSpectrum,
}

const ROBUST_ITERATIONS: usize = 3;
const BISQUARE_C: f64 = 4.685;

fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for ((a, b), c) in x.iter().zip(y).zip(w) {
        sxy += c * (a - mx) * (b - my);
        sxx += c * (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Divide a spectrum by its fitted 1/f^alpha background. The fit is a
/// log-log least-squares line refined by three Tukey-bisquare reweighting
/// passes, which discounts spectral peaks.
pub fn periodic_fraction(psd: &PowerSpectrum) -> Result<FractalFit> {
    let support: Vec<usize> = (0..psd.freqs_hz.len()).filter(|&i| psd.freqs_hz[i] > 0.0).collect();
    if support.len() < 3 {
        return Err(Error::TooShort { needed: 3, got: support.len() });
    }
    if let Some(&i) = support.iter().find(|&&i| !(psd.power[i] > 0.0)) {
        return Err(Error::invalid(format!(
            "non-positive power {} at {} Hz",
            psd.power[i], psd.freqs_hz[i]
        )));
    }
    let x: Vec<f64> = support.iter().map(|&i| psd.freqs_hz[i].log10()).collect();
    let y: Vec<f64> = support.iter().map(|&i| psd.power[i].log10()).collect();
    let mut w = vec![1.0; x.len()];
    let (mut b0, mut b1) = weighted_line(&x, &y, &w);
    for _ in 0..ROBUST_ITERATIONS {
        let resid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - (b0 + b1 * a)).collect();
        let mut abs: Vec<f64> = resid.iter().map(|r| r.abs()).collect();
        let mad = median(&mut abs) / 0.6745;
        if !(mad > 0.0) {
            break;
        }
        for (wi, r) in w.iter_mut().zip(&resid) {
            let u = r / (BISQUARE_C * mad);
            *wi = if u.abs() < 1.0 { (1.0 - u * u).powi(2) } else { 0.0 };
        }
        (b0, b1) = weighted_line(&x, &y, &w);
    }
    let ratio_power = psd
        .freqs_hz
        .iter()
        .zip(&psd.power)
        .map(|(&f, &p)| {
            if f > 0.0 {
                p / 10f64.powf(b0 + b1 * f.log10())
            } else {
                1.0
            }
        })
        .collect();
    Ok(FractalFit {
        alpha: -b1,
        offset: b0,
        ratio: PowerSpectrum {
            freqs_hz: psd.freqs_hz.clone(),
            power: ratio_power,
            n_tapers: psd.n_tapers,
            smoothing_hz: psd.smoothing_hz,
        },
    })
}

/// Periodic power per second in four bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPower {
    pub freq_rsum_env: f64,
    pub freq_rsum_low: f64,
    pub freq_rsum_mid: f64,
    pub freq_rsum_high: f64,
}

/// Band edges in Hz, lower edge inclusive, upper exclusive.
pub const BANDS_HZ: [(f64, f64); 4] = [(0.3, 30.0), (30.0, 300.0), (300.0, 1000.0), (1000.0, 4500.0)];

/// Sum of `max(ratio − 1, 0)` over each band's bins, divided by the segment duration.
pub fn band_periodic_power(ratio: &PowerSpectrum, duration_s: f64) -> Result<BandPower> {
    if !(duration_s > 0.0) {
        return Err(Error::invalid(format!("duration must be positive, got {duration_s}")));
    }
    let sums = BANDS_HZ.map(|(lo, hi)| {
        ratio
            .freqs_hz
            .iter()
            .zip(&ratio.power)
            .filter(|(f, _)| **f >= lo && **f < hi)
            .map(|(_, r)| (r - 1.0).max(0.0))
            .sum::<f64>()
            / duration_s
    });
    Ok(BandPower {
        freq_rsum_env: sums[0],
        freq_rsum_low: sums[1],
        freq_rsum_mid: sums[2],
        freq_rsum_high: sums[3],
    })
}
