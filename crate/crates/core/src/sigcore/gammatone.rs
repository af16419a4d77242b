use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::Signal;
use crate::error::{Error, Result};

const GAMMA_ORDER: i32 = 4;

/// Equivalent rectangular bandwidth (Glasberg & Moore) in Hz.
pub fn erb_hz(freq_hz: f64) -> f64 {
    24.7 + freq_hz / 9.265
}

/// Log-spaced bank of 4th-order complex all-pole gammatone filters.
///
/// Each band is a cascade of four identical complex one-pole filters with
/// pole `lambda * exp(i * 2 pi cf / fs)`; the pole radius follows the ERB at
/// the center frequency. The real part of the band output is the bandpass
/// signal with unit gain at the center frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct GammatoneBank {
    pub center_frequencies_hz: Vec<f64>,
    pub n_bands: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
}

impl GammatoneBank {
    pub fn new(n_bands: usize, fmin_hz: f64, fmax_hz: f64) -> Result<Self> {
        if n_bands < 2 {
            return Err(Error::invalid("a filterbank needs at least 2 bands"));
        }
        if !(fmin_hz > 0.0 && fmax_hz > fmin_hz) {
            return Err(Error::invalid(format!(
                "band limits must satisfy 0 < fmin < fmax, got {fmin_hz}..{fmax_hz}"
            )));
        }
        let ratio = fmax_hz / fmin_hz;
        let mut cf: Vec<f64> = (0..n_bands)
            .map(|k| fmin_hz * ratio.powf(k as f64 / (n_bands - 1) as f64))
            .collect();
        cf[0] = fmin_hz;
        cf[n_bands - 1] = fmax_hz;
        Ok(Self {
            center_frequencies_hz: cf,
            n_bands,
            fmin_hz,
            fmax_hz,
        })
    }

    /// Complex pole per band at sample rate `rate`.
    pub fn poles(&self, rate: f64) -> Vec<Complex64> {
        // a_gamma = pi (2g-2)! 2^-(2g-2) / ((g-1)!)^2, with g = 4
        let a_gamma = PI * 720.0 / (64.0 * 36.0);
        self.center_frequencies_hz
            .iter()
            .map(|&cf| {
                let b = erb_hz(cf) / a_gamma;
                let lambda = (-2.0 * PI * b / rate).exp();
                Complex64::from_polar(lambda, 2.0 * PI * cf / rate)
            })
            .collect()
    }

    fn check_rate(&self, rate: f64) -> Result<()> {
        if rate <= 2.0 * self.fmax_hz {
            return Err(Error::invalid(format!(
                "sample rate {rate} Hz too low for a {} Hz band (need > {} Hz)",
                self.fmax_hz,
                2.0 * self.fmax_hz
            )));
        }
        Ok(())
    }

    /// Real bandpass output of band `k`.
    pub(crate) fn band_output(&self, pole: Complex64, x: &[f64]) -> Vec<f64> {
        let gain = 2.0 * (1.0 - pole.norm()).powi(GAMMA_ORDER);
        let mut state = [Complex64::new(0.0, 0.0); GAMMA_ORDER as usize];
        x.iter()
            .map(|&v| {
                let mut u = Complex64::new(gain * v, 0.0);
                for s in state.iter_mut() {
                    *s = u + pole * *s;
                    u = *s;
                }
                u.re
            })
            .collect()
    }

    /// Filter `signal` into `n_bands` bandpass signals of the same length.
    pub fn analyze(&self, signal: &Signal) -> Result<Vec<Signal>> {
        self.check_rate(signal.rate)?;
        let poles = self.poles(signal.rate);
        Ok(poles
            .par_iter()
            .map(|&p| Signal {
                samples: self.band_output(p, &signal.samples),
                rate: signal.rate,
            })
            .collect())
    }

    /// Apply `per_band` to every band output and return the results in band
    /// order, without holding all band signals in memory at once.
    pub(crate) fn map_bands<T, F>(&self, signal: &Signal, chunk: usize, per_band: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(Vec<f64>) -> T + Sync,
    {
        self.check_rate(signal.rate)?;
        let poles = self.poles(signal.rate);
        let mut out = Vec::with_capacity(poles.len());
        for group in poles.chunks(chunk.max(1)) {
            let part: Vec<T> = group
                .par_iter()
                .map(|&p| per_band(self.band_output(p, &signal.samples)))
                .collect();
            out.extend(part);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bank_endpoints_and_spacing() {
        let bank = GammatoneBank::new(128, 100.0, 6500.0).unwrap();
        let cf = &bank.center_frequencies_hz;
        assert_eq!(cf[0], 100.0);
        assert_eq!(cf[127], 6500.0);
        // 100 * 65^(64/127)
        assert!((cf[64] - 819.585_247_432_711).abs() < 1e-9, "cf[64] = {}", cf[64]);
        for k in 0..128 {
            let expect = 100.0 * 65f64.powf(k as f64 / 127.0);
            assert!(((cf[k] - expect) / expect).abs() < 1e-12);
        }
        assert!(cf.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn tone_peaks_in_nearest_band() {
        let bank = GammatoneBank::new(128, 100.0, 6500.0).unwrap();
        let rate = 16000.0;
        let x: Vec<f64> = (0..8000)
            .map(|i| (2.0 * PI * 1000.0 * i as f64 / rate).sin())
            .collect();
        let bands = bank.analyze(&Signal::new(x, rate).unwrap()).unwrap();
        assert_eq!(bands.len(), 128);
        let rms: Vec<f64> = bands
            .iter()
            .map(|b| (b.samples[2000..].iter().map(|v| v * v).sum::<f64>() / 6000.0).sqrt())
            .collect();
        let best = (0..128).max_by(|&a, &b| rms[a].total_cmp(&rms[b])).unwrap();
        let nearest = (0..128)
            .min_by(|&a, &b| {
                (bank.center_frequencies_hz[a] - 1000.0)
                    .abs()
                    .total_cmp(&(bank.center_frequencies_hz[b] - 1000.0).abs())
            })
            .unwrap();
        assert_eq!(best, nearest);
        // unit gain at center frequency: rms of a unit sine is 1/sqrt(2)
        assert!((rms[best] - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.02);
    }

    #[test]
    fn rate_too_low_rejected() {
        let bank = GammatoneBank::new(16, 100.0, 6500.0).unwrap();
        let s = Signal::new(vec![0.0; 100], 12000.0).unwrap();
        assert!(bank.analyze(&s).is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        let bank = GammatoneBank::new(12, 100.0, 3000.0).unwrap();
        let x: Vec<f64> = (0..4000).map(|i| ((i * 7919) % 211) as f64 / 105.0 - 1.0).collect();
        let s = Signal::new(x, 8000.0).unwrap();
        let par = bank.analyze(&s).unwrap();
        let poles = bank.poles(8000.0);
        for (k, p) in poles.iter().enumerate() {
            assert_eq!(par[k].samples, bank.band_output(*p, &s.samples));
        }
    }
}
