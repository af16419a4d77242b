use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::Signal;
use crate::error::{Error, Result};

/// Analytic signal via the FFT method (negative frequencies zeroed).
pub fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        let h = if k == 0 || (n % 2 == 0 && k == half) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *c *= h / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}

/// Magnitude of the analytic signal.
pub fn hilbert_envelope(signal: &Signal) -> Result<Signal> {
    if signal.len() < 8 {
        return Err(Error::TooShort {
            needed: 8,
            got: signal.len(),
        });
    }
    Ok(Signal {
        samples: analytic_signal(&signal.samples).iter().map(|c| c.norm()).collect(),
        rate: signal.rate,
    })
}
