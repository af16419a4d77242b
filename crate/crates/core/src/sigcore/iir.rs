use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::{odd_extend, Signal};
use crate::error::{Error, Result};

/// One second-order section in direct form II transposed, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + self.b[1] * z_inv + self.b[2] * z2) / (self.a[0] + self.a[1] * z_inv + self.a[2] * z2)
    }

    /// Pole magnitudes of the section.
    fn pole_radii(&self) -> [f64; 2] {
        let (a1, a2) = (self.a[1], self.a[2]);
        let disc = a1 * a1 - 4.0 * a2;
        if disc >= 0.0 {
            let s = disc.sqrt();
            [((-a1 + s) / 2.0).abs(), ((-a1 - s) / 2.0).abs()]
        } else {
            let r = a2.sqrt();
            [r, r]
        }
    }

    /// State (z1, z2) in steady state for a constant input `u`.
    fn steady_state(&self, u: f64) -> [f64; 2] {
        let y = self.dc_gain() * u;
        let z2 = self.b[2] * u - self.a[2] * y;
        let z1 = self.b[1] * u - self.a[1] * y + z2;
        [z1, z2]
    }

    fn run(&self, x: &mut [f64], mut state: [f64; 2]) {
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b[0] * input + state[0];
            state[0] = self.b[1] * input - self.a[1] * y + state[1];
            state[1] = self.b[2] * input - self.a[2] * y;
            *v = y;
        }
    }
}

/// Butterworth lowpass as a chain of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct IirBiquadChain {
    pub sections: Vec<Biquad>,
    pub order: usize,
    pub cutoff_hz: f64,
    pub rate: f64,
}

impl IirBiquadChain {
    /// Single-pass magnitude response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / self.rate;
        let z_inv = Complex64::from_polar(1.0, -w);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
            .norm()
    }

    pub fn is_stable(&self) -> bool {
        self.sections
            .iter()
            .all(|s| s.pole_radii().iter().all(|r| *r < 1.0))
    }

    /// Run the chain once (causal) over `x` in place, starting from the
    /// steady state of a constant input equal to `x[0]`.
    fn run(&self, x: &mut [f64]) {
        let mut u = x.first().copied().unwrap_or(0.0);
        for s in &self.sections {
            s.run(x, s.steady_state(u));
            u *= s.dc_gain();
        }
    }
}

/// Bilinear-transform Butterworth lowpass with a prewarped cutoff.
pub fn butterworth_lowpass(order: usize, cutoff_hz: f64, rate: f64) -> Result<IirBiquadChain> {
    if order == 0 {
        return Err(Error::invalid("Butterworth order must be >= 1"));
    }
    if !(cutoff_hz > 0.0 && cutoff_hz < rate / 2.0) {
        return Err(Error::invalid(format!(
            "cutoff {cutoff_hz} Hz must lie strictly between 0 and Nyquist ({} Hz)",
            rate / 2.0
        )));
    }
    let fs2 = 2.0 * rate;
    let wc = fs2 * (PI * cutoff_hz / rate).tan();
    let bilinear = |s: Complex64| (1.0 + s / fs2) / (1.0 - s / fs2);
    let mut sections = Vec::new();
    for k in 0..order / 2 {
        let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
        let p = bilinear(Complex64::from_polar(wc, theta));
        let a = [1.0, -2.0 * p.re, p.norm_sqr()];
        let g = (a[0] + a[1] + a[2]) / 4.0;
        sections.push(Biquad {
            b: [g, 2.0 * g, g],
            a,
        });
    }
    if order % 2 == 1 {
        let p = bilinear(Complex64::new(-wc, 0.0)).re;
        let g = (1.0 - p) / 2.0;
        sections.push(Biquad {
            b: [g, g, 0.0],
            a: [1.0, -p, 0.0],
        });
    }
    Ok(IirBiquadChain {
        sections,
        order,
        cutoff_hz,
        rate,
    })
}

/// Forward-backward (zero-phase) application of an IIR chain.
///
/// Edges are odd-reflected over three cutoff periods, and each pass starts
/// from the steady state of its first padded sample.
pub fn filtfilt(chain: &IirBiquadChain, signal: &Signal) -> Result<Signal> {
    let n = signal.len();
    if n < 4 {
        return Err(Error::TooShort { needed: 4, got: n });
    }
    let pad = ((3.0 * chain.rate / chain.cutoff_hz).ceil() as usize).min(n - 1);
    let mut x = odd_extend(&signal.samples, pad);
    chain.run(&mut x);
    x.reverse();
    chain.run(&mut x);
    x.reverse();
    Ok(Signal {
        samples: x[pad..pad + n].to_vec(),
        rate: signal.rate,
    })
}
