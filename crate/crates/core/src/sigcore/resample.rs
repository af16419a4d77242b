use std::f64::consts::PI;

use super::{odd_reflect, Signal};
use crate::error::{Error, Result};

const KAISER_BETA: f64 = 5.0;
const HALF_LEN_FACTOR: usize = 10;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn integer_rate(rate: f64) -> Option<u64> {
    let r = rate.round();
    ((rate - r).abs() < 1e-9 && r >= 1.0).then_some(r as u64)
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Polyphase anti-aliasing filter at the upsampled rate. Each of the `up`
/// phases is normalized to unit DC gain so constants pass through exactly.
fn polyphase_filter(up: usize, down: usize) -> (Vec<f64>, usize) {
    let max_ud = up.max(down);
    let half = HALF_LEN_FACTOR * max_ud;
    let len = 2 * half + 1;
    let fc = 0.5 / max_ud as f64;
    let denom = bessel_i0(KAISER_BETA);
    let mut h: Vec<f64> = (0..len)
        .map(|j| {
            let t = j as f64 - half as f64;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * t).sin() / (PI * t)
            };
            let r = t / half as f64;
            let w = bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / denom;
            sinc * w
        })
        .collect();
    for phase in 0..up {
        let s: f64 = h.iter().skip(phase).step_by(up).sum();
        h.iter_mut().skip(phase).step_by(up).for_each(|v| *v /= s);
    }
    (h, half)
}

/// Rational-ratio resampling with a linear-phase (delay-compensated) Kaiser
/// windowed-sinc filter. Both rates must be whole numbers of Hz.
///
/// Output length is `round(len * target / rate)`. The caller is responsible
/// for band-limiting the input below the target Nyquist frequency.
pub fn resample(signal: &Signal, target_rate: f64) -> Result<Signal> {
    if !(target_rate > 0.0) {
        return Err(Error::invalid(format!("target rate must be positive, got {target_rate}")));
    }
    let (Some(src), Some(dst)) = (integer_rate(signal.rate), integer_rate(target_rate)) else {
        return Err(Error::invalid(format!(
            "resampling needs integer rates, got {} -> {target_rate}",
            signal.rate
        )));
    };
    if src == dst {
        return Ok(signal.clone());
    }
    let g = gcd(src, dst);
    let (up, down) = ((dst / g) as usize, (src / g) as usize);
    let n = signal.len();
    let out_len = ((n as f64) * up as f64 / down as f64).round() as usize;
    let (h, half) = polyphase_filter(up, down);
    let x = &signal.samples;
    let samples = (0..out_len)
        .map(|m| {
            // filter center sits at upsampled index m * down
            let t = (m * down + half) as isize;
            let up_i = up as isize;
            let lo = (t - 2 * half as isize + up_i - 1).div_euclid(up_i);
            let hi = t.div_euclid(up_i);
            let mut acc = 0.0;
            for k in lo..=hi {
                acc += h[(t - k * up_i) as usize] * odd_reflect(x, k);
            }
            acc
        })
        .collect();
    Ok(Signal {
        samples,
        rate: target_rate,
    })
}
