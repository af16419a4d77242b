//! Fixture writers shared by the CLI integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal draws by Box-Muller.
pub fn gaussian(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u1: f64 = 1.0 - r.random::<f64>();
            let u2: f64 = r.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        })
        .collect()
}

/// Mono 16-bit PCM WAV.
pub fn write_wav(path: &Path, rate: u32, x: &[f64]) {
    let data: Vec<u8> = x
        .iter()
        .flat_map(|v| ((v.clamp(-1.0, 1.0) * 32767.0).round() as i16).to_le_bytes())
        .collect();
    let mut b = Vec::with_capacity(44 + data.len());
    b.extend_from_slice(b"RIFF");
    b.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
    b.extend_from_slice(b"WAVEfmt ");
    b.extend_from_slice(&16u32.to_le_bytes());
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&rate.to_le_bytes());
    b.extend_from_slice(&(rate * 2).to_le_bytes());
    b.extend_from_slice(&2u16.to_le_bytes());
    b.extend_from_slice(&16u16.to_le_bytes());
    b.extend_from_slice(b"data");
    b.extend_from_slice(&(data.len() as u32).to_le_bytes());
    b.extend_from_slice(&data);
    fs::write(path, b).unwrap();
}

/// Binary 8-bit PGM.
pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) {
    let mut b = format!("P5\n{width} {height}\n255\n").into_bytes();
    b.extend_from_slice(pixels);
    fs::write(path, b).unwrap();
}

/// Voiced-like waveform: sawtooth cycles with jittered period and amplitude, plus a little noise.
pub fn voice(f0: f64, rate: f64, secs: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let n = (rate * secs) as usize;
    let mut x = Vec::with_capacity(n);
    while x.len() < n {
        let period = (rate / f0 * (1.0 + 0.02 * (r.random::<f64>() - 0.5))).round() as usize;
        let amp = 0.4 * (1.0 + 0.1 * (r.random::<f64>() - 0.5));
        for i in 0..period {
            x.push(amp * (2.0 * i as f64 / period as f64 - 1.0));
        }
    }
    x.truncate(n);
    let noise = gaussian(&mut r, n);
    x.iter().zip(noise).map(|(v, e)| v + 0.01 * e).collect()
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_envtrack"))
}

/// Run the binary with `args` and the given worker count.
pub fn run(threads: usize, args: &[&str]) -> Output {
    Command::new(bin())
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn run_ok(threads: usize, args: &[&str]) {
    let out = run(threads, args);
    assert!(
        out.status.success(),
        "envtrack {} failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
}
