//! Broadband speech envelope.
//!
//! z-normalize → log-spaced gammatone bank → per-band Hilbert magnitude →
//! unweighted band mean → zero-phase Butterworth lowpass → resample.

use crate::error::{Error, Result};
use crate::sigcore::{butterworth_lowpass, filtfilt, hilbert_envelope, resample, zscore, GammatoneBank, Signal};

/// Minimum audio rate accepted by the envelope pipeline.
pub const MIN_AUDIO_RATE_HZ: f64 = 14_000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeConfig {
    pub n_bands: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub lowpass_hz: f64,
    pub lowpass_order: usize,
    pub target_rate: f64,
    /// Bands filtered concurrently; bounds peak memory.
    pub band_chunk: usize,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self {
            n_bands: 128,
            fmin_hz: 100.0,
            fmax_hz: 6500.0,
            lowpass_hz: 30.0,
            lowpass_order: 3,
            target_rate: crate::ANALYSIS_RATE_HZ,
            band_chunk: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSeries {
    pub samples: Vec<f64>,
    pub rate: f64,
    pub source_id: String,
}

impl EnvelopeSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Mean of per-band Hilbert magnitudes at the audio rate (before lowpass).
pub fn band_average(audio: &Signal, config: &EnvelopeConfig) -> Result<Signal> {
    if audio.rate < MIN_AUDIO_RATE_HZ {
        return Err(Error::invalid(format!(
            "audio rate {} Hz below the {MIN_AUDIO_RATE_HZ} Hz minimum",
            audio.rate
        )));
    }
    let z = zscore(audio).map_err(|_| Error::ZeroVariance("silent audio".into()))?;
    let bank = GammatoneBank::new(config.n_bands, config.fmin_hz, config.fmax_hz)?;
    let rate = z.rate;
    let mags = bank.map_bands(&z, config.band_chunk, |band| {
        hilbert_envelope(&Signal { samples: band, rate }).map(|s| s.samples)
    })?;
    let mut acc = vec![0.0; z.len()];
    for m in mags {
        for (a, v) in acc.iter_mut().zip(m?) {
            *a += v;
        }
    }
    let n = config.n_bands as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(Signal { samples: acc, rate })
}

/// Extract the broadband envelope of `audio`.
///
/// Samples are rounded to single precision, the resolution of the on-disk
/// signal format, so the output is bit-stable under input gain changes.
pub fn extract_broadband_envelope(
    audio: &Signal,
    source_id: &str,
    config: &EnvelopeConfig,
) -> Result<EnvelopeSeries> {
    let avg = band_average(audio, config)?;
    let lp = butterworth_lowpass(config.lowpass_order, config.lowpass_hz, avg.rate)?;
    let smooth = filtfilt(&lp, &avg)?;
    let down = resample(&smooth, config.target_rate)?;
    Ok(EnvelopeSeries {
        samples: down.samples.iter().map(|&v| v as f32 as f64).collect(),
        rate: down.rate,
        source_id: source_id.to_string(),
    })
}

/// Cut an envelope into consecutive full-length segments; the remainder is dropped.
pub fn segment_envelope(env: &EnvelopeSeries, epoch_s: f64) -> Vec<EnvelopeSeries> {
    let seg_len = (epoch_s * env.rate).round() as usize;
    if seg_len == 0 {
        return Vec::new();
    }
    env.samples
        .chunks_exact(seg_len)
        .enumerate()
        .map(|(k, chunk)| EnvelopeSeries {
            samples: chunk.to_vec(),
            rate: env.rate,
            source_id: format!("{}/seg{k}", env.source_id),
        })
        .collect()
}
