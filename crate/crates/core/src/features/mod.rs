//! Speaker profiling: periodic spectral power, voice metrics and lip
//! features, combined into normalized per-speaker profiles.

mod dpss;
mod lips;
mod perturbation;
mod pitch;
mod profiles;
mod spectral;

pub use dpss::dpss;
pub use lips::{lip_features, GrayFrame, LipFeatures, Roi, OPENNESS_THRESHOLD};
pub use perturbation::{
    cycle_runs, glottal_pulses, jitter_from_runs, jitter_metrics, shimmer_from_runs, shimmer_metrics,
    JitterMetrics, Pulse, ShimmerMetrics, MAX_PERIOD_FACTOR,
};
pub use pitch::{
    intensity_contour, mean_nhr, min_intensity, pitch_stats, pitch_track, PitchConfig, PitchStats,
    PitchTrack, INTENSITY_FLOOR_DB,
};
pub use profiles::{build_profiles, ProfileSet, SegmentRow, SpeakerProfile, PRUNE_ABS_R};
pub use spectral::{
    band_periodic_power, multitaper_psd, periodic_fraction, BandPower, FractalFit, PowerSpectrum,
    BANDS_HZ, DEFAULT_RANGE_HZ, DEFAULT_SMOOTHING_HZ,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigcore::{resample, Signal};

/// Audio is resampled to this rate before multitaper analysis (Nyquist
/// above the 4.5 kHz analysis range, far fewer samples than CD audio).
pub const SPECTRAL_RATE_HZ: f64 = 10_000.0;

/// The sixteen voice-report metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoiceMetrics {
    pub mean_pitch: f64,
    pub median_pitch: f64,
    pub sd_pitch: f64,
    pub min_pitch: f64,
    pub max_pitch: f64,
    pub jitter_loc: f64,
    pub jitter_loc_abs: f64,
    pub jitter_rap: f64,
    pub jitter_ppq5: f64,
    pub shimmer_loc: f64,
    pub shimmer_loc_db: f64,
    pub shimmer_apq3: f64,
    pub shimmer_apq5: f64,
    pub shimmer_apq11: f64,
    pub mean_nhr: f64,
    pub min_intensity: f64,
}

/// Pitch, perturbation, harmonicity and intensity of one recording.
pub fn voice_metrics(audio: &Signal, config: &PitchConfig) -> Result<VoiceMetrics> {
    let track = pitch_track(audio, config)?;
    let stats = pitch_stats(&track)?;
    let pulses = glottal_pulses(audio, &track);
    let (periods, amps) = cycle_runs(&pulses, config.floor_hz, config.ceiling_hz);
    let jitter = jitter_from_runs(&periods)?;
    let shimmer = shimmer_from_runs(&amps)?;
    let longest = periods.iter().map(Vec::len).max().unwrap_or(0);
    let (Some(ppq5), Some(apq5), Some(apq11)) = (jitter.ppq5, shimmer.apq5, shimmer.apq11) else {
        return Err(Error::TooShort { needed: 11, got: longest + 1 });
    };
    Ok(VoiceMetrics {
        mean_pitch: stats.mean,
        median_pitch: stats.median,
        sd_pitch: stats.sd,
        min_pitch: stats.min,
        max_pitch: stats.max,
        jitter_loc: jitter.loc,
        jitter_loc_abs: jitter.loc_abs,
        jitter_rap: jitter.rap,
        jitter_ppq5: ppq5,
        shimmer_loc: shimmer.loc,
        shimmer_loc_db: shimmer.loc_db,
        shimmer_apq3: shimmer.apq3,
        shimmer_apq5: apq5,
        shimmer_apq11: apq11,
        mean_nhr: mean_nhr(&track)?,
        min_intensity: min_intensity(audio)?,
    })
}

/// Band powers and voice metrics of one audio segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AudioFeatures {
    pub band: BandPower,
    pub voice: VoiceMetrics,
}

pub fn audio_features(audio: &Signal, config: &PitchConfig) -> Result<AudioFeatures> {
    let spectral_input = if audio.rate > SPECTRAL_RATE_HZ {
        resample(audio, SPECTRAL_RATE_HZ)?
    } else {
        audio.clone()
    };
    let psd = multitaper_psd(&spectral_input, DEFAULT_SMOOTHING_HZ, DEFAULT_RANGE_HZ)?;
    let fit = periodic_fraction(&psd)?;
    let band = band_periodic_power(&fit.ratio, audio.duration_s())?;
    Ok(AudioFeatures {
        band,
        voice: voice_metrics(audio, config)?,
    })
}

/// Profile feature names in pruning order.
pub const FEATURE_NAMES: [&str; 22] = [
    "FreqRsum_env",
    "FreqRsum_low",
    "FreqRsum_mid",
    "FreqRsum_high",
    "meanPitch",
    "medianPitch",
    "sdPitch",
    "minPitch",
    "maxPitch",
    "jitter_loc",
    "jitter_loc_abs",
    "jitter_rap",
    "jitter_ppq5",
    "shimmer_loc",
    "shimmer_loc_dB",
    "shimmer_apq3",
    "shimmer_apq5",
    "shimmer_apq11",
    "mean_nhr",
    "min_intensity",
    "avgLipOpen",
    "avgLipBright",
];

/// Feature vector in `FEATURE_NAMES` order.
pub fn feature_vector(audio: &AudioFeatures, lips: &LipFeatures) -> Vec<f64> {
    let (b, v) = (&audio.band, &audio.voice);
    vec![
        b.freq_rsum_env,
        b.freq_rsum_low,
        b.freq_rsum_mid,
        b.freq_rsum_high,
        v.mean_pitch,
        v.median_pitch,
        v.sd_pitch,
        v.min_pitch,
        v.max_pitch,
        v.jitter_loc,
        v.jitter_loc_abs,
        v.jitter_rap,
        v.jitter_ppq5,
        v.shimmer_loc,
        v.shimmer_loc_db,
        v.shimmer_apq3,
        v.shimmer_apq5,
        v.shimmer_apq11,
        v.mean_nhr,
        v.min_intensity,
        lips.avg_lip_open,
        lips.avg_lip_bright,
    ]
}

#[cfg(test)]
mod tests;
