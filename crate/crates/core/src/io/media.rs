use std::fs;
use std::path::Path;

use hound::{SampleFormat, WavReader};

use crate::error::{Error, Result};
use crate::features::GrayFrame;
use crate::sigcore::Signal;

/// First channel of a PCM WAV file, scaled to [−1, 1).
///
/// Integer data (16, 24 or 32 bit) is divided by 2^(bits−1); 32-bit float
/// is taken as is.
pub fn read_wav(path: &Path) -> Result<Signal> {
    let reader = WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    let stride = spec.channels as usize;
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .step_by(stride)
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| wav_error(path, e))?
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .step_by(stride)
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_error(path, e))?,
        (format, bits) => {
            return Err(Error::Format(format!(
                "{}: unsupported WAV encoding ({bits}-bit {format:?})",
                path.display()
            )))
        }
    };
    Signal::new(samples, spec.sample_rate as f64)
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        other => Error::Format(format!("{}: {other}", path.display())),
    }
}

/// Grayscale PGM frame with luminance scaled to [0, 1].
pub fn read_pgm(path: &Path) -> Result<GrayFrame> {
    let bytes = fs::read(path)?;
    let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Pnm)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if img.color().channel_count() != 1 {
        return Err(Error::Format(format!("{}: not a grayscale image", path.display())));
    }
    let luma = img.to_luma32f();
    let (w, h) = luma.dimensions();
    GrayFrame::new(w as usize, h as usize, luma.into_raw().into_iter().map(f64::from).collect())
}

/// All `.pgm` frames of a directory in file-name order.
pub fn read_frame_dir(dir: &Path) -> Result<Vec<GrayFrame>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")));
    paths.sort();
    if paths.is_empty() {
        return Err(Error::invalid(format!("no .pgm frames in {}", dir.display())));
    }
    paths.iter().map(|p| read_pgm(p)).collect()
}
