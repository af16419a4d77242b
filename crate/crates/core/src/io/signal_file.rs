use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Payload encoding; the only one supported.
pub const DTYPE: &str = "f32le";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    n_channels: usize,
    n_samples: usize,
    rate_hz: f64,
    labels: Vec<String>,
    dtype: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

/// Channels × samples matrix of 32-bit floats with a JSON header.
///
/// On disk: a little-endian u32 header length, the UTF-8 JSON header, then
/// the row-major little-endian f32 payload.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFile {
    pub rate_hz: f64,
    pub labels: Vec<String>,
    pub data: Vec<Vec<f32>>,
    /// Free-form extra header fields.
    pub meta: Option<serde_json::Value>,
}

impl SignalFile {
    pub fn new(data: Vec<Vec<f32>>, rate_hz: f64, labels: Vec<String>) -> Result<Self> {
        let n = data.first().map_or(0, Vec::len);
        if data.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("all channels must have the same length"));
        }
        if labels.len() != data.len() {
            return Err(Error::invalid(format!("{} labels for {} channels", labels.len(), data.len())));
        }
        if !(rate_hz > 0.0 && rate_hz.is_finite()) {
            return Err(Error::invalid(format!("rate must be positive, got {rate_hz}")));
        }
        Ok(Self { rate_hz, labels, data, meta: None })
    }

    /// Rows are rounded to single precision.
    pub fn from_f64(rows: &[Vec<f64>], rate_hz: f64, labels: Vec<String>) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect(), rate_hz, labels)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.data.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect()
    }

    pub fn n_channels(&self) -> usize {
        self.data.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            n_channels: self.n_channels(),
            n_samples: self.n_samples(),
            rate_hz: self.rate_hz,
            labels: self.labels.clone(),
            dtype: DTYPE.to_string(),
            meta: self.meta.clone(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
        let mut out = Vec::with_capacity(4 + json.len() + 4 * self.n_channels() * self.n_samples());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for row in &self.data {
            for v in row {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(Error::Truncated { expected: 4, found: bytes.len() });
        }
        let header_len = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
        if bytes.len() < 4 + header_len {
            return Err(Error::Truncated { expected: 4 + header_len, found: bytes.len() });
        }
        let header: Header = serde_json::from_slice(&bytes[4..4 + header_len])
            .map_err(|e| Error::Format(format!("signal header: {e}")))?;
        if header.dtype != DTYPE {
            return Err(Error::Format(format!("unsupported dtype '{}'", header.dtype)));
        }
        if header.labels.len() != header.n_channels {
            return Err(Error::Format(format!(
                "header lists {} labels for {} channels",
                header.labels.len(),
                header.n_channels
            )));
        }
        let payload = &bytes[4 + header_len..];
        let expected = header
            .n_channels
            .checked_mul(header.n_samples)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Format("header dimensions overflow".into()))?;
        if payload.len() < expected {
            return Err(Error::Truncated { expected, found: payload.len() });
        }
        if payload.len() > expected {
            return Err(Error::Format(format!(
                "header/payload mismatch: {expected} payload bytes expected, {} present",
                payload.len()
            )));
        }
        let data = payload
            .chunks_exact(4 * header.n_samples.max(1))
            .take(header.n_channels)
            .map(|row| {
                row.chunks_exact(4)
                    .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
                    .collect()
            })
            .collect::<Vec<Vec<f32>>>();
        let data = if header.n_samples == 0 { vec![Vec::new(); header.n_channels] } else { data };
        let mut file = Self::new(data, header.rate_hz, header.labels)?;
        file.meta = header.meta;
        Ok(file)
    }
}

pub fn write_signal_file(path: &Path, file: &SignalFile) -> Result<()> {
    let bytes = file.to_bytes()?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn read_signal_file(path: &Path) -> Result<SignalFile> {
    SignalFile::from_bytes(&fs::read(path)?).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}
