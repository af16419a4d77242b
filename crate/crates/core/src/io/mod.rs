//! File formats: binary signal files, WAV and PGM readers, trial manifests
//! and versioned CSV tables.

mod manifest;
mod media;
mod signal_file;
mod table;

pub use manifest::{ManifestTrial, Metadata, TrialManifest, DEFAULT_TRIAL_SECONDS};
pub use media::{read_frame_dir, read_pgm, read_wav};
pub use signal_file::{read_signal_file, write_signal_file, SignalFile, DTYPE};
pub use table::{read_records, read_table, write_records, write_table, Table, TABLE_VERSION};
