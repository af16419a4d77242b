use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use envtrack::decoder::{LagSpec, LAMBDA_GRID};
use envtrack::{Cell, Condition, Error, Noise, Result};

#[derive(Debug, Parser)]
#[command(name = "envtrack", version, about = "Cortical speech-envelope tracking toolkit")]
pub struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "ENVTRACK_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Broadband speech envelopes from WAV audio.
    Envelope(EnvelopeArgs),
    /// Clean, re-referenced 64 Hz condition epochs from raw EEG.
    Preproc(PreprocArgs),
    /// Leave-one-out reconstruction scores for a lag window or single lag.
    Decode(DecodeArgs),
    /// Single-lag sweep over 0–500 ms with permutation chance.
    Sweep(SweepArgs),
    /// Permutation chance level of a lag window or single lag.
    Chance(ChanceArgs),
    /// Per-segment acoustic and lip features.
    Features(FeaturesArgs),
    /// Normalized, pruned speaker profiles from a features table.
    Profiles(ProfilesArgs),
    /// ANOVA, planned comparisons and profile correlations from scores.
    Stats(StatsArgs),
    /// Synthetic study in the same file formats as real data.
    Simulate(SimulateArgs),
    /// SVG figure from a scores, sweep or profiles table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    /// Trial manifest; every trial with audio gets an envelope.
    #[arg(long, conflicts_with = "wav", required_unless_present = "wav")]
    pub manifest: Option<PathBuf>,
    /// Single WAV file.
    #[arg(long)]
    pub wav: Option<PathBuf>,
    /// Output directory (manifest mode) or signal file (single file mode).
    #[arg(long)]
    pub out: PathBuf,
    /// Gammatone bands.
    #[arg(long, default_value_t = 128)]
    pub bands: usize,
}

#[derive(Debug, Args)]
pub struct PreprocArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for epochs, rejection report and manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Electrode positions table (label, x, y, z); standard 10-20 positions
    /// by label otherwise.
    #[arg(long)]
    pub positions: Option<PathBuf>,
}

/// Lag selection shared by decode and chance.
#[derive(Debug, Args)]
pub struct LagArgs {
    /// Lag window in ms, `min:max`.
    #[arg(long, value_parser = parse_window, conflicts_with = "lag")]
    pub window: Option<[f64; 2]>,
    /// Single lag index (15.625 ms steps).
    #[arg(long)]
    pub lag: Option<usize>,
}

impl LagArgs {
    pub fn spec(&self) -> Result<LagSpec> {
        match (self.window, self.lag) {
            (_, Some(k)) => Ok(LagSpec::single(k)),
            (Some([a, b]), None) => LagSpec::from_window_ms(a, b),
            (None, None) => Ok(LagSpec::window_of_interest()),
        }
    }
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Trial manifests (one per subject).
    #[arg(long, required = true, num_args = 1..)]
    pub manifest: Vec<PathBuf>,
    #[command(flatten)]
    pub lags: LagArgs,
    /// `paper` (the 13-value default grid) or `custom:<v1>,<v2>,...`.
    #[arg(long, default_value = "paper", value_parser = parse_grid)]
    pub lambda_grid: Grid,
    /// Scores table.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for per-cell decoder weights.
    #[arg(long)]
    pub weights_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub manifest: Vec<PathBuf>,
    #[arg(long, default_value = "paper", value_parser = parse_grid)]
    pub lambda_grid: Grid,
    /// Permutations per lag and cell; 0 skips the chance columns.
    #[arg(long, default_value_t = 100)]
    pub n_perm: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ChanceArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub manifest: Vec<PathBuf>,
    #[command(flatten)]
    pub lags: LagArgs,
    #[arg(long, default_value = "paper", value_parser = parse_grid)]
    pub lambda_grid: Grid,
    #[arg(long, default_value_t = 1000)]
    pub n_perm: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub manifest: Vec<PathBuf>,
    #[arg(long, default_value_t = 75.0)]
    pub pitch_floor: f64,
    #[arg(long, default_value_t = 600.0)]
    pub pitch_ceiling: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProfilesArgs {
    /// Features table.
    #[arg(long)]
    pub from: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Long-format (feature, speaker, value) table for radar plots.
    #[arg(long)]
    pub radar_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Scores table with one lag window.
    #[arg(long)]
    pub from: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Human-readable report.
    #[arg(long)]
    pub text: Option<PathBuf>,
    /// Speaker profiles to correlate with the per-speaker AV benefit in noise.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    /// Gabor profile peaking at 250 ms.
    Gabor,
    /// All weight on one lag (see --kernel-lag).
    Single,
    /// No stimulus response.
    Null,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub subjects: usize,
    /// Trials per condition cell.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 24)]
    pub channels: usize,
    #[arg(long, default_value_t = 30.0)]
    pub epoch_s: f64,
    #[arg(long, value_enum, default_value_t = KernelKind::Gabor)]
    pub kernel: KernelKind,
    /// Lag index of the single-lag kernel.
    #[arg(long, default_value_t = 16)]
    pub kernel_lag: usize,
    /// Per-channel SNR of every cell.
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub snr_db: f64,
    /// Extra SNR for one cell, `<condition>-<noise>:<dB>`; repeatable.
    #[arg(long, value_parser = parse_boost, allow_hyphen_values = true)]
    pub boost: Vec<(Cell, f64)>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Style {
    /// Lag-sweep curves per cell.
    Fig2,
    /// Cell means by condition and noise.
    Fig3,
    /// Speaker × feature grid of normalized profiles.
    Fig4,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub from: PathBuf,
    #[arg(long, value_enum)]
    pub style: Style,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    if s == "paper" {
        return Ok(Grid(LAMBDA_GRID.to_vec()));
    }
    let list = s
        .strip_prefix("custom:")
        .ok_or_else(|| format!("expected 'paper' or 'custom:<list>', got '{s}'"))?;
    let values = list
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad lambda '{v}': {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err("lambda values must be positive and finite".into());
    }
    Ok(Grid(values))
}

fn parse_window(s: &str) -> std::result::Result<[f64; 2], String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected 'min:max' in ms, got '{s}'"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("bad window start '{a}': {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("bad window end '{b}': {e}"))?;
    Ok([a, b])
}

/// `AV-noise` style cell tag.
pub fn parse_cell(s: &str) -> Result<Cell> {
    let (c, n) = s
        .split_once('-')
        .ok_or_else(|| Error::InvalidArgument(format!("expected '<condition>-<noise>', got '{s}'")))?;
    Ok(Cell::new(c.parse::<Condition>()?, n.parse::<Noise>()?))
}

fn parse_boost(s: &str) -> std::result::Result<(Cell, f64), String> {
    let (cell, db) = s.rsplit_once(':').ok_or_else(|| format!("expected '<cell>:<dB>', got '{s}'"))?;
    let cell = parse_cell(cell).map_err(|e| e.to_string())?;
    let db: f64 = db.parse().map_err(|e| format!("bad dB value '{db}': {e}"))?;
    Ok((cell, db))
}
