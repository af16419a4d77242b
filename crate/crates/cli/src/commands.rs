use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use envtrack::decoder::{
    chance_level, chance_sweep, fit_cell_model, lagged_model, single_lag_sweep, CellKey, LagSpec, LambdaChoice,
    TrackingScore, TrialPair,
};
use envtrack::eegprep::montage::{standard_position, STANDARD_24};
use envtrack::eegprep::{preprocess_pipeline, EegRecording, PreprocConfig, TrialMeta, TrialWindow};
use envtrack::envelope::{extract_broadband_envelope, EnvelopeConfig, EnvelopeSeries};
use envtrack::features::{
    audio_features, build_profiles, feature_vector, lip_features, AudioFeatures, LipFeatures, PitchConfig,
    SegmentRow, FEATURE_NAMES,
};
use envtrack::io::{
    read_frame_dir, read_records, read_signal_file, read_table, read_wav, write_records, write_signal_file,
    write_table, ManifestTrial, Metadata, SignalFile, Table, TrialManifest,
};
use envtrack::sim::{gen_condition_study, ForwardKernel, NoiseLevel, SimSpec};
use envtrack::stats::{cell_means_by_subject, planned_comparisons, rm_anova_2x4, spearman};
use envtrack::{Cell, Condition, Error, Noise, Result, ANALYSIS_RATE_HZ};
use log::{info, warn};
use rayon::prelude::*;

use crate::args::*;
use crate::load::{absolute, load_manifests, load_pairs};
use crate::rows::*;

/// File-name-safe form of an identifier.
fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

/// Copy of a manifest living in `out_dir`, with every input path absolute.
fn rebased(m: &TrialManifest, out_dir: &Path) -> Result<TrialManifest> {
    let mut out = m.clone();
    out.base_dir = out_dir.to_path_buf();
    for t in &mut out.trials {
        for p in [&mut t.audio_path, &mut t.eeg_path, &mut t.envelope_path, &mut t.video_dir] {
            if let Some(path) = p.as_mut() {
                *path = absolute(m, path)?;
            }
        }
    }
    Ok(out)
}

fn single_row(samples: &[f64], rate: f64, label: &str) -> Result<SignalFile> {
    SignalFile::from_f64(&[samples.to_vec()], rate, vec![label.to_string()])
}

pub fn envelope(a: EnvelopeArgs) -> Result<()> {
    let config = EnvelopeConfig {
        n_bands: a.bands,
        ..EnvelopeConfig::default()
    };
    if let Some(wav) = &a.wav {
        let audio = read_wav(wav)?;
        let name = wav.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let env = extract_broadband_envelope(&audio, &name, &config)?;
        return write_signal_file(&a.out, &single_row(&env.samples, env.rate, "envelope")?);
    }
    let path = a.manifest.as_ref().expect("clap requires --manifest or --wav");
    let m = TrialManifest::load(path)?;
    fs::create_dir_all(&a.out)?;
    let audio: BTreeSet<PathBuf> = m
        .trials
        .iter()
        .filter_map(|t| t.audio_path.as_ref().map(|p| m.resolve(p)))
        .collect();
    if audio.is_empty() {
        return Err(Error::invalid("no trial in the manifest has an audio_path"));
    }
    let envs: BTreeMap<PathBuf, EnvelopeSeries> = audio
        .par_iter()
        .map(|p| {
            let env = extract_broadband_envelope(&read_wav(p)?, &p.to_string_lossy(), &config)?;
            Ok((p.clone(), env))
        })
        .collect::<Result<_>>()?;
    let mut out = rebased(&m, &a.out)?;
    for (t, orig) in out.trials.iter_mut().zip(&m.trials) {
        let Some(audio_path) = &orig.audio_path else { continue };
        let env = &envs[&m.resolve(audio_path)];
        let n = (t.duration_s * env.rate).round() as usize;
        if env.len() < n {
            return Err(Error::TooShort { needed: n, got: env.len() });
        }
        let name = format!("{}.env.sig", file_stem(&t.trial_id));
        write_signal_file(&a.out.join(&name), &single_row(&env.samples[..n], env.rate, "envelope")?)?;
        t.envelope_path = Some(PathBuf::from(name));
    }
    out.save(&a.out.join("manifest.json"))
}

fn positions_for(labels: &[String], table: Option<&Path>) -> Result<Option<Vec<[f64; 3]>>> {
    if let Some(p) = table {
        let rows: Vec<PositionRow> = read_records(p, POSITIONS)?;
        let map: BTreeMap<&str, [f64; 3]> = rows.iter().map(|r| (r.label.as_str(), [r.x, r.y, r.z])).collect();
        return labels
            .iter()
            .map(|l| {
                map.get(l.as_str())
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("no position for channel {l} in {}", p.display())))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some);
    }
    let standard: Option<Vec<[f64; 3]>> = labels.iter().map(|l| standard_position(l)).collect();
    if standard.is_none() {
        warn!("channel labels are not all standard 10-20 names; bad channels cannot be interpolated");
    }
    Ok(standard)
}

pub fn preproc(a: PreprocArgs) -> Result<()> {
    let m = TrialManifest::load(&a.manifest)?;
    fs::create_dir_all(&a.out)?;
    let mut by_recording: BTreeMap<PathBuf, Vec<usize>> = BTreeMap::new();
    for (i, t) in m.trials.iter().enumerate() {
        let p = t
            .eeg_path
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("trial {} has no eeg_path", t.trial_id)))?;
        by_recording.entry(m.resolve(p)).or_default().push(i);
    }
    let mut out = rebased(&m, &a.out)?;
    let mut produced = vec![false; m.trials.len()];
    let mut rejections = Vec::new();
    for (path, idx) in &by_recording {
        let file = read_signal_file(path)?;
        let positions = positions_for(&file.labels, a.positions.as_deref())?;
        let rec = EegRecording::new(file.to_f64(), file.rate_hz, file.labels.clone(), positions)?;
        let windows: Vec<TrialWindow> = idx
            .iter()
            .map(|&i| {
                let t = &m.trials[i];
                TrialWindow {
                    meta: TrialMeta {
                        trial_id: t.trial_id.clone(),
                        speaker_id: t.speaker_id.clone(),
                        condition: t.condition,
                        noise: t.noise,
                    },
                    offset_s: t.eeg_offset_s,
                    duration_s: t.duration_s,
                }
            })
            .collect();
        let set = preprocess_pipeline(&rec, Some(&windows), &PreprocConfig::default())?;
        if !set.bad_channels.is_empty() {
            let names: Vec<&str> = set.bad_channels.iter().map(|&c| rec.channel_labels[c].as_str()).collect();
            info!("{}: interpolated bad channels {}", path.display(), names.join(", "));
        }
        let recording = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for (k, epoch) in set.epochs.iter().enumerate() {
            let i = idx[k];
            let t = &mut out.trials[i];
            let name = format!("{}.eeg.sig", file_stem(&t.trial_id));
            write_signal_file(&a.out.join(&name), &SignalFile::from_f64(epoch, set.rate, set.channel_labels.clone())?)?;
            t.eeg_path = Some(PathBuf::from(name));
            t.eeg_offset_s = 0.0;
            t.rejected = set.rejection_mask[k];
            produced[i] = true;
            if let Some(reason) = set.rejection_reasons[k] {
                rejections.push(RejectionRow {
                    recording: recording.clone(),
                    epoch_index: k,
                    trial_id: t.trial_id.clone(),
                    reason: reason.as_str().to_string(),
                });
            }
        }
    }
    let mut kept = Vec::new();
    for (t, ok) in out.trials.into_iter().zip(produced) {
        if ok {
            kept.push(t);
        } else {
            warn!("trial {} produced no epoch; dropped from the output manifest", t.trial_id);
        }
    }
    out.trials = kept;
    write_records(&a.out.join("rejections.csv"), REJECTIONS, &rejections)?;
    out.save(&a.out.join("manifest.json"))
}

fn score_rows(scores: &[TrackingScore]) -> Vec<ScoreRow> {
    scores.iter().map(ScoreRow::from).collect()
}

fn groups(pairs: &[TrialPair]) -> BTreeMap<CellKey, Vec<TrialPair>> {
    let mut g: BTreeMap<CellKey, Vec<TrialPair>> = BTreeMap::new();
    for p in pairs {
        let key = CellKey {
            subject_id: p.subject_id.clone(),
            cell: p.cell,
        };
        g.entry(key).or_default().push(p.clone());
    }
    g
}

pub fn decode(a: DecodeArgs) -> Result<()> {
    let manifests = load_manifests(&a.manifest)?;
    let (pairs, labels) = load_pairs(&manifests)?;
    let spec = a.lags.spec()?;
    let scores = lagged_model(&pairs, &spec, &a.lambda_grid.0)?;
    write_records(&a.out, SCORES, &score_rows(&scores))?;
    if let Some(dir) = &a.weights_dir {
        fs::create_dir_all(dir)?;
        let lambdas: BTreeMap<CellKey, f64> = scores
            .iter()
            .map(|s| {
                let key = CellKey {
                    subject_id: s.subject_id.clone(),
                    cell: s.cell,
                };
                (key, s.lambda)
            })
            .collect();
        let groups: Vec<(CellKey, Vec<TrialPair>)> =
            groups(&pairs).into_iter().filter(|(k, _)| lambdas.contains_key(k)).collect();
        let files = groups
            .par_iter()
            .map(|(key, trials)| {
                let model = fit_cell_model(trials, &spec, lambdas[key])?;
                let n_lags = model.lag_indices.len();
                let rows: Vec<Vec<f64>> = (0..model.n_channels)
                    .map(|c| (0..n_lags).map(|l| model.weight(c, l)).collect())
                    .collect();
                let mut file = SignalFile::from_f64(&rows, ANALYSIS_RATE_HZ, labels.clone())?;
                file.meta = Some(serde_json::json!({
                    "subject_id": key.subject_id,
                    "cell": key.cell.to_string(),
                    "lambda": model.lambda,
                    "lag_indices": model.lag_indices,
                    "window_ms": model.window_ms,
                    "intercept": model.intercept(),
                    "training_trial_ids": model.training_trial_ids,
                }));
                Ok((key.clone(), file))
            })
            .collect::<Result<Vec<_>>>()?;
        for (key, file) in files {
            let name = format!("{}_{}.weights.sig", file_stem(&key.subject_id), key.cell);
            write_signal_file(&dir.join(name), &file)?;
        }
    }
    Ok(())
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let manifests = load_manifests(&a.manifest)?;
    let (pairs, _) = load_pairs(&manifests)?;
    let points = single_lag_sweep(&pairs, &a.lambda_grid.0)?;
    let chance = if a.n_perm > 0 {
        chance_sweep(&pairs, &a.lambda_grid.0, a.n_perm, a.seed)?
    } else {
        Vec::new()
    };
    let chance: BTreeMap<(CellKey, String), _> =
        chance.into_iter().map(|c| ((c.key.clone(), c.lag_or_window.clone()), c)).collect();
    let rows: Vec<SweepRow> = points
        .iter()
        .map(|p| {
            let c = chance.get(&(p.key.clone(), LagSpec::single(p.lag_index).label()));
            SweepRow {
                subject_id: p.key.subject_id.clone(),
                condition: p.key.cell.condition,
                noise: p.key.cell.noise,
                lag_index: p.lag_index,
                lag_ms: p.lag_ms,
                lambda: p.lambda,
                n_trials: p.n_trials,
                mean_r: p.mean_r,
                mean_rz: p.mean_rz,
                chance_mean: c.map(|c| c.mean),
                chance_q025: c.map(|c| c.q025),
                chance_q975: c.map(|c| c.q975),
            }
        })
        .collect();
    write_records(&a.out, SWEEP, &rows)
}

pub fn chance(a: ChanceArgs) -> Result<()> {
    let manifests = load_manifests(&a.manifest)?;
    let (pairs, _) = load_pairs(&manifests)?;
    let spec = a.lags.spec()?;
    let summaries = chance_level(&pairs, &spec, &LambdaChoice::Select(a.lambda_grid.0.clone()), a.n_perm, a.seed)?;
    let rows: Vec<ChanceRow> = summaries
        .iter()
        .map(|c| ChanceRow {
            subject_id: c.key.subject_id.clone(),
            condition: c.key.cell.condition,
            noise: c.key.cell.noise,
            lag_or_window: c.lag_or_window.clone(),
            lambda: c.lambda,
            n_perm: c.n_perm,
            mean_r: c.mean_r,
            mean_rz: c.mean,
            sd_rz: c.sd,
            q025: c.q025,
            q975: c.q975,
            p95: c.p95,
        })
        .collect();
    write_records(&a.out, CHANCE, &rows)
}

struct Segment {
    speaker_id: String,
    segment_id: String,
    audio: PathBuf,
    video: Option<(PathBuf, envtrack::features::Roi)>,
}

pub fn features(a: FeaturesArgs) -> Result<()> {
    let manifests = load_manifests(&a.manifest)?;
    let mut segments: BTreeMap<(String, PathBuf, Option<PathBuf>), Segment> = BTreeMap::new();
    for m in &manifests {
        for t in &m.trials {
            let Some(audio) = &t.audio_path else { continue };
            let audio = m.resolve(audio);
            let video = match (&t.video_dir, t.lip_roi) {
                (Some(d), Some(roi)) => Some((m.resolve(d), roi)),
                (None, None) => None,
                _ => {
                    return Err(Error::invalid(format!(
                        "trial {} needs both video_dir and lip_roi, or neither",
                        t.trial_id
                    )))
                }
            };
            let key = (t.speaker_id.clone(), audio.clone(), video.as_ref().map(|v| v.0.clone()));
            segments.entry(key).or_insert_with(|| Segment {
                speaker_id: t.speaker_id.clone(),
                segment_id: t.trial_id.clone(),
                audio,
                video,
            });
        }
    }
    if segments.is_empty() {
        return Err(Error::invalid("no trial in the manifests has an audio_path"));
    }
    let with_video = segments.values().filter(|s| s.video.is_some()).count();
    if with_video != 0 && with_video != segments.len() {
        return Err(Error::invalid("either every segment or none must have video frames"));
    }
    let pitch = PitchConfig {
        floor_hz: a.pitch_floor,
        ceiling_hz: a.pitch_ceiling,
        ..PitchConfig::default()
    };
    let segments: Vec<Segment> = segments.into_values().collect();
    let computed = segments
        .par_iter()
        .map(|s| {
            let audio: AudioFeatures = audio_features(&read_wav(&s.audio)?, &pitch)
                .map_err(|e| annotate(e, &format!("segment {}", s.segment_id)))?;
            let lips = match &s.video {
                Some((dir, roi)) => Some(lip_features(&read_frame_dir(dir)?, roi)?),
                None => None,
            };
            Ok((audio, lips))
        })
        .collect::<Result<Vec<(AudioFeatures, Option<LipFeatures>)>>>()?;
    let n_features = if with_video > 0 { FEATURE_NAMES.len() } else { FEATURE_NAMES.len() - 2 };
    let mut columns = vec!["speaker_id".to_string(), "segment_id".to_string()];
    columns.extend(FEATURE_NAMES[..n_features].iter().map(|s| s.to_string()));
    let placeholder = LipFeatures {
        avg_lip_open: f64::NAN,
        avg_lip_bright: f64::NAN,
    };
    let rows = segments
        .iter()
        .zip(&computed)
        .map(|(s, (audio, lips))| {
            let v = feature_vector(audio, lips.as_ref().unwrap_or(&placeholder));
            let mut row = vec![s.speaker_id.clone(), s.segment_id.clone()];
            row.extend(v[..n_features].iter().map(|x| x.to_string()));
            row
        })
        .collect();
    write_table(
        &a.out,
        &Table {
            kind: FEATURES.into(),
            columns,
            rows,
        },
    )
}

fn annotate(e: Error, context: &str) -> Error {
    match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{context}: {m}")),
        Error::ZeroVariance(m) => Error::ZeroVariance(format!("{context}: {m}")),
        Error::Format(m) => Error::Format(format!("{context}: {m}")),
        other => other,
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("{what}: '{s}' is not a number")))
}

pub fn profiles(a: ProfilesArgs) -> Result<()> {
    let t = read_table(&a.from, Some(FEATURES))?;
    if t.columns.len() < 3 || t.columns[0] != "speaker_id" || t.columns[1] != "segment_id" {
        return Err(Error::Format(
            "features table must start with speaker_id, segment_id and hold at least one feature".into(),
        ));
    }
    let names = t.columns[2..].to_vec();
    let rows = t
        .rows
        .iter()
        .map(|r| {
            let values = r[2..]
                .iter()
                .zip(&names)
                .map(|(v, n)| parse_f64(v, n))
                .collect::<Result<Vec<_>>>()?;
            Ok(SegmentRow {
                speaker_id: r[0].clone(),
                values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let set = build_profiles(&names, &rows)?;
    for (feature, reason) in &set.dropped {
        info!("feature {feature} dropped: {reason}");
    }
    let mut columns = vec!["speaker_id".to_string()];
    columns.extend(set.feature_names.iter().cloned());
    let table_rows = set
        .profiles
        .iter()
        .map(|p| {
            let mut row = vec![p.speaker_id.clone()];
            row.extend(p.values.iter().map(|v| v.to_string()));
            row
        })
        .collect();
    write_table(
        &a.out,
        &Table {
            kind: PROFILES.into(),
            columns,
            rows: table_rows,
        },
    )?;
    if let Some(radar) = &a.radar_out {
        let rows: Vec<RadarRow> = set
            .feature_names
            .iter()
            .enumerate()
            .flat_map(|(j, f)| {
                set.profiles.iter().map(move |p| RadarRow {
                    feature: f.clone(),
                    speaker_id: p.speaker_id.clone(),
                    value: p.values[j],
                })
            })
            .collect();
        write_records(radar, RADAR, &rows)?;
    }
    Ok(())
}

/// Mean r_z per speaker in one cell, over all subjects and trials.
fn speaker_means(rows: &[ScoreRow], cell: Cell) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.cell() == cell) {
        let e = acc.entry(r.speaker_id.clone()).or_default();
        e.0 += r.r_z;
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

pub fn stats(a: StatsArgs) -> Result<()> {
    let rows: Vec<ScoreRow> = read_records(&a.from, SCORES)?;
    let labels: BTreeSet<&str> = rows.iter().map(|r| r.lag_or_window.as_str()).collect();
    if labels.len() != 1 {
        return Err(Error::invalid(format!(
            "scores must come from one lag window, found {}",
            labels.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let label = *labels.iter().next().expect("one label");
    let scores: Vec<TrackingScore> = rows.iter().map(ScoreRow::to_score).collect();
    let subjects = cell_means_by_subject(&scores);
    let complete: Vec<_> = subjects.iter().filter_map(|s| s.complete()).collect();
    if complete.len() < subjects.len() {
        warn!(
            "{} of {} subjects lack some cells and are left out of the ANOVA",
            subjects.len() - complete.len(),
            subjects.len()
        );
    }
    let anova = rm_anova_2x4(&complete)?;
    let planned = planned_comparisons(&subjects)?;

    let mut out = Vec::new();
    let effects = [
        ("noise", &anova.factor_a),
        ("condition", &anova.factor_b),
        ("noise x condition", &anova.interaction),
    ];
    for (name, e) in effects {
        out.push(StatsRow {
            family: "anova".into(),
            test: name.into(),
            statistic: e.f,
            df_num: Some(e.df_num_corrected),
            df_den: Some(e.df_den_corrected),
            p_raw: e.p,
            p_adjusted: None,
            effect_size: Some(e.partial_eta_squared),
            epsilon: Some(e.epsilon),
            n: anova.n_subjects,
            p_reliable: true,
        });
    }
    for t in &planned {
        out.push(StatsRow {
            family: "planned".into(),
            test: t.label.clone(),
            statistic: t.statistic,
            df_num: Some(t.df),
            df_den: None,
            p_raw: t.p_raw,
            p_adjusted: Some(t.p_adjusted),
            effect_size: Some(t.effect_size),
            epsilon: None,
            n: t.df as usize + 1,
            p_reliable: true,
        });
    }
    if let Some(p) = &a.profiles {
        let table = read_table(p, Some(PROFILES))?;
        let av = speaker_means(&rows, Cell::new(Condition::AV, Noise::Noise));
        let aud = speaker_means(&rows, Cell::new(Condition::A, Noise::Noise));
        for (j, feature) in table.columns.iter().enumerate().skip(1) {
            let mut x = Vec::new();
            let mut y = Vec::new();
            for r in &table.rows {
                if let (Some(a), Some(b)) = (av.get(&r[0]), aud.get(&r[0])) {
                    x.push(parse_f64(&r[j], feature)?);
                    y.push(a - b);
                }
            }
            match spearman(&x, &y) {
                Ok(s) => out.push(StatsRow {
                    family: "spearman".into(),
                    test: format!("{feature} vs AV-A benefit (noise)"),
                    statistic: s.rho,
                    df_num: Some(s.n as f64 - 2.0),
                    df_den: None,
                    p_raw: s.p,
                    p_adjusted: None,
                    effect_size: None,
                    epsilon: None,
                    n: s.n,
                    p_reliable: s.p_reliable,
                }),
                Err(e) => warn!("spearman for {feature} skipped: {e}"),
            }
        }
    }
    write_records(&a.out, STATS, &out)?;
    if let Some(text) = &a.text {
        fs::write(text, text_report(label, &out))?;
    }
    Ok(())
}

fn text_report(label: &str, rows: &[StatsRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Tracking accuracy (r_z), lags {label}\n");
    let _ = writeln!(s, "2 x 4 repeated-measures ANOVA (Greenhouse-Geisser corrected)");
    for r in rows.iter().filter(|r| r.family == "anova") {
        let _ = writeln!(
            s,
            "  {:<24} F({:.2}, {:.2}) = {:.2}, p = {:.4}, partial eta^2 = {:.2}, eps = {:.3}",
            r.test,
            r.df_num.unwrap_or(f64::NAN),
            r.df_den.unwrap_or(f64::NAN),
            r.statistic,
            r.p_raw,
            r.effect_size.unwrap_or(f64::NAN),
            r.epsilon.unwrap_or(f64::NAN)
        );
    }
    let _ = writeln!(s, "\nPlanned paired t-tests (Holm-Bonferroni over the family)");
    for r in rows.iter().filter(|r| r.family == "planned") {
        let _ = writeln!(
            s,
            "  {:<28} t({}) = {:.2}, p = {:.4}, p_holm = {:.4}, d = {:.2}",
            r.test,
            r.df_num.unwrap_or(f64::NAN),
            r.statistic,
            r.p_raw,
            r.p_adjusted.unwrap_or(f64::NAN),
            r.effect_size.unwrap_or(f64::NAN)
        );
    }
    let spear: Vec<&StatsRow> = rows.iter().filter(|r| r.family == "spearman").collect();
    if !spear.is_empty() {
        let _ = writeln!(s, "\nSpearman correlations with the per-speaker AV benefit in noise");
        for r in spear {
            let flag = if r.p_reliable { "" } else { " (descriptive)" };
            let _ = writeln!(s, "  {:<44} rho = {:+.2}, n = {}, p = {:.3}{flag}", r.test, r.statistic, r.n, r.p_raw);
        }
    }
    s
}

fn channel_labels(n: usize) -> Vec<String> {
    if n == STANDARD_24.len() {
        STANDARD_24.iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("E{i}")).collect()
    }
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let kernel = match a.kernel {
        KernelKind::Gabor => ForwardKernel::gabor(a.channels, a.seed)?,
        KernelKind::Single => ForwardKernel::single_lag(a.channels, a.kernel_lag, a.seed)?,
        KernelKind::Null => ForwardKernel::null(a.channels, envtrack::decoder::SWEEP_LAGS),
    };
    let noise = if a.kernel == KernelKind::Null {
        NoiseLevel::NoiseOnly
    } else {
        NoiseLevel::SnrDb(a.snr_db)
    };
    let mut spec = SimSpec::uniform(a.subjects, a.trials, kernel, noise, a.seed);
    spec.epoch_s = a.epoch_s;
    for (cell, db) in &a.boost {
        if a.kernel == KernelKind::Null {
            return Err(Error::invalid("--boost needs a kernel with signal"));
        }
        spec.cell_mut(*cell).expect("all cells present").noise = NoiseLevel::SnrDb(a.snr_db + db);
    }
    let pairs = gen_condition_study(&spec)?;
    fs::create_dir_all(&a.out)?;
    let labels = channel_labels(a.channels);
    let mut manifests: BTreeMap<String, TrialManifest> = BTreeMap::new();
    for p in &pairs {
        let stem = file_stem(&p.trial_id);
        let eeg_name = format!("{stem}.eeg.sig");
        let env_name = format!("{stem}.env.sig");
        write_signal_file(&a.out.join(&eeg_name), &SignalFile::from_f64(&p.eeg, ANALYSIS_RATE_HZ, labels.clone())?)?;
        write_signal_file(&a.out.join(&env_name), &single_row(&p.envelope, ANALYSIS_RATE_HZ, "envelope")?)?;
        let m = manifests.entry(p.subject_id.clone()).or_insert_with(|| TrialManifest {
            metadata: Metadata {
                subject_id: p.subject_id.clone(),
                likeability_ratings: serde_json::Value::Null,
            },
            trials: Vec::new(),
            base_dir: a.out.clone(),
        });
        m.trials.push(ManifestTrial {
            trial_id: p.trial_id.clone(),
            speaker_id: p.speaker_id.clone(),
            condition: p.cell.condition,
            noise: p.cell.noise,
            audio_path: None,
            eeg_path: Some(PathBuf::from(eeg_name)),
            eeg_offset_s: 0.0,
            duration_s: a.epoch_s,
            envelope_path: Some(PathBuf::from(env_name)),
            video_dir: None,
            lip_roi: None,
            rejected: false,
        });
    }
    for (sub, m) in &manifests {
        m.save(&a.out.join(format!("{}.json", file_stem(sub))))?;
    }
    Ok(())
}
