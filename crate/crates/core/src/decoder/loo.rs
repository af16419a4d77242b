use std::collections::BTreeMap;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lag::{build_lag_matrix, LagSpec, LAG_STEP_MS, SWEEP_LAGS};
use super::ridge::{penalize, Cholesky};
use super::{score_z, CellKey, DecoderModel, TrackingScore, TrialPair};
use crate::error::{Error, Result};

/// Per-trial standardized design and its Gram matrix.
pub(crate) struct Prepared {
    pub(crate) x: DMatrix<f64>,
    pub(crate) gram: DMatrix<f64>,
}

/// Trials of one cell prepared for a given lag set.
pub(crate) struct CellData<'a> {
    pub(crate) key: CellKey,
    pub(crate) trials: Vec<&'a TrialPair>,
    pub(crate) prepared: Vec<Prepared>,
    /// Each trial's own envelope, trimmed and z-scored.
    pub(crate) targets: Vec<DVector<f64>>,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let ss = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    (m, (ss / (n - 1.0)).sqrt())
}

/// Z-score every column except the last; constant columns become zero.
fn standardize_columns(x: &mut DMatrix<f64>) {
    let p = x.ncols();
    for j in 0..p - 1 {
        let mut col = x.column_mut(j);
        let (m, sd) = mean_sd(col.as_slice());
        if sd > 0.0 && sd.is_finite() {
            col.apply(|v| *v = (*v - m) / sd);
        } else {
            col.fill(0.0);
        }
    }
}

pub(crate) fn standardized_target(envelope: &[f64], rows: usize) -> Result<DVector<f64>> {
    let y = &envelope[..rows];
    let (m, sd) = mean_sd(y);
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(Error::ZeroVariance("envelope segment is constant".into()));
    }
    Ok(DVector::from_iterator(rows, y.iter().map(|v| (v - m) / sd)))
}

fn prepare(trial: &TrialPair, lag_spec: &LagSpec) -> Result<Prepared> {
    let mut x = build_lag_matrix(&trial.eeg, lag_spec)?;
    standardize_columns(&mut x);
    let gram = x.transpose() * &x;
    Ok(Prepared { x, gram })
}

/// Group trials by subject and cell, keeping input order within each group.
pub(crate) fn group(trials: &[TrialPair]) -> BTreeMap<CellKey, Vec<&TrialPair>> {
    let mut map: BTreeMap<CellKey, Vec<&TrialPair>> = BTreeMap::new();
    for t in trials {
        map.entry(CellKey {
            subject_id: t.subject_id.clone(),
            cell: t.cell,
        })
        .or_default()
        .push(t);
    }
    map
}

pub(crate) fn prepare_cell<'a>(
    key: CellKey,
    trials: Vec<&'a TrialPair>,
    lag_spec: &LagSpec,
) -> Result<CellData<'a>> {
    let n_channels = trials[0].n_channels();
    if trials.iter().any(|t| t.n_channels() != n_channels) {
        return Err(Error::invalid(format!("trials of cell {key} differ in channel count")));
    }
    let prepared = trials
        .par_iter()
        .map(|t| prepare(t, lag_spec))
        .collect::<Result<Vec<_>>>()?;
    let targets = trials
        .iter()
        .zip(&prepared)
        .map(|(t, p)| standardized_target(&t.envelope, p.x.nrows()))
        .collect::<Result<Vec<_>>>()?;
    Ok(CellData {
        key,
        trials,
        prepared,
        targets,
    })
}

pub(crate) fn factors(cell: &CellData<'_>, lambda: f64) -> Result<Vec<Cholesky>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    cell.prepared
        .par_iter()
        .map(|p| Cholesky::new(&penalize(&p.gram, lambda)))
        .collect()
}

pub(crate) fn trial_weights(
    prepared: &[Prepared],
    factors: &[Cholesky],
    targets: &[&DVector<f64>],
) -> Vec<DVector<f64>> {
    prepared
        .par_iter()
        .zip(factors.par_iter())
        .zip(targets.par_iter())
        .map(|((p, f), y)| f.solve(&p.x.tr_mul(*y)))
        .collect()
}

fn pearson(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let n = a.len() as f64;
    let ma = a.sum() / n;
    let mb = b.sum() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa > 0.0 && sbb > 0.0 {
        (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

/// Mean of the weight vectors of every trial except `held_out`, summed in index order.
pub(crate) fn loo_mean(weights: &[DVector<f64>], held_out: usize) -> DVector<f64> {
    let mut acc = DVector::<f64>::zeros(weights[0].len());
    for (j, w) in weights.iter().enumerate() {
        if j != held_out {
            acc += w;
        }
    }
    acc / (weights.len() - 1) as f64
}

/// Leave-one-out evaluation: `(r, mse)` per held-out trial.
pub(crate) fn loo_eval(
    prepared: &[Prepared],
    factors: &[Cholesky],
    targets: &[&DVector<f64>],
) -> Vec<(f64, f64)> {
    let weights = trial_weights(prepared, factors, targets);
    (0..prepared.len())
        .into_par_iter()
        .map(|h| {
            let w = loo_mean(&weights, h);
            let pred = &prepared[h].x * w;
            let y = targets[h];
            let mse = (&pred - y).norm_squared() / y.len() as f64;
            (pearson(&pred, y), mse)
        })
        .collect()
}

fn cell_mse(cell: &CellData<'_>, lambda: f64) -> Result<f64> {
    let f = factors(cell, lambda)?;
    let targets: Vec<&DVector<f64>> = cell.targets.iter().collect();
    let res = loo_eval(&cell.prepared, &f, &targets);
    Ok(res.iter().map(|(_, m)| m).sum::<f64>() / res.len() as f64)
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::invalid("lambda grid is empty"));
    }
    if grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(Error::invalid("lambda grid values must be finite and >= 0"));
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

pub(crate) fn select_in_cell(cell: &CellData<'_>, grid: &[f64]) -> Result<(f64, Vec<(f64, f64)>)> {
    let curve = grid
        .iter()
        .map(|&l| cell_mse(cell, l).map(|m| (l, m)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = curve[0];
    for &(l, m) in &curve[1..] {
        // ascending grid: `<=` resolves ties toward the larger lambda
        if m <= best.1 {
            best = (l, m);
        }
    }
    Ok((best.0, curve))
}

fn single_cell<'a>(trials: &'a [TrialPair], lag_spec: &LagSpec) -> Result<CellData<'a>> {
    if trials.len() < 2 {
        return Err(Error::invalid(format!(
            "lambda selection needs at least 2 trials, got {}",
            trials.len()
        )));
    }
    let key = CellKey {
        subject_id: trials[0].subject_id.clone(),
        cell: trials[0].cell,
    };
    prepare_cell(key, trials.iter().collect(), lag_spec)
}

/// Mean leave-one-out MSE (z-scored envelope units) for each grid value,
/// treating all `trials` as one cell. Returned in ascending lambda order.
pub fn lambda_mse_curve(trials: &[TrialPair], lag_spec: &LagSpec, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let grid = validate_grid(grid)?;
    let cell = single_cell(trials, lag_spec)?;
    Ok(select_in_cell(&cell, &grid)?.1)
}

/// Grid value minimizing mean leave-one-out MSE over `trials`, treated as one
/// cell. Ties go to the larger lambda.
pub fn select_lambda(trials: &[TrialPair], lag_spec: &LagSpec, grid: &[f64]) -> Result<f64> {
    let grid = validate_grid(grid)?;
    let cell = single_cell(trials, lag_spec)?;
    Ok(select_in_cell(&cell, &grid)?.0)
}

enum Lambda<'g> {
    Fixed(f64),
    Select(&'g [f64]),
}

struct CellScores {
    key: CellKey,
    lambda: f64,
    scores: Vec<TrackingScore>,
}

fn score_cell(cell: &CellData<'_>, lag_spec: &LagSpec, lambda: &Lambda<'_>) -> Result<CellScores> {
    let lambda = match lambda {
        Lambda::Fixed(l) => *l,
        Lambda::Select(grid) => select_in_cell(cell, grid)?.0,
    };
    let f = factors(cell, lambda)?;
    let targets: Vec<&DVector<f64>> = cell.targets.iter().collect();
    let res = loo_eval(&cell.prepared, &f, &targets);
    let label = lag_spec.label();
    let scores = cell
        .trials
        .iter()
        .zip(res)
        .map(|(t, (r, _))| TrackingScore {
            trial_id: t.trial_id.clone(),
            subject_id: t.subject_id.clone(),
            speaker_id: t.speaker_id.clone(),
            cell: t.cell,
            lag_or_window: label.clone(),
            lambda,
            r,
            r_z: score_z(r),
        })
        .collect();
    Ok(CellScores {
        key: cell.key.clone(),
        lambda,
        scores,
    })
}

fn score_all(trials: &[TrialPair], lag_spec: &LagSpec, lambda: Lambda<'_>) -> Result<Vec<CellScores>> {
    let mut out = Vec::new();
    for (key, members) in group(trials) {
        if members.len() < 2 {
            warn!("cell {key} has {} trial(s); skipped", members.len());
            continue;
        }
        let cell = prepare_cell(key, members, lag_spec)?;
        out.push(score_cell(&cell, lag_spec, &lambda)?);
    }
    Ok(out)
}

/// Leave-one-out reconstruction scores at a fixed lambda. Each trial is
/// decoded with the mean weights of the other trials in its subject × cell
/// group; groups with fewer than 2 trials are skipped with a warning.
pub fn loo_scores(trials: &[TrialPair], lag_spec: &LagSpec, lambda: f64) -> Result<Vec<TrackingScore>> {
    Ok(score_all(trials, lag_spec, Lambda::Fixed(lambda))?
        .into_iter()
        .flat_map(|c| c.scores)
        .collect())
}

/// Multi-lag model over `window_ms`, lambda selected per subject × cell.
pub fn window_model(trials: &[TrialPair], window_ms: [f64; 2], grid: &[f64]) -> Result<Vec<TrackingScore>> {
    lagged_model(trials, &LagSpec::from_window_ms(window_ms[0], window_ms[1])?, grid)
}

/// Leave-one-out scores for any lag set, lambda selected per subject × cell.
pub fn lagged_model(trials: &[TrialPair], lag_spec: &LagSpec, grid: &[f64]) -> Result<Vec<TrackingScore>> {
    let grid = validate_grid(grid)?;
    Ok(score_all(trials, lag_spec, Lambda::Select(&grid))?
        .into_iter()
        .flat_map(|c| c.scores)
        .collect())
}

/// One point of a single-lag sweep for one subject × cell group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub key: CellKey,
    pub lag_index: usize,
    pub lag_ms: f64,
    pub lambda: f64,
    pub mean_r: f64,
    pub mean_rz: f64,
    pub n_trials: usize,
}

/// Single-lag models at every lag 0..=32 (0 to 500 ms), lambda selected per
/// lag and group. Points are ordered by group, then lag.
pub fn single_lag_sweep(trials: &[TrialPair], grid: &[f64]) -> Result<Vec<SweepPoint>> {
    let grid = validate_grid(grid)?;
    let per_lag = (0..SWEEP_LAGS)
        .into_par_iter()
        .map(|k| score_all(trials, &LagSpec::single(k), Lambda::Select(&grid)))
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::new();
    for (k, cells) in per_lag.into_iter().enumerate() {
        for c in cells {
            let n = c.scores.len() as f64;
            points.push(SweepPoint {
                key: c.key,
                lag_index: k,
                lag_ms: k as f64 * LAG_STEP_MS,
                lambda: c.lambda,
                mean_r: c.scores.iter().map(|s| s.r).sum::<f64>() / n,
                mean_rz: c.scores.iter().map(|s| s.r_z).sum::<f64>() / n,
                n_trials: c.scores.len(),
            });
        }
    }
    points.sort_by(|a, b| a.key.cmp(&b.key).then(a.lag_index.cmp(&b.lag_index)));
    Ok(points)
}

/// Decoder averaged over all trials of one group at a fixed lambda.
pub fn fit_cell_model(trials: &[TrialPair], lag_spec: &LagSpec, lambda: f64) -> Result<DecoderModel> {
    if trials.is_empty() {
        return Err(Error::invalid("no trials to fit"));
    }
    let key = CellKey {
        subject_id: trials[0].subject_id.clone(),
        cell: trials[0].cell,
    };
    let cell = prepare_cell(key, trials.iter().collect(), lag_spec)?;
    let f = factors(&cell, lambda)?;
    let targets: Vec<&DVector<f64>> = cell.targets.iter().collect();
    let weights = trial_weights(&cell.prepared, &f, &targets);
    let mut acc = DVector::<f64>::zeros(weights[0].len());
    for w in &weights {
        acc += w;
    }
    acc /= weights.len() as f64;
    Ok(DecoderModel {
        weights: acc.iter().copied().collect(),
        lambda,
        n_channels: trials[0].n_channels(),
        lag_indices: lag_spec.lag_indices.clone(),
        window_ms: lag_spec.window_ms,
        training_trial_ids: trials.iter().map(|t| t.trial_id.clone()).collect(),
    })
}
