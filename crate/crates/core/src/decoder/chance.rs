use log::warn;
use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lag::{LagSpec, SWEEP_LAGS};
use super::loo::{factors, group, loo_eval, prepare_cell, select_in_cell, validate_grid};
use super::{score_z, CellKey, TrialPair};
use crate::error::{Error, Result};
use crate::seed;

/// How the ridge parameter is fixed for permuted data.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    /// Selected once per group on the true EEG–envelope pairing.
    Select(Vec<f64>),
}

/// Permutation distribution of the group-mean reconstruction score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChanceSummary {
    pub key: CellKey,
    pub lag_or_window: String,
    pub lambda: f64,
    pub n_perm: usize,
    /// Mean over permutations of the group-mean r.
    pub mean_r: f64,
    /// Group-mean r_z of every permutation, in draw order.
    pub samples_rz: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q975: f64,
    pub p95: f64,
}

/// Uniform random derangement by rejection of uniform shuffles.
pub(crate) fn derangement<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        p.shuffle(rng);
        if p.iter().enumerate().all(|(i, &j)| i != j) {
            return p;
        }
    }
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(key: CellKey, label: String, lambda: f64, rs: Vec<f64>, rzs: Vec<f64>) -> ChanceSummary {
    let n = rzs.len() as f64;
    let mean = rzs.iter().sum::<f64>() / n;
    let sd = if rzs.len() > 1 {
        (rzs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = rzs.clone();
    sorted.sort_by(f64::total_cmp);
    ChanceSummary {
        key,
        lag_or_window: label,
        lambda,
        n_perm: rzs.len(),
        mean_r: rs.iter().sum::<f64>() / n,
        mean,
        sd,
        q025: quantile(&sorted, 0.025),
        q975: quantile(&sorted, 0.975),
        p95: quantile(&sorted, 0.95),
        samples_rz: rzs,
    }
}

/// Chance distribution per subject × cell group: the leave-one-out scoring is
/// repeated `n_perm` times with envelopes re-paired to EEG by a uniform
/// derangement within the group. Seeded and reproducible.
pub fn chance_level(
    trials: &[TrialPair],
    lag_spec: &LagSpec,
    lambda: &LambdaChoice,
    n_perm: usize,
    seed: u64,
) -> Result<Vec<ChanceSummary>> {
    if n_perm == 0 {
        return Err(Error::invalid("n_perm must be at least 1"));
    }
    let grid = match lambda {
        LambdaChoice::Select(g) => Some(validate_grid(g)?),
        LambdaChoice::Fixed(_) => None,
    };
    let label = lag_spec.label();
    let mut out = Vec::new();
    for (key, members) in group(trials) {
        if members.len() < 2 {
            warn!("cell {key} has {} trial(s); no chance distribution", members.len());
            continue;
        }
        let cell = prepare_cell(key.clone(), members, lag_spec)?;
        let lam = match (&grid, lambda) {
            (Some(g), _) => select_in_cell(&cell, g)?.0,
            (None, LambdaChoice::Fixed(l)) => *l,
            (None, LambdaChoice::Select(_)) => unreachable!(),
        };
        let f = factors(&cell, lam)?;
        let n = cell.trials.len();
        if cell.targets.iter().any(|t| t.len() != cell.targets[0].len()) {
            return Err(Error::LengthMismatch(format!(
                "trials of cell {key} differ in length; cannot permute envelopes"
            )));
        }
        let mut rng = seed::stream(
            seed,
            &[seed::hash_str(&key.to_string()), seed::hash_str(&label)],
        );
        let perms: Vec<Vec<usize>> = (0..n_perm).map(|_| derangement(n, &mut rng)).collect();
        let (rs, rzs): (Vec<f64>, Vec<f64>) = perms
            .iter()
            .map(|perm| {
                let targets: Vec<&DVector<f64>> = perm.iter().map(|&j| &cell.targets[j]).collect();
                let res = loo_eval(&cell.prepared, &f, &targets);
                let k = res.len() as f64;
                (
                    res.iter().map(|(r, _)| r).sum::<f64>() / k,
                    res.iter().map(|(r, _)| score_z(*r)).sum::<f64>() / k,
                )
            })
            .unzip();
        out.push(summarize(key, label.clone(), lam, rs, rzs));
    }
    Ok(out)
}

/// Chance distributions for every single-lag sweep point.
pub fn chance_sweep(trials: &[TrialPair], grid: &[f64], n_perm: usize, seed: u64) -> Result<Vec<ChanceSummary>> {
    let choice = LambdaChoice::Select(grid.to_vec());
    let per_lag = (0..SWEEP_LAGS)
        .into_par_iter()
        .map(|k| chance_level(trials, &LagSpec::single(k), &choice, n_perm, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_lag.into_iter().flatten().collect())
}
