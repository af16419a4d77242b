use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

/// One within-subject effect of the 2×4 design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaEffect {
    pub label: String,
    pub f: f64,
    pub df_num: f64,
    pub df_den: f64,
    /// Greenhouse-Geisser corrected degrees of freedom (ε · uncorrected).
    pub df_num_corrected: f64,
    pub df_den_corrected: f64,
    pub epsilon: f64,
    /// p from the corrected degrees of freedom.
    pub p: f64,
    pub p_uncorrected: f64,
    pub partial_eta_squared: f64,
    pub ss_effect: f64,
    pub ss_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmAnovaResult {
    /// Factor A: the two-level factor (first array index).
    pub factor_a: AnovaEffect,
    /// Factor B: the four-level factor (second array index).
    pub factor_b: AnovaEffect,
    pub interaction: AnovaEffect,
    pub n_subjects: usize,
}

/// Orthonormal Helmert contrasts, (k − 1) × k.
fn helmert(k: usize) -> DMatrix<f64> {
    let mut c = DMatrix::<f64>::zeros(k - 1, k);
    for i in 1..k {
        let norm = ((i * (i + 1)) as f64).sqrt();
        for j in 0..i {
            c[(i - 1, j)] = 1.0 / norm;
        }
        c[(i - 1, i)] = -(i as f64) / norm;
    }
    c
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if !(f > 0.0) {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    FisherSnedecor::new(d1, d2).expect("positive df").sf(f)
}

/// Multivariate-contrast form: the k effect contrasts of each subject's
/// cell vector are tested against their between-subject spread.
fn effect(label: &str, y: &DMatrix<f64>, contrasts: &DMatrix<f64>) -> Result<AnovaEffect> {
    let n = y.nrows();
    let k = contrasts.nrows();
    let z = y * contrasts.transpose();
    let zbar = DVector::from_fn(k, |j, _| z.column(j).mean());
    let ss_effect = n as f64 * zbar.norm_squared();
    let mut centered = z.clone();
    for j in 0..k {
        let m = zbar[j];
        centered.column_mut(j).apply(|v| *v -= m);
    }
    let sscp = centered.transpose() * &centered;
    let ss_error = sscp.trace();
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(ss_error > 1e-24 * scale * scale * n as f64) {
        return Err(Error::ZeroVariance(format!(
            "no within-subject error variance for effect {label}"
        )));
    }
    let df_num = k as f64;
    let df_den = (k * (n - 1)) as f64;
    let f = (ss_effect / df_num) / (ss_error / df_den);
    let epsilon = if k == 1 {
        1.0
    } else {
        let tr = sscp.trace();
        let tr2 = (&sscp * &sscp).trace();
        (tr * tr / (k as f64 * tr2)).clamp(1.0 / k as f64, 1.0)
    };
    Ok(AnovaEffect {
        label: label.to_string(),
        f,
        df_num,
        df_den,
        df_num_corrected: epsilon * df_num,
        df_den_corrected: epsilon * df_den,
        epsilon,
        p: f_sf(f, epsilon * df_num, epsilon * df_den),
        p_uncorrected: f_sf(f, df_num, df_den),
        partial_eta_squared: ss_effect / (ss_effect + ss_error),
        ss_effect,
        ss_error,
    })
}

/// Two-way within-subject ANOVA on `data[subject][a][b]` (2 × 4 levels).
/// Non-finite cells are treated as missing and rejected.
pub fn rm_anova_2x4(data: &[[[f64; 4]; 2]]) -> Result<RmAnovaResult> {
    let n = data.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    for (s, subj) in data.iter().enumerate() {
        if subj.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("subject {s} has a missing or non-finite cell")));
        }
    }
    let y = DMatrix::from_fn(n, 8, |s, j| data[s][j / 4][j % 4]);
    let mean_a = DMatrix::from_element(1, 2, 1.0 / 2f64.sqrt());
    let mean_b = DMatrix::from_element(1, 4, 0.5);
    let (ca, cb) = (helmert(2), helmert(4));
    Ok(RmAnovaResult {
        factor_a: effect("A", &y, &kron(&ca, &mean_b))?,
        factor_b: effect("B", &y, &kron(&mean_a, &cb))?,
        interaction: effect("AxB", &y, &kron(&ca, &cb))?,
        n_subjects: n,
    })
}
