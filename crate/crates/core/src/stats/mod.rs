//! Correlation, paired t-tests, 2×4 repeated-measures ANOVA with
//! Greenhouse-Geisser correction and Holm-Bonferroni adjustment.
//!
//! Student t and F tail probabilities come from `statrs` (regularized
//! incomplete beta, ~1e-14 relative accuracy).

mod anova;
mod design;

pub use anova::{rm_anova_2x4, AnovaEffect, RmAnovaResult};
pub use design::{cell_means_by_subject, planned_comparisons, SubjectCells, PLANNED_TESTS};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Outcome of one hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub label: String,
    pub statistic: f64,
    pub df: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub effect_size: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Two-sided p for Student's t with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Paired t-test of `x − y`; effect size is Cohen's d = mean(d) / sd(d).
pub fn paired_t(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} observations", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::TooShort { needed: 3, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("paired t-test inputs must be finite"));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let n = d.len() as f64;
    let m = mean(&d);
    let var = d.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    // relative guard: rounding leaves tiny spread in constant differences
    let scale = d.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(var.sqrt() > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::ZeroVariance("paired differences are constant; t is undefined".into()));
    }
    let sd = var.sqrt();
    let t = m / (sd / n.sqrt());
    let df = n - 1.0;
    let p = t_two_sided_p(t, df);
    Ok(TestResult {
        label: String::new(),
        statistic: t,
        df,
        p_raw: p,
        p_adjusted: p,
        effect_size: m / sd,
    })
}

/// Holm-Bonferroni step-down adjustment, returned in input order.
pub fn holm_bonferroni(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("p-value {p} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p_values[i]).min(1.0));
        adjusted[i] = running;
    }
    Ok(adjusted)
}

/// Fill `p_adjusted` of every result with Holm-adjusted values.
pub fn apply_holm(results: &mut [TestResult]) -> Result<()> {
    let raw: Vec<f64> = results.iter().map(|r| r.p_raw).collect();
    for (r, p) in results.iter_mut().zip(holm_bonferroni(&raw)?) {
        r.p_adjusted = p;
    }
    Ok(())
}

/// Pearson correlation; errors when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} observations", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: x.len() });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::ZeroVariance("correlation undefined for a constant variable".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Ranks starting at 1; tied values share the mean of their positions.
pub fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Samples below this size get a p-value flagged as unreliable.
pub const SPEARMAN_MIN_RELIABLE_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpearmanResult {
    pub rho: f64,
    /// Two-sided, from the t approximation with n − 2 df.
    pub p: f64,
    pub n: usize,
    pub p_reliable: bool,
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<SpearmanResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} observations", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::TooShort { needed: 3, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("spearman inputs must be finite"));
    }
    let rho = pearson(&mid_ranks(x), &mid_ranks(y))?;
    let n = x.len();
    let df = (n - 2) as f64;
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        t_two_sided_p(rho * (df / (1.0 - rho * rho)).sqrt(), df)
    };
    Ok(SpearmanResult {
        rho,
        p,
        n,
        p_reliable: n >= SPEARMAN_MIN_RELIABLE_N,
    })
}

#[cfg(test)]
#[path = "../../tests/support/oracle.rs"]
pub(crate) mod oracle;
#[cfg(test)]
mod tests;
