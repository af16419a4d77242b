use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Lag step at the 64 Hz analysis rate.
pub const LAG_STEP_MS: f64 = 1000.0 / crate::ANALYSIS_RATE_HZ;

/// Number of single-lag sweep points (0 to 500 ms).
pub const SWEEP_LAGS: usize = 33;

/// Time window of interest for the multi-lag model.
pub const WINDOW_OF_INTEREST_MS: [f64; 2] = [200.0, 325.0];

/// Set of integer sample lags at 64 Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct LagSpec {
    pub lag_indices: Vec<usize>,
    pub window_ms: [f64; 2],
}

impl LagSpec {
    /// All lags `k` with `min ≤ k·15.625 ≤ max`.
    pub fn from_window_ms(min_ms: f64, max_ms: f64) -> Result<Self> {
        if !(min_ms.is_finite() && max_ms.is_finite()) {
            return Err(Error::invalid("lag window bounds must be finite"));
        }
        if min_ms > max_ms {
            return Err(Error::invalid(format!("inverted lag window [{min_ms}, {max_ms}] ms")));
        }
        let lo = (min_ms.max(0.0) / LAG_STEP_MS).ceil() as usize;
        let hi = (max_ms / LAG_STEP_MS).floor();
        if hi < 0.0 || (hi as usize) < lo {
            return Err(Error::invalid(format!(
                "lag window [{min_ms}, {max_ms}] ms contains no sample lag"
            )));
        }
        Ok(Self {
            lag_indices: (lo..=hi as usize).collect(),
            window_ms: [min_ms, max_ms],
        })
    }

    pub fn single(lag: usize) -> Self {
        let ms = lag as f64 * LAG_STEP_MS;
        Self {
            lag_indices: vec![lag],
            window_ms: [ms, ms],
        }
    }

    pub fn window_of_interest() -> Self {
        Self::from_window_ms(WINDOW_OF_INTEREST_MS[0], WINDOW_OF_INTEREST_MS[1])
            .expect("fixed window is valid")
    }

    pub fn n_lags(&self) -> usize {
        self.lag_indices.len()
    }

    pub fn max_lag(&self) -> usize {
        self.lag_indices.last().copied().unwrap_or(0)
    }

    /// Short tag used in score tables: `lag16` or `200-325ms`.
    pub fn label(&self) -> String {
        if self.lag_indices.len() == 1 && self.window_ms[0] == self.window_ms[1] {
            format!("lag{}", self.lag_indices[0])
        } else {
            format!("{}-{}ms", self.window_ms[0], self.window_ms[1])
        }
    }
}

/// Backward-model design matrix: row `t` holds every channel at `t + lag`,
/// column `c·n_lags + ℓ` is channel `c` at the `ℓ`-th lag, intercept last.
pub fn build_lag_matrix(eeg: &[Vec<f64>], lag_spec: &LagSpec) -> Result<DMatrix<f64>> {
    if eeg.is_empty() || lag_spec.lag_indices.is_empty() {
        return Err(Error::invalid("need at least one channel and one lag"));
    }
    let n = eeg[0].len();
    if eeg.iter().any(|c| c.len() != n) {
        return Err(Error::invalid("all channels must have the same length"));
    }
    let max_lag = lag_spec.max_lag();
    if n <= max_lag {
        return Err(Error::TooShort {
            needed: max_lag + 1,
            got: n,
        });
    }
    let rows = n - max_lag;
    let n_lags = lag_spec.n_lags();
    let cols = eeg.len() * n_lags + 1;
    let mut x = DMatrix::<f64>::zeros(rows, cols);
    for (c, channel) in eeg.iter().enumerate() {
        for (l, &lag) in lag_spec.lag_indices.iter().enumerate() {
            x.column_mut(c * n_lags + l)
                .copy_from_slice(&channel[lag..lag + rows]);
        }
    }
    x.column_mut(cols - 1).fill(1.0);
    Ok(x)
}
