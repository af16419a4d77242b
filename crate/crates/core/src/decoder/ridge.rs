use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Cholesky factorization `A = UᵀU`, with `U` upper triangular and stored
/// column-major so every inner product runs over contiguous memory.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky {
    n: usize,
    u: Vec<f64>,
}

impl Cholesky {
    pub(crate) fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
        let tol = scale * n as f64 * f64::EPSILON;
        let mut u = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..=j {
                let (ci, cj) = (i * n, j * n);
                let dot: f64 = u[ci..ci + i].iter().zip(&u[cj..cj + i]).map(|(x, y)| x * y).sum();
                let v = a[(i, j)] - dot;
                if i == j {
                    if !(v > tol) {
                        return Err(Error::Singular(format!(
                            "normal equations not positive definite at pivot {j} (pivot {v:.3e})"
                        )));
                    }
                    u[cj + j] = v.sqrt();
                } else {
                    u[cj + i] = v / u[ci + i];
                }
            }
        }
        Ok(Self { n, u })
    }

    pub(crate) fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let u = &self.u;
        let mut z = b.clone();
        for i in 0..n {
            let c = i * n;
            let dot: f64 = u[c..c + i].iter().zip(z.iter()).map(|(x, y)| x * y).sum();
            z[i] = (z[i] - dot) / u[c + i];
        }
        for i in (0..n).rev() {
            let c = i * n;
            z[i] /= u[c + i];
            let wi = z[i];
            for k in 0..i {
                z[k] -= u[c + k] * wi;
            }
        }
        z
    }
}

/// Add `lambda` to every diagonal entry except the last (intercept) one.
pub(crate) fn penalize(gram: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let mut a = gram.clone();
    let p = a.nrows();
    for i in 0..p.saturating_sub(1) {
        a[(i, i)] += lambda;
    }
    a
}

/// Ridge regression with an unpenalized intercept in the last column of `x`:
/// `w = (XᵀX + λD)⁻¹ Xᵀy`, `D` the identity with a zero at the intercept.
pub fn ridge_fit(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if x.nrows() != y.len() {
        return Err(Error::invalid(format!(
            "design has {} rows but the target has {} samples",
            x.nrows(),
            y.len()
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let gram = x.transpose() * x;
    let xty = x.tr_mul(&DVector::from_column_slice(y));
    let chol = Cholesky::new(&penalize(&gram, lambda))?;
    Ok(chol.solve(&xty).iter().copied().collect())
}
