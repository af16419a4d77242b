//! Spherical-spline interpolation of scalp potentials.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Spline order.
pub const SPLINE_ORDER: i32 = 4;
/// Number of Legendre terms in the series.
pub const LEGENDRE_TERMS: usize = 50;
/// Added to the diagonal of the spline system.
pub const REGULARIZATION: f64 = 1e-5;

/// g(x) = 1/(4π) Σ_{n≥1} (2n+1) / (n(n+1))^m · P_n(x)
pub fn spline_kernel(cos_angle: f64) -> f64 {
    let x = cos_angle.clamp(-1.0, 1.0);
    let (mut p_prev, mut p) = (1.0, x);
    let mut sum = 0.0;
    for n in 1..=LEGENDRE_TERMS {
        let nf = n as f64;
        sum += (2.0 * nf + 1.0) / (nf * (nf + 1.0)).powi(SPLINE_ORDER) * p;
        let p_next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = p_next;
    }
    sum / (4.0 * std::f64::consts::PI)
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Weight matrix (targets × sources) mapping source potentials to target
/// potentials.
pub fn interpolation_matrix(sources: &[[f64; 3]], targets: &[[f64; 3]]) -> Result<DMatrix<f64>> {
    let n = sources.len();
    if n == 0 {
        return Err(Error::invalid("spline interpolation needs source channels"));
    }
    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = spline_kernel(dot(&sources[i], &sources[j]));
        }
        a[(i, i)] += REGULARIZATION;
        a[(i, n)] = 1.0;
        a[(n, i)] = 1.0;
    }
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::Singular("spherical spline system".into()))?;
    let mut g = DMatrix::<f64>::zeros(targets.len(), n + 1);
    for (t, tp) in targets.iter().enumerate() {
        for (s, sp) in sources.iter().enumerate() {
            g[(t, s)] = spline_kernel(dot(tp, sp));
        }
        g[(t, n)] = 1.0;
    }
    Ok((g * inv).columns(0, n).into_owned())
}
