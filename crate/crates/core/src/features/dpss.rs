//! Discrete prolate spheroidal sequences from the symmetric tridiagonal
//! matrix that commutes with the time-frequency concentration operator.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

struct Tridiagonal {
    diag: Vec<f64>,
    /// off[i] couples i and i + 1.
    off: Vec<f64>,
}

impl Tridiagonal {
    fn dpss(n: usize, w: f64) -> Self {
        let c = (2.0 * std::f64::consts::PI * w).cos();
        let diag = (0..n)
            .map(|i| {
                let h = (n as f64 - 1.0 - 2.0 * i as f64) / 2.0;
                h * h * c
            })
            .collect();
        let off = (1..n).map(|i| (i * (n - i)) as f64 / 2.0).collect();
        Self { diag, off }
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let prev = if q == 0.0 { f64::EPSILON * self.off[i - 1].abs().max(1.0) } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The eigenvalue with ascending index `k`, by bisection.
    fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solve (T − μI)x = b by Gaussian elimination with partial pivoting.
    fn solve_shifted(&self, mu: f64, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        // row i of U holds u0 (diagonal), u1, u2 (two super-diagonals)
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut rhs = b.to_vec();
        let tiny = f64::EPSILON * self.gershgorin().1.abs().max(1.0);
        // current row state: (diag, sup1, sup2) awaiting elimination
        let mut cur = (self.diag[0] - mu, if n > 1 { self.off[0] } else { 0.0 }, 0.0);
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if cur.0 == 0.0 { tiny } else { cur.0 };
                u1[i] = 0.0;
                u2[i] = 0.0;
                break;
            }
            let below = self.off[i];
            let next = (
                below,
                self.diag[i + 1] - mu,
                if i + 2 < n { self.off[i + 1] } else { 0.0 },
            );
            // next row in columns (i, i+1, i+2); cur row in (i, i+1, i+2)
            let (pivot_row, other_row) = if next.0.abs() > cur.0.abs() {
                rhs.swap(i, i + 1);
                (next, cur)
            } else {
                (cur, next)
            };
            let p = if pivot_row.0 == 0.0 { tiny } else { pivot_row.0 };
            let m = other_row.0 / p;
            u0[i] = p;
            u1[i] = pivot_row.1;
            u2[i] = pivot_row.2;
            rhs[i + 1] -= m * rhs[i];
            cur = (other_row.1 - m * pivot_row.1, other_row.2 - m * pivot_row.2, 0.0);
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * x[i + 2];
            }
            x[i] = s / u0[i];
        }
        x
    }

    fn eigenvector(&self, lambda: f64, seed_index: usize) -> Vec<f64> {
        let n = self.diag.len();
        let scale = self.gershgorin().1.abs().max(1.0);
        let mu = lambda + scale * 1e-13;
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * (((i * 7 + seed_index * 13) % 17) as f64 / 17.0))
            .collect();
        for _ in 0..4 {
            v = self.solve_shifted(mu, &v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

fn compute(n: usize, nw: f64, k: usize) -> Vec<Vec<f64>> {
    let t = Tridiagonal::dpss(n, nw / n as f64);
    (0..k)
        .map(|order| {
            let lambda = t.eigenvalue(n - 1 - order);
            let mut v = t.eigenvector(lambda, order);
            // symmetric tapers sum positive, antisymmetric ones start positive
            let s: f64 = if order % 2 == 0 {
                v.iter().sum()
            } else {
                v.iter().enumerate().map(|(i, x)| (n as f64 - 1.0 - 2.0 * i as f64) * x).sum()
            };
            if s < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect()
}

type Key = (usize, u64, usize);

/// The first `k` DPSS tapers of length `n` and time-halfbandwidth `nw`,
/// each with unit energy. Results are cached by (n, nw, k).
pub fn dpss(n: usize, nw: f64, k: usize) -> Result<Arc<Vec<Vec<f64>>>> {
    if n < 2 || k == 0 || k > n {
        return Err(Error::invalid(format!("invalid DPSS request n = {n}, k = {k}")));
    }
    if !(nw > 0.0 && nw < n as f64 / 2.0) {
        return Err(Error::invalid(format!("time-halfbandwidth {nw} out of range for n = {n}")));
    }
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<Vec<f64>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, nw.to_bits(), k);
    if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let tapers = Arc::new(compute(n, nw, k));
    let mut guard = cache.lock().expect("cache lock");
    if guard.len() > 8 {
        guard.clear();
    }
    guard.insert(key, Arc::clone(&tapers));
    Ok(tapers)
}
