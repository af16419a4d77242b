//! Reference computations for statistics tests. Written from textbook
//! definitions with no shared code with the library: numeric integration for
//! tail probabilities, classical sums-of-squares ANOVA, counting-based ranks.
#![allow(dead_code)]

/// ln Γ(x) by the Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson integral of `f` over [a, b].
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// ∫_x^∞ density, via the substitution t = x / u on u ∈ (0, 1].
fn upper_tail(density: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let g = |u: f64| if u <= 0.0 { 0.0 } else { density(x / u) * x / (u * u) };
    integrate(&g, 0.0, 1.0, 1e-15)
}

pub fn t_density(x: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// Two-sided Student t p-value.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    let x = t.abs();
    if x == 0.0 {
        return 1.0;
    }
    2.0 * upper_tail(&|v| t_density(v, df), x)
}

pub fn f_density(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_b = ln_gamma(d1 / 2.0) + ln_gamma(d2 / 2.0) - ln_gamma((d1 + d2) / 2.0);
    let ln = 0.5 * d1 * (d1 / d2).ln() + (0.5 * d1 - 1.0) * x.ln()
        - 0.5 * (d1 + d2) * (1.0 + d1 * x / d2).ln()
        - ln_b;
    ln.exp()
}

/// Upper-tail F probability.
pub fn f_upper(f: f64, d1: f64, d2: f64) -> f64 {
    upper_tail(&|v| f_density(v, d1, d2), f)
}

pub struct PairedT {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub d: f64,
}

pub fn paired_t(x: &[f64], y: &[f64]) -> PairedT {
    let n = x.len() as f64;
    // textbook computational form: sums and sums of squares
    let s1: f64 = x.iter().zip(y).map(|(a, b)| a - b).sum();
    let s2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let mean = s1 / n;
    let sd = ((s2 - s1 * s1 / n) / (n - 1.0)).sqrt();
    let t = mean / (sd / n.sqrt());
    PairedT {
        t,
        df: n - 1.0,
        p: t_two_sided(t, n - 1.0),
        d: mean / sd,
    }
}

pub struct Effect {
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub epsilon: f64,
    pub p: f64,
    pub partial_eta2: f64,
}

fn box_epsilon(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let k = rows[0].len();
    let means: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let mut s = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            s[i][j] = rows.iter().map(|r| (r[i] - means[i]) * (r[j] - means[j])).sum::<f64>() / (n - 1) as f64;
        }
    }
    // double centering
    let row_m: Vec<f64> = s.iter().map(|r| r.iter().sum::<f64>() / k as f64).collect();
    let all_m = row_m.iter().sum::<f64>() / k as f64;
    let dc: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| s[i][j] - row_m[i] - row_m[j] + all_m).collect())
        .collect();
    let tr: f64 = (0..k).map(|i| dc[i][i]).sum();
    let tr2: f64 = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| dc[i][j] * dc[i][j]).sum();
    tr * tr / ((k - 1) as f64 * tr2)
}

/// Classical two-way within-subject ANOVA: [A, B, A×B].
pub fn rm_anova_2x4(y: &[[[f64; 4]; 2]]) -> [Effect; 3] {
    let n = y.len();
    let nf = n as f64;
    let g: f64 = y.iter().flatten().flatten().sum::<f64>() / (8.0 * nf);
    let ms: Vec<f64> = y.iter().map(|s| s.iter().flatten().sum::<f64>() / 8.0).collect();
    let ma: Vec<f64> = (0..2).map(|a| y.iter().map(|s| s[a].iter().sum::<f64>()).sum::<f64>() / (4.0 * nf)).collect();
    let mb: Vec<f64> = (0..4).map(|b| y.iter().map(|s| s[0][b] + s[1][b]).sum::<f64>() / (2.0 * nf)).collect();
    let mab = |a: usize, b: usize| y.iter().map(|s| s[a][b]).sum::<f64>() / nf;
    let msa = |s: usize, a: usize| y[s][a].iter().sum::<f64>() / 4.0;
    let msb = |s: usize, b: usize| (y[s][0][b] + y[s][1][b]) / 2.0;

    let mut ss_a = 0.0;
    let mut ss_as = 0.0;
    for a in 0..2 {
        ss_a += 4.0 * nf * (ma[a] - g).powi(2);
        for s in 0..n {
            ss_as += 4.0 * (msa(s, a) - ms[s] - ma[a] + g).powi(2);
        }
    }
    let mut ss_b = 0.0;
    let mut ss_bs = 0.0;
    for b in 0..4 {
        ss_b += 2.0 * nf * (mb[b] - g).powi(2);
        for s in 0..n {
            ss_bs += 2.0 * (msb(s, b) - ms[s] - mb[b] + g).powi(2);
        }
    }
    let mut ss_ab = 0.0;
    let mut ss_abs = 0.0;
    for a in 0..2 {
        for b in 0..4 {
            ss_ab += nf * (mab(a, b) - ma[a] - mb[b] + g).powi(2);
            for s in 0..n {
                let r = y[s][a][b] - msa(s, a) - msb(s, b) - mab(a, b) + ms[s] + ma[a] + mb[b] - g;
                ss_abs += r * r;
            }
        }
    }
    let b_rows: Vec<Vec<f64>> = (0..n).map(|s| (0..4).map(|b| msb(s, b)).collect()).collect();
    let ab_rows: Vec<Vec<f64>> = (0..n).map(|s| (0..4).map(|b| y[s][0][b] - y[s][1][b]).collect()).collect();
    let make = |ss: f64, sse: f64, df1: f64, df2: f64, eps: f64| {
        let f = (ss / df1) / (sse / df2);
        Effect {
            f,
            df1,
            df2,
            epsilon: eps,
            p: f_upper(f, eps * df1, eps * df2),
            partial_eta2: ss / (ss + sse),
        }
    };
    [
        make(ss_a, ss_as, 1.0, nf - 1.0, 1.0),
        make(ss_b, ss_bs, 3.0, 3.0 * (nf - 1.0), box_epsilon(&b_rows)),
        make(ss_ab, ss_abs, 3.0, 3.0 * (nf - 1.0), box_epsilon(&ab_rows)),
    ]
}

/// Holm adjustment written as a double loop over the step-down definition.
pub fn holm_brute(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let before = |j: usize, i: usize| p[j] < p[i] || (p[j] == p[i] && j <= i);
    (0..m)
        .map(|i| {
            let mut adj = 0.0f64;
            for j in 0..m {
                if before(j, i) {
                    let rank = (0..m).filter(|&k| k != j && before(k, j)).count();
                    adj = adj.max(((m - rank) as f64 * p[j]).min(1.0));
                }
            }
            adj
        })
        .collect()
}

/// Mid-ranks by counting smaller and equal values.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|w| *w < v).count() as f64;
            let equal = x.iter().filter(|w| *w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// One-sample Kolmogorov-Smirnov test against U(0, 1): (D, asymptotic p).
pub fn ks_uniform(sample: &[f64]) -> (f64, f64) {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i as f64 + 1.0) / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        p += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
    }
    (d, p.clamp(0.0, 1.0))
}
