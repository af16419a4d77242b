use proptest::prelude::*;
use rand::Rng;

use super::oracle;
use super::*;
use crate::conditions::{Cell, Condition, Noise};
use crate::decoder::TrackingScore;
use crate::testutil::{gaussian, rng};

#[test]
fn oracle_matches_textbook_critical_values() {
    assert!((oracle::ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
    assert!((oracle::ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    assert!((oracle::t_two_sided(2.228_138_851_986_274, 10.0) - 0.05).abs() < 1e-10);
    let t17 = 2.109_815_577_833_318_f64;
    assert!((oracle::f_upper(t17 * t17, 1.0, 17.0) - 0.05).abs() < 1e-10);
}

#[test]
fn holm_examples() {
    let adj = holm_bonferroni(&[0.01, 0.04, 0.03]).unwrap();
    for (a, b) in adj.iter().zip([0.03, 0.06, 0.06]) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(holm_bonferroni(&[0.2]).unwrap(), vec![0.2]);
    assert_eq!(holm_bonferroni(&[1.0; 4]).unwrap(), vec![1.0; 4]);
    assert!(holm_bonferroni(&[0.5, 1.2]).is_err());
    assert!(holm_bonferroni(&[f64::NAN]).is_err());
}

#[test]
fn holm_matches_brute_force() {
    let mut r = rng(1);
    for i in 0..1000 {
        let m = 1 + i % 12;
        let mut p: Vec<f64> = (0..m).map(|_| r.random::<f64>()).collect();
        if i % 5 == 0 && m > 1 {
            p[m - 1] = p[0];
        }
        assert_eq!(holm_bonferroni(&p).unwrap(), oracle::holm_brute(&p));
    }
}

proptest! {
    #[test]
    fn holm_is_permutation_equivariant(p in prop::collection::vec(0.0f64..=1.0, 1..10), seed in 0u64..1000) {
        let adj = holm_bonferroni(&p).unwrap();
        for (a, raw) in adj.iter().zip(&p) {
            prop_assert!(a >= raw);
        }
        let mut idx: Vec<usize> = (0..p.len()).collect();
        use rand::seq::SliceRandom;
        idx.shuffle(&mut rng(seed));
        let permuted: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
        let adj_p = holm_bonferroni(&permuted).unwrap();
        for (k, &i) in idx.iter().enumerate() {
            prop_assert_eq!(adj_p[k], adj[i]);
        }
    }
}

fn fixture_pair(seed: u64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let x = gaussian(&mut r, n, 1.0);
    let noise = gaussian(&mut r, n, 0.8);
    let y = x.iter().zip(&noise).map(|(a, e)| 0.7 * a + e - 0.4).collect();
    (x, y)
}

#[test]
fn paired_t_matches_oracle() {
    for seed in 0..5 {
        let (x, y) = fixture_pair(seed, 18);
        let got = paired_t(&x, &y).unwrap();
        let want = oracle::paired_t(&x, &y);
        assert!((got.statistic - want.t).abs() < 1e-6 * want.t.abs().max(1.0));
        assert!((got.p_raw - want.p).abs() < 1e-6, "{} vs {}", got.p_raw, want.p);
        assert!((got.effect_size - want.d).abs() < 1e-9);
        assert_eq!(got.df, 17.0);
    }
}

#[test]
fn paired_t_symmetry_and_scale() {
    let (x, y) = fixture_pair(9, 18);
    let a = paired_t(&x, &y).unwrap();
    let b = paired_t(&y, &x).unwrap();
    assert_eq!(a.statistic, -b.statistic);
    assert_eq!(a.effect_size, -b.effect_size);
    assert_eq!(a.p_raw, b.p_raw);
    let xs: Vec<f64> = x.iter().map(|v| v * 7.5).collect();
    let ys: Vec<f64> = y.iter().map(|v| v * 7.5).collect();
    let c = paired_t(&xs, &ys).unwrap();
    assert!((c.p_raw - a.p_raw).abs() < 1e-12);
}

#[test]
fn paired_t_errors() {
    let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
    let y: Vec<f64> = x.iter().map(|v| v - 0.3).collect();
    assert!(matches!(paired_t(&x, &y), Err(Error::ZeroVariance(_))));
    assert!(paired_t(&x[..2], &y[..2]).is_err());
    assert!(paired_t(&x, &y[..5]).is_err());
}

fn anova_fixture(seed: u64, n: usize, effect: f64) -> Vec<[[f64; 4]; 2]> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let subj = gaussian(&mut r, 1, 1.0)[0];
            let slopes = gaussian(&mut r, 4, 0.4);
            let mut cells = [[0.0; 4]; 2];
            for (a, row) in cells.iter_mut().enumerate() {
                for (b, v) in row.iter_mut().enumerate() {
                    let e: f64 = gaussian(&mut r, 1, 0.5)[0];
                    *v = subj + effect * (b as f64 - 1.5) * if a == 0 { 1.0 } else { 0.5 } + slopes[b] * 0.5 * b as f64 + e;
                }
            }
            cells
        })
        .collect()
}

#[test]
fn anova_matches_sums_of_squares_oracle() {
    for (seed, effect) in [(1, 0.0), (2, 0.3), (3, 1.0)] {
        let data = anova_fixture(seed, 18, effect);
        let got = rm_anova_2x4(&data).unwrap();
        let want = oracle::rm_anova_2x4(&data);
        for (g, w) in [&got.factor_a, &got.factor_b, &got.interaction].iter().zip(&want) {
            assert!((g.f - w.f).abs() < 1e-6 * w.f.max(1.0), "{} {} vs {}", g.label, g.f, w.f);
            assert!((g.epsilon - w.epsilon).abs() < 1e-6, "{} eps {} vs {}", g.label, g.epsilon, w.epsilon);
            assert!((g.p - w.p).abs() < 1e-6, "{} p {} vs {}", g.label, g.p, w.p);
            assert!((g.partial_eta_squared - w.partial_eta2).abs() < 1e-9);
            assert!((g.df_num_corrected - g.epsilon * g.df_num).abs() < 1e-12);
            assert!(g.epsilon > 0.0 && g.epsilon <= 1.0);
        }
        assert_eq!(got.factor_a.epsilon, 1.0);
        assert_eq!((got.factor_b.df_num, got.factor_b.df_den), (3.0, 51.0));
    }
}

#[test]
fn anova_ignores_subject_offsets() {
    let data = anova_fixture(4, 18, 0.5);
    let base = rm_anova_2x4(&data).unwrap();
    let mut shifted = data.clone();
    for (s, subj) in shifted.iter_mut().enumerate() {
        for v in subj.iter_mut().flatten() {
            *v += 10.0 * s as f64 - 3.0;
        }
    }
    let other = rm_anova_2x4(&shifted).unwrap();
    for (a, b) in [
        (&base.factor_a, &other.factor_a),
        (&base.factor_b, &other.factor_b),
        (&base.interaction, &other.interaction),
    ] {
        assert!((a.f - b.f).abs() < 1e-8 * a.f.max(1.0));
        assert!((0.0..=1.0).contains(&a.partial_eta_squared));
    }
}

#[test]
fn anova_errors() {
    let mut data = anova_fixture(5, 4, 0.0);
    assert!(rm_anova_2x4(&data[..2]).is_err());
    data[1][0][2] = f64::NAN;
    assert!(rm_anova_2x4(&data).is_err());
}

#[test]
fn null_p_values_are_uniform() {
    let mut pa = Vec::new();
    let mut pb = Vec::new();
    let mut pab = Vec::new();
    let mut pt = Vec::new();
    for seed in 0..100 {
        let mut r = rng(1000 + seed);
        let data: Vec<[[f64; 4]; 2]> = (0..18)
            .map(|_| {
                let subj = gaussian(&mut r, 1, 2.0)[0];
                let e = gaussian(&mut r, 8, 1.0);
                [[0, 1, 2, 3].map(|b| subj + e[b]), [0, 1, 2, 3].map(|b| subj + e[4 + b])]
            })
            .collect();
        let res = rm_anova_2x4(&data).unwrap();
        pa.push(res.factor_a.p);
        pb.push(res.factor_b.p);
        pab.push(res.interaction.p);
        let x: Vec<f64> = data.iter().map(|d| d[0][0]).collect();
        let y: Vec<f64> = data.iter().map(|d| d[0][1]).collect();
        pt.push(paired_t(&x, &y).unwrap().p_raw);
    }
    for p in [pa, pb, pab, pt] {
        let (d, ks_p) = oracle::ks_uniform(&p);
        assert!(ks_p > 0.01, "KS D = {d}, p = {ks_p}");
    }
}

#[test]
fn spearman_basics() {
    let x: Vec<f64> = (0..8).map(|i| i as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
    let s = spearman(&x, &y).unwrap();
    assert_eq!(s.rho, 1.0);
    assert!(!s.p_reliable);
    let rev: Vec<f64> = x.iter().rev().copied().collect();
    assert_eq!(spearman(&x, &rev).unwrap().rho, -1.0);
    assert!(spearman(&x, &[1.0; 8]).is_err());
    assert!(spearman(&x[..2], &y[..2]).is_err());
    let long: Vec<f64> = (0..12).map(|i| (i as f64 * 1.7).sin()).collect();
    let long2: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).cos()).collect();
    assert!(spearman(&long, &long2).unwrap().p_reliable);
}

#[test]
fn spearman_with_ties_matches_oracle() {
    let x = [1.0, 2.0, 2.0, 3.0, 5.0, 5.0, 5.0, 4.0, 0.5, 2.0];
    let y = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0];
    let got = spearman(&x, &y).unwrap();
    let want = oracle::pearson(&oracle::ranks(&x), &oracle::ranks(&y));
    assert!((got.rho - want).abs() < 1e-12);
    assert_eq!(mid_ranks(&x), oracle::ranks(&x));
    let df = 8.0;
    let t = want * (df / (1.0 - want * want)).sqrt();
    assert!((got.p - oracle::t_two_sided(t, df)).abs() < 1e-6);
}

proptest! {
    #[test]
    fn spearman_rank_invariant(v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..30)) {
        let x: Vec<f64> = v.iter().map(|p| p.0).collect();
        let y: Vec<f64> = v.iter().map(|p| p.1).collect();
        if let Ok(a) = spearman(&x, &y) {
            let xt: Vec<f64> = x.iter().map(|t| t.powi(3) + 2.0 * t).collect();
            let yt: Vec<f64> = y.iter().map(|t| (t / 3.0).exp()).collect();
            let b = spearman(&xt, &yt).unwrap();
            prop_assert!((a.rho - b.rho).abs() < 1e-12);
        }
    }
}

fn score(subject: &str, cell: Cell, r_z: f64) -> TrackingScore {
    TrackingScore {
        trial_id: String::new(),
        subject_id: subject.into(),
        speaker_id: String::new(),
        cell,
        lag_or_window: "200-325ms".into(),
        lambda: 1.0,
        r: r_z.tanh(),
        r_z,
    }
}

#[test]
fn cell_means_and_planned_tests() {
    let mut scores = Vec::new();
    let mut r = rng(3);
    for s in 0..6 {
        for cell in Cell::all() {
            for _ in 0..2 {
                let bump = if cell == Cell::new(Condition::AV, Noise::Noise) { 0.3 } else { 0.0 };
                scores.push(score(&format!("s{s}"), cell, 0.1 + bump + gaussian(&mut r, 1, 0.05)[0]));
            }
        }
    }
    let means = cell_means_by_subject(&scores);
    assert_eq!(means.len(), 6);
    assert!(means.iter().all(|m| m.complete().is_some()));
    let s0: Vec<f64> = scores
        .iter()
        .filter(|s| s.subject_id == "s0" && s.cell == Cell::new(Condition::V, Noise::Quiet))
        .map(|s| s.r_z)
        .collect();
    assert_eq!(means[0].get(Cell::new(Condition::V, Noise::Quiet)), Some((s0[0] + s0[1]) / 2.0));

    let tests = planned_comparisons(&means).unwrap();
    assert_eq!(tests.len(), 7);
    assert_eq!(tests[0].label, "AV-noise vs A-noise");
    assert!(tests[0].statistic > 0.0 && tests[0].p_adjusted < 0.05);
    assert!(tests.iter().all(|t| t.p_adjusted >= t.p_raw));

    let partial: Vec<TrackingScore> = scores.into_iter().filter(|s| s.cell.condition != Condition::ML).collect();
    let m = cell_means_by_subject(&partial);
    assert!(m[0].complete().is_none());
    assert!(planned_comparisons(&m).is_err());
}
