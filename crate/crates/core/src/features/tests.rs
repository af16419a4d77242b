use super::*;
use crate::testutil::{gaussian, rng};

fn tone(freq: f64, amp: f64, rate: f64, secs: f64) -> Vec<f64> {
    (0..(rate * secs) as usize)
        .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate).sin())
        .collect()
}

fn sawtooth(freq: f64, rate: f64, secs: f64) -> Vec<f64> {
    (0..(rate * secs) as usize)
        .map(|i| {
            let ph = (freq * i as f64 / rate).fract();
            0.5 * (2.0 * ph - 1.0)
        })
        .collect()
}

/// Pink (1/f power) noise by spectral shaping.
fn pink(n: usize, seed: u64) -> Vec<f64> {
    use rustfft::num_complex::Complex64;
    let mut r = rng(seed);
    let mut buf: Vec<Complex64> = gaussian(&mut r, n, 1.0).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let mut planner = rustfft::FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64;
        *c *= if f > 0.0 { 1.0 / f.sqrt() } else { 0.0 } / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re * 100.0).collect()
}

#[test]
fn taper_count_and_parseval() {
    let mut r = rng(1);
    let x = Signal::new(gaussian(&mut r, 30 * 2000, 1.0), 2000.0).unwrap();
    let psd = multitaper_psd(&x, 0.5, [0.0, 1000.0]).unwrap();
    assert_eq!(psd.n_tapers, 29);
    assert!(psd.power.iter().all(|p| *p >= 0.0));
    assert!(psd.freqs_hz.windows(2).all(|w| w[1] > w[0]));
    let df = psd.freqs_hz[1] - psd.freqs_hz[0];
    let total: f64 = psd.power.iter().sum::<f64>() * df;
    let var = crate::sigcore::variance(&x.samples);
    assert!((total / var - 1.0).abs() < 0.1, "{total} vs {var}");
    assert_eq!(psd, multitaper_psd(&x, 0.5, [0.0, 1000.0]).unwrap());
}

#[test]
fn tone_peak_and_range() {
    let x = Signal::new(tone(100.0, 1.0, 1000.0, 10.0), 1000.0).unwrap();
    let psd = multitaper_psd(&x, 0.5, DEFAULT_RANGE_HZ).unwrap();
    assert_eq!(psd.n_tapers, 9);
    assert!(psd.freqs_hz[0] >= 0.3);
    assert!(*psd.freqs_hz.last().unwrap() <= 500.0);
    let (i, _) = psd.power.iter().enumerate().fold((0, 0.0), |b, (i, &p)| if p > b.1 { (i, p) } else { b });
    assert!((psd.freqs_hz[i] - 100.0).abs() <= 0.5);
    let short = Signal::new(vec![0.0; 1500], 1000.0).unwrap();
    assert!(matches!(multitaper_psd(&short, 0.5, DEFAULT_RANGE_HZ), Err(Error::TooShort { .. })));
}

#[test]
fn fractal_fit_on_noise() {
    let rate = 1000.0;
    let n = 30 * 1000;
    let p = Signal::new(pink(n, 2), rate).unwrap();
    let fit = periodic_fraction(&multitaper_psd(&p, 0.5, [0.3, 450.0]).unwrap()).unwrap();
    assert!((fit.alpha - 1.0).abs() < 0.15, "alpha {}", fit.alpha);
    let mut ratio = fit.ratio.power.clone();
    ratio.sort_by(f64::total_cmp);
    let med = ratio[ratio.len() / 2];
    assert!((0.8..=1.25).contains(&med), "{med}");

    let mut r = rng(3);
    let w = Signal::new(gaussian(&mut r, n, 1.0), rate).unwrap();
    let fit = periodic_fraction(&multitaper_psd(&w, 0.5, [0.3, 450.0]).unwrap()).unwrap();
    assert!(fit.alpha.abs() < 0.2, "alpha {}", fit.alpha);
}

#[test]
fn fractal_fit_isolates_a_tone() {
    let rate = 1000.0;
    let n = 30 * 1000;
    let noise = pink(n, 4);
    let sd = crate::sigcore::variance(&noise).sqrt();
    let x: Vec<f64> = noise.iter().zip(tone(10.0, sd, rate, 30.0)).map(|(a, b)| a + b).collect();
    let fit = periodic_fraction(&multitaper_psd(&Signal::new(x, rate).unwrap(), 0.5, [0.3, 450.0]).unwrap()).unwrap();
    let at = |f: f64| {
        let i = fit.ratio.freqs_hz.iter().position(|&v| v >= f).unwrap();
        fit.ratio.power[i]
    };
    assert!(at(10.0) > 2.0, "{}", at(10.0));
    let mut off: Vec<f64> = fit
        .ratio
        .freqs_hz
        .iter()
        .zip(&fit.ratio.power)
        .filter(|(f, _)| (**f - 10.0).abs() > 2.0)
        .map(|(_, p)| *p)
        .collect();
    off.sort_by(f64::total_cmp);
    assert!((0.8..=1.25).contains(&off[off.len() / 2]));
}

#[test]
fn fractal_fit_rejects_zero_power() {
    let psd = PowerSpectrum {
        freqs_hz: vec![1.0, 2.0, 3.0, 4.0],
        power: vec![1.0, 0.0, 1.0, 1.0],
        n_tapers: 1,
        smoothing_hz: 0.5,
    };
    assert!(periodic_fraction(&psd).is_err());
}

fn ratio_with_peaks(peaks: &[f64]) -> PowerSpectrum {
    let freqs: Vec<f64> = (9..=135_000).map(|k| k as f64 / 30.0).collect();
    let power = freqs
        .iter()
        .map(|f| if peaks.iter().any(|p| (f - p).abs() < 0.2) { 3.0 } else { 1.0 })
        .collect();
    PowerSpectrum { freqs_hz: freqs, power, n_tapers: 29, smoothing_hz: 0.5 }
}

#[test]
fn band_sums() {
    let flat = band_periodic_power(&ratio_with_peaks(&[]), 30.0).unwrap();
    assert_eq!(flat, BandPower { freq_rsum_env: 0.0, freq_rsum_low: 0.0, freq_rsum_mid: 0.0, freq_rsum_high: 0.0 });
    let one = band_periodic_power(&ratio_with_peaks(&[10.0]), 30.0).unwrap();
    assert!(one.freq_rsum_env > 0.0);
    assert_eq!((one.freq_rsum_low, one.freq_rsum_mid, one.freq_rsum_high), (0.0, 0.0, 0.0));
    let peak_bins = ratio_with_peaks(&[10.0]).power.iter().filter(|&&p| p > 1.0).count();
    assert!((one.freq_rsum_env - 2.0 * peak_bins as f64 / 30.0).abs() < 1e-12);
    let two = band_periodic_power(&ratio_with_peaks(&[10.0, 2000.0]), 30.0).unwrap();
    assert!(two.freq_rsum_env > 0.0 && two.freq_rsum_high > 0.0);
    assert_eq!((two.freq_rsum_low, two.freq_rsum_mid), (0.0, 0.0));
}

#[test]
fn sawtooth_pitch() {
    let x = Signal::new(sawtooth(200.0, 16000.0, 2.0), 16000.0).unwrap();
    let track = pitch_track(&x, &PitchConfig::default()).unwrap();
    let s = pitch_stats(&track).unwrap();
    assert!((s.mean - 200.0).abs() <= 1.0, "{}", s.mean);
    assert!(s.sd < 2.0);
    assert!(s.min <= s.median && s.median <= s.max);
    assert!(track.n_voiced() > 190);
    assert!(mean_nhr(&track).unwrap() < 0.01);
}

#[test]
fn noise_and_silence_are_unvoiced() {
    let mut r = rng(5);
    let noise = Signal::new(gaussian(&mut r, 32000, 0.1), 16000.0).unwrap();
    let t = pitch_track(&noise, &PitchConfig::default()).unwrap();
    assert!(matches!(pitch_stats(&t), Err(Error::Unvoiced)));
    let silence = Signal::new(vec![0.0; 16000], 16000.0).unwrap();
    let t = pitch_track(&silence, &PitchConfig::default()).unwrap();
    assert!(matches!(pitch_stats(&t), Err(Error::Unvoiced)));
    assert!(matches!(mean_nhr(&t), Err(Error::Unvoiced)));
    let short = Signal::new(vec![0.0; 1000], 16000.0).unwrap();
    assert!(pitch_track(&short, &PitchConfig::default()).is_err());
}

#[test]
fn noisy_tone_nhr_near_one() {
    let rate = 16000.0;
    let mut r = rng(6);
    let clean = tone(150.0, 2f64.sqrt(), rate, 2.0);
    let noise = gaussian(&mut r, clean.len(), 1.0);
    let x: Vec<f64> = clean.iter().zip(&noise).map(|(a, b)| a + b).collect();
    let track = pitch_track(&Signal::new(x, rate).unwrap(), &PitchConfig::default()).unwrap();
    let nhr = mean_nhr(&track).unwrap();
    assert!((0.5..=2.0).contains(&nhr), "{nhr}");
}

#[test]
fn min_intensity_finds_silence() {
    let rate = 16000.0;
    let mut x = tone(200.0, 0.1, rate, 1.0);
    x.extend(vec![0.0; 8000]);
    let contour = intensity_contour(&Signal::new(x.clone(), rate).unwrap()).unwrap();
    assert_eq!(min_intensity(&Signal::new(x, rate).unwrap()).unwrap(), INTENSITY_FLOOR_DB);
    // a 0.1 amplitude sine: mean square 0.005 → 10·log10(0.005 / 4e-10) ≈ 70.97 dB
    assert!((contour[10] - 70.969).abs() < 0.1, "{}", contour[10]);
}

#[test]
fn jitter_fixtures() {
    let j = jitter_metrics(&[0.010, 0.011, 0.010, 0.011]).unwrap();
    assert!((j.loc - 1.0 / 10.5).abs() < 1e-9);
    assert!((j.loc_abs - 0.001).abs() < 1e-9);
    // rap: |11 − 31/3| = 2/3 ms and |10 − 32/3| = 2/3 ms, over mean 10.5 ms
    assert!((j.rap - (2.0 / 3.0) / 10.5).abs() < 1e-9);
    assert_eq!(j.ppq5, None);
    let c = jitter_metrics(&[0.005; 8]).unwrap();
    assert_eq!((c.loc, c.loc_abs, c.rap, c.ppq5), (0.0, 0.0, 0.0, Some(0.0)));
    assert!(jitter_metrics(&[0.01, 0.011]).is_err());
    assert!(jitter_metrics(&[0.01, -0.011, 0.01]).is_err());
}

#[test]
fn shimmer_fixtures() {
    let s = shimmer_metrics(&[1.0, 0.8, 1.0, 0.8]).unwrap();
    assert!((s.loc - 0.2 / 0.9).abs() < 1e-9);
    assert!((s.loc_db - 20.0 * 1.25f64.log10()).abs() < 1e-9);
    assert!((s.loc_db - 1.9382).abs() < 1e-4);
    assert_eq!((s.apq5, s.apq11), (None, None));
    let c = shimmer_metrics(&[0.3; 12]).unwrap();
    for v in [c.loc, c.loc_db, c.apq3, c.apq5.unwrap(), c.apq11.unwrap()] {
        assert!(v.abs() < 1e-12);
    }
    assert!(shimmer_metrics(&[1.0, 0.0, 1.0]).is_err());
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn ratio_metrics_scale_free(v in prop::collection::vec(0.5f64..2.0, 12..30), a in 0.01f64..100.0) {
            let scaled: Vec<f64> = v.iter().map(|x| x * a).collect();
            let (j1, j2) = (jitter_metrics(&v).unwrap(), jitter_metrics(&scaled).unwrap());
            prop_assert!((j1.loc - j2.loc).abs() < 1e-9);
            prop_assert!((j1.rap - j2.rap).abs() < 1e-9);
            prop_assert!((j1.ppq5.unwrap() - j2.ppq5.unwrap()).abs() < 1e-9);
            let (s1, s2) = (shimmer_metrics(&v).unwrap(), shimmer_metrics(&scaled).unwrap());
            prop_assert!((s1.loc - s2.loc).abs() < 1e-9);
            prop_assert!((s1.loc_db - s2.loc_db).abs() < 1e-9);
            prop_assert!((s1.apq3 - s2.apq3).abs() < 1e-9);
            prop_assert!((s1.apq11.unwrap() - s2.apq11.unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn pulses_of_a_perturbed_pulse_train() {
    // raised-cosine cycles of random even length near 5 ms and random height;
    // each cycle peaks exactly on its middle sample
    use rand::Rng;
    let rate = 48000.0;
    let mut r = rng(8);
    let mut peaks = Vec::new();
    let mut heights = Vec::new();
    let mut x = Vec::new();
    while x.len() < 96000 {
        let n: usize = 240 + 2 * r.random_range(0..=4) - 4;
        let h: f64 = 1.0 + r.random_range(-0.1..0.1);
        peaks.push((x.len() + n / 2) as f64 / rate);
        heights.push(h);
        x.extend((0..n).map(|i| h * (0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())));
    }
    let periods: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    let mean_abs_diff = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (v.len() - 1) as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let jitter = mean_abs_diff(&periods) / mean(&periods);
    let shimmer = mean_abs_diff(&heights) / mean(&heights);

    let audio = Signal::new(x, rate).unwrap();
    let m = voice_metrics(&audio, &PitchConfig::default()).unwrap();
    assert!((m.jitter_loc / jitter - 1.0).abs() < 0.1, "{} vs {jitter}", m.jitter_loc);
    assert!((m.shimmer_loc / shimmer - 1.0).abs() < 0.1, "{} vs {shimmer}", m.shimmer_loc);
    assert!((m.mean_pitch - 1.0 / mean(&periods)).abs() < 2.0, "{}", m.mean_pitch);
    assert!(m.min_pitch >= 75.0 && m.max_pitch <= 600.0);
}

fn frame(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> GrayFrame {
    GrayFrame::new(w, h, (0..w * h).map(|i| f(i % w, i / w)).collect()).unwrap()
}

#[test]
fn lip_fixtures() {
    let roi = Roi { x: 2, y: 3, width: 20, height: 10 };
    let black = lip_features(&[frame(30, 20, |_, _| 0.0)], &roi).unwrap();
    assert_eq!((black.avg_lip_bright, black.avg_lip_open), (0.0, 1.0));
    let white = lip_features(&[frame(30, 20, |_, _| 1.0)], &roi).unwrap();
    assert_eq!((white.avg_lip_bright, white.avg_lip_open), (1.0, 0.0));
    for h in [1, 3, 4] {
        let top = roi.y + (roi.height - h) / 2;
        let band = frame(30, 20, |_, y| if (top..top + h).contains(&y) { 0.0 } else { 1.0 });
        let f = lip_features(&[band], &roi).unwrap();
        assert!((f.avg_lip_open - h as f64 / 10.0).abs() <= 0.1 + 1e-12);
    }
    assert!(lip_features(&[], &roi).is_err());
    assert!(lip_features(&[frame(10, 10, |_, _| 0.0)], &roi).is_err());
    assert!(lip_features(&[frame(30, 20, |_, _| 0.0), frame(20, 20, |_, _| 0.0)], &roi).is_err());
    assert!(lip_features(&[frame(30, 20, |_, _| 0.0)], &Roi { x: 0, y: 0, width: 0, height: 3 }).is_err());
}

fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("f{i}")).collect()
}

#[test]
fn profiles_prune_duplicates_and_normalize() {
    let mut r = rng(7);
    let mut rows = Vec::new();
    for s in 0..6 {
        for _ in 0..3 {
            let v = gaussian(&mut r, 3, 1.0);
            rows.push(SegmentRow { speaker_id: format!("spk{s}"), values: vec![v[0], v[1], v[0] * 2.0 + 1.0, 5.0] });
        }
    }
    let set = build_profiles(&names(4), &rows).unwrap();
    assert_eq!(set.feature_names, vec!["f0", "f1"]);
    assert_eq!(set.dropped.len(), 2);
    assert_eq!(set.profiles.len(), 6);
    for j in 0..2 {
        let col: Vec<f64> = set.profiles.iter().map(|p| p.values[j]).collect();
        assert!(col.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(col.contains(&0.0) && col.contains(&1.0));
    }
    // normalizing normalized profiles changes nothing
    let again: Vec<SegmentRow> = set
        .profiles
        .iter()
        .map(|p| SegmentRow { speaker_id: p.speaker_id.clone(), values: p.values.clone() })
        .collect();
    let set2 = build_profiles(&set.feature_names, &again).unwrap();
    assert_eq!(set2.profiles, set.profiles);
    assert_eq!(build_profiles(&names(4), &rows).unwrap(), set);
}

#[test]
fn profile_errors() {
    let rows = vec![SegmentRow { speaker_id: "a".into(), values: vec![1.0] }];
    assert!(build_profiles(&names(1), &rows).is_err());
    let rows = vec![
        SegmentRow { speaker_id: "a".into(), values: vec![1.0] },
        SegmentRow { speaker_id: "b".into(), values: vec![1.0, 2.0] },
    ];
    assert!(build_profiles(&names(1), &rows).is_err());
}

#[test]
fn audio_feature_vector() {
    let rate = 44100.0;
    let mut r = rng(9);
    let mut x = sawtooth(140.0, rate, 4.0);
    for (v, n) in x.iter_mut().zip(gaussian(&mut r, 176400, 0.02)) {
        *v += n;
    }
    let feats = audio_features(&Signal::new(x, rate).unwrap(), &PitchConfig::default()).unwrap();
    let lips = LipFeatures { avg_lip_open: 0.2, avg_lip_bright: 0.4 };
    let v = feature_vector(&feats, &lips);
    assert_eq!(v.len(), FEATURE_NAMES.len());
    assert!(v.iter().all(|x| x.is_finite()));
    assert!((feats.voice.mean_pitch - 140.0).abs() < 1.0);
    // harmonics of 140 Hz sit in the mid and high bands
    assert!(feats.band.freq_rsum_mid > 0.0 && feats.band.freq_rsum_high > 0.0);
    assert_eq!(v[20..], [0.2, 0.4]);
}
