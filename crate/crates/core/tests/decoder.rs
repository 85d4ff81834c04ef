mod common;

use common::{angle, gaussian_rows, rlda_weights};
use ndarray::Array2;
use proptest::prelude::*;
use speller_lab::analysis::roc_auc;
use speller_lab::decoder::{ledoit_wolf_lambda, train, ScoreBoard};
use speller_lab::seed::rng_from;

fn dataset(seed: u64, d: usize, n_t: usize, n_nt: usize) -> (Array2<f64>, Array2<f64>) {
    let mut rng = rng_from(seed);
    let scale: Vec<f64> = (0..d).map(|j| 0.5 + 0.2 * j as f64).collect();
    let shift_t: Vec<f64> = (0..d).map(|j| if j % 3 == 0 { 0.8 } else { 0.1 }).collect();
    let t = gaussian_rows(&mut rng, n_t, d, &shift_t, &scale);
    let nt = gaussian_rows(&mut rng, n_nt, d, &vec![0.0; d], &scale);
    (t, nt)
}

#[test]
fn weights_match_closed_form() {
    for (seed, lambda) in [(1, 0.0), (2, 0.3), (3, 1.0), (4, 0.05)] {
        let (t, nt) = dataset(seed, 10, 40, 200);
        let m = train(&t, &nt, Some(lambda)).unwrap();
        let (w, b) = rlda_weights(&t, &nt, lambda);
        for (x, y) in m.weights.iter().zip(&w) {
            assert!((x - y).abs() < 1e-8, "lambda {lambda}: {x} vs {y}");
        }
        assert!((m.bias - b).abs() < 1e-8);
    }
}

#[test]
fn full_shrinkage_follows_mean_difference() {
    let (t, nt) = dataset(5, 10, 30, 90);
    let m = train(&t, &nt, Some(1.0)).unwrap();
    let diff: Vec<f64> = (0..10).map(|j| m.class_means[0][j] - m.class_means[1][j]).collect();
    assert!(angle(&m.weights, &diff) < 1e-6);
    for (w, d) in m.weights.iter().zip(&diff) {
        assert!((w - d / m.nu).abs() < 1e-10);
    }
}

#[test]
fn trained_score_beats_every_single_feature() {
    let (t, nt) = dataset(6, 10, 200, 1000);
    let m = train(&t, &nt, None).unwrap();
    let rows: Vec<(Vec<f64>, bool)> = t
        .rows()
        .into_iter()
        .map(|r| (r.to_vec(), true))
        .chain(nt.rows().into_iter().map(|r| (r.to_vec(), false)))
        .collect();
    let labels: Vec<bool> = rows.iter().map(|r| r.1).collect();
    let scores: Vec<f64> = rows.iter().map(|r| m.score(&r.0).unwrap()).collect();
    let auc = roc_auc(&scores, &labels);
    for j in 0..10 {
        let single: Vec<f64> = rows.iter().map(|r| r.0[j]).collect();
        assert!(auc >= roc_auc(&single, &labels), "feature {j}");
    }
}

#[test]
fn ledoit_wolf_is_small_for_plentiful_data_and_large_for_scarce() {
    let (t, nt) = dataset(7, 10, 2000, 2000);
    let plenty = train(&t, &nt, None).unwrap().lambda;
    let (t, nt) = dataset(8, 10, 4, 4);
    let scarce = train(&t, &nt, None).unwrap().lambda;
    assert!(plenty < 0.05, "{plenty}");
    assert!(scarce > plenty);
    let x = nalgebra::DMatrix::from_fn(50, 6, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
    assert!((0.0..=1.0).contains(&ledoit_wolf_lambda(&x)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sign_convention_and_midpoint(seed in any::<u64>(), lambda in 0.01f64..=1.0) {
        let (t, nt) = dataset(seed, 6, 12, 30);
        let m = train(&t, &nt, Some(lambda)).unwrap();
        prop_assert!(m.weights.iter().all(|w| w.is_finite()));
        let st = m.score(&m.class_means[0]).unwrap();
        let snt = m.score(&m.class_means[1]).unwrap();
        prop_assert!(st > snt);
        let mid: Vec<f64> = (0..6).map(|j| (m.class_means[0][j] + m.class_means[1][j]) / 2.0).collect();
        prop_assert!(m.score(&mid).unwrap().abs() < 1e-9);
    }

    #[test]
    fn scaling_features_preserves_selection(seed in any::<u64>(), c in 0.01f64..100.0, lambda in 0.05f64..=1.0) {
        let (t, nt) = dataset(seed, 6, 20, 60);
        let m1 = train(&t, &nt, Some(lambda)).unwrap();
        let m2 = train(&(&t * c), &(&nt * c), Some(lambda)).unwrap();
        let mut rng = rng_from(seed ^ 1);
        let probe = gaussian_rows(&mut rng, 12, 6, &[0.0; 6], &[1.0; 6]);
        let mut b1 = ScoreBoard::new(36, 12);
        let mut b2 = ScoreBoard::new(36, 12);
        for (k, row) in probe.rows().into_iter().enumerate() {
            let flags: Vec<usize> = (0..6).map(|i| (k * 6 + i * 7) % 36).collect();
            let scaled: Vec<f64> = row.iter().map(|v| v * c).collect();
            b1.accumulate(m1.score(&row.to_vec()).unwrap(), &flags).unwrap();
            b2.accumulate(m2.score(&scaled).unwrap(), &flags).unwrap();
        }
        for (a, b) in b1.scores.iter().zip(&b2.scores) {
            prop_assert!((a - b).abs() < 1e-7 * (1.0 + a.abs()));
        }
        prop_assert_eq!(b1.select().unwrap(), b2.select().unwrap());
    }

    #[test]
    fn accumulation_commutes_within_a_sequence(seed in any::<u64>()) {
        let sched = speller_lab::generate_schedule(seed, &Default::default()).unwrap();
        let mut rng = rng_from(seed);
        let scores: Vec<f64> = (0..12).map(|_| rand::Rng::random_range(&mut rng, -2.0..2.0)).collect();
        let mut fwd = ScoreBoard::new(36, 12);
        let mut rev = ScoreBoard::new(36, 12);
        for k in 0..12 {
            fwd.accumulate(scores[k], &sched.flashes[k]).unwrap();
            rev.accumulate(scores[11 - k], &sched.flashes[11 - k]).unwrap();
        }
        prop_assert!(fwd.contributions.iter().all(|&c| c == 2));
        for (a, b) in fwd.scores.iter().zip(&rev.scores) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
