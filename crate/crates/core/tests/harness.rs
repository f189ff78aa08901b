mod common;

use common::dense_predict;
use esp_core::gp::{fit_posterior, History, Hyperparams};
use esp_core::harness::{recommend, run_bo, summarize, ExperimentConfig, Method, ObjectiveSpec};
use esp_core::optimize::InnerOptConfig;
use esp_core::rng::stream;
use esp_core::space::Bounds;
use esp_core::testbed::Objective;

fn grid_argmin(h: &History, hp: &Hyperparams, n: usize) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let x = i as f64 / (n - 1) as f64;
        let m = dense_predict(h, hp, &[x]).0;
        if m < best.0 {
            best = (m, x);
        }
    }
    best.1
}

#[test]
fn recommendation_matches_grid_argmin_of_posterior_mean() {
    let xs = [0.05, 0.3, 0.45, 0.7, 0.9];
    let ys = [0.8, -0.1, -0.4, 0.2, 0.6];
    let h = History::from_parts(xs.iter().map(|x| vec![*x]).collect(), ys.to_vec()).unwrap();
    let hp = Hyperparams::new(vec![0.2], 0.5, 1e-3, 0.1).unwrap();
    let post = fit_posterior(&h, &hp).unwrap();
    let rec = recommend(&[post], &Bounds::unit(1), &InnerOptConfig::default(), &mut stream(0, 0));
    let oracle = grid_argmin(&h, &hp, 100_000);
    assert!((rec[0] - oracle).abs() < 1e-3, "{rec:?} vs {oracle}");
}

#[test]
fn single_observation_recommendation_is_the_mean_minimizer() {
    // a positive mean offset makes the observed point the unique dip
    let h = History::from_parts(vec![vec![0.37]], vec![-1.0]).unwrap();
    let hp = Hyperparams::new(vec![0.1], 1.0, 1e-8, 0.0).unwrap();
    let post = fit_posterior(&h, &hp).unwrap();
    let rec = recommend(&[post], &Bounds::unit(1), &InnerOptConfig::default(), &mut stream(1, 0));
    let oracle = grid_argmin(&h, &hp, 100_001);
    assert!((rec[0] - oracle).abs() < 1e-4 && (rec[0] - 0.37).abs() < 1e-4, "{rec:?}");
}

#[test]
fn summary_statistics_follow_hand_arithmetic() {
    let rows = summarize(&[vec![1.0], vec![3.0]]).unwrap();
    assert_eq!((rows[0].mean, rows[0].se), (2.0, 1.0));
    let same = summarize(&vec![vec![0.5, 0.25]; 4]).unwrap();
    assert!(same.iter().all(|r| r.se == 0.0));
}

#[test]
fn hedge_run_is_reproducible_and_bookkeeps_experts() {
    let mut cfg = ExperimentConfig::new(ObjectiveSpec::Hartmann3, Method::Hedge);
    cfg.horizon = 6;
    cfg.n_random_experts = 2;
    cfg.esp.inner.sweep_per_dim = 100;
    cfg.thompson_features = 200;
    let obj = Objective::hartmann3();
    let a = run_bo(&cfg, &obj, 11);
    let b = run_bo(&cfg, &obj, 11);
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.is_complete());
    assert!(a.rows[2..].iter().all(|r| r.expert.is_some_and(|e| e < 5)));
    assert!(a.rows.iter().all(|r| r.abs_error.unwrap() >= 0.0));
    let c = run_bo(&cfg, &obj, 12);
    assert_ne!(a.rows[0].x, c.rows[0].x);
}
