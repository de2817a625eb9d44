use std::sync::Arc;

use kbm_igs::bench::{run_experiment, to_csv, BenchConfig, ExperimentReport};
use kbm_igs::synth::{gen_random_tree, sample_objects};
use kbm_igs::{Algorithm, NoisyOracleConfig};

#[test]
fn exact_dp_is_no_worse_than_topk_on_average() {
    let h = Arc::new(gen_random_tree(1500, 5, 77).unwrap());
    let objects = sample_objects(&h, 200, 1..=3, 78).unwrap();
    let cfg = BenchConfig {
        algorithms: vec![Algorithm::KbmDp, Algorithm::KbmTopk],
        budgets: vec![5, 10, 20],
        ks: vec![3],
        noise: None,
        timing: false,
    };
    let report = ExperimentReport::from_rows(&run_experiment(&h, &objects, &cfg).unwrap());
    let mut last = [f64::INFINITY; 2];
    for b in [5, 10, 20] {
        let dp = report.find(Algorithm::KbmDp, b, 3).unwrap().mean_penalty;
        let topk = report.find(Algorithm::KbmTopk, b, 3).unwrap().mean_penalty;
        assert!(dp <= topk, "b={b}: dp {dp} topk {topk}");
        assert!(dp <= last[0] && topk <= last[1], "means rise with b");
        last = [dp, topk];
    }
}

#[test]
fn sweeps_are_byte_identical_per_seed() {
    let h = Arc::new(gen_random_tree(400, 4, 5).unwrap());
    let objects = sample_objects(&h, 40, 1..=3, 6).unwrap();
    let cfg = |seed| BenchConfig {
        algorithms: Algorithm::ALL.to_vec(),
        budgets: vec![3, 8],
        ks: vec![1, 2],
        noise: Some(NoisyOracleConfig::new(0.5, 0.3, seed).unwrap()),
        timing: false,
    };
    let a = to_csv(&run_experiment(&h, &objects, &cfg(1)).unwrap());
    let b = to_csv(&run_experiment(&h, &objects, &cfg(1)).unwrap());
    let c = to_csv(&run_experiment(&h, &objects, &cfg(2)).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c, "a different noise seed changes some answers");
}

#[test]
fn budget_checkpoints_equal_separate_runs() {
    let h = Arc::new(gen_random_tree(300, 4, 8).unwrap());
    let objects = sample_objects(&h, 20, 1..=3, 9).unwrap();
    let base = BenchConfig {
        algorithms: vec![Algorithm::KbmDpPlus, Algorithm::Stbis],
        budgets: vec![2, 6],
        ks: vec![2],
        noise: None,
        timing: false,
    };
    let joint = run_experiment(&h, &objects, &base).unwrap();
    for b in [2, 6] {
        let alone = run_experiment(&h, &objects, &BenchConfig { budgets: vec![b], ..base.clone() }).unwrap();
        let from_joint: Vec<_> = joint.iter().filter(|r| r.b == b).cloned().collect();
        assert_eq!(alone, from_joint);
    }
}

#[test]
fn oversized_k_is_rejected() {
    let h = Arc::new(gen_random_tree(50, 3, 1).unwrap());
    let objects = sample_objects(&h, 3, 1..=1, 2).unwrap();
    let cfg = BenchConfig {
        algorithms: vec![Algorithm::KbmDp],
        budgets: vec![2],
        ks: vec![80],
        noise: None,
        timing: false,
    };
    assert!(matches!(run_experiment(&h, &objects, &cfg), Err(kbm_igs::Error::Config(_))));
}
