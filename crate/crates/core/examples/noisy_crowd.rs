//! Answers from an unreliable crowd: a share of query objects is "difficult"
//! and each of their answers is flipped with some probability.

use std::sync::Arc;

use kbm_igs::bench::{run_experiment, BenchConfig, ExperimentReport};
use kbm_igs::synth::{gen_random_tree, sample_objects};
use kbm_igs::{Algorithm, NoisyOracle, NoisyOracleConfig, Oracle, TargetSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = Arc::new(gen_random_tree(1000, 5, 3)?);

    // one noisy oracle on its own
    let t = TargetSet::new(&h, vec![h.leaves().next().unwrap()])?;
    let cfg = NoisyOracleConfig::new(1.0, 0.3, 7)?;
    let mut oracle = NoisyOracle::new(t, cfg, true, 0);
    for v in h.vertices().take(50) {
        oracle.reach(&h, v);
    }
    println!("flipped {} of 50 answers at p = 0.3", oracle.flips());

    let objects = sample_objects(&h, 100, 1..=3, 4)?;
    for frac in [0.0, 0.25, 0.5] {
        let cfg = BenchConfig {
            algorithms: vec![Algorithm::KbmDpPlus, Algorithm::KbmTopk, Algorithm::BingMulti],
            budgets: vec![10, 30],
            ks: vec![3],
            noise: Some(NoisyOracleConfig::new(frac, 0.1, 11)?),
            timing: false,
        };
        let report = ExperimentReport::from_rows(&run_experiment(&h, &objects, &cfg)?);
        for r in &report.rows {
            println!("X = {frac:<4} {:<12} b = {:<3} mean penalty {:.2}", r.algorithm, r.b, r.mean_penalty);
        }
    }
    Ok(())
}
