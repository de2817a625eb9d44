//! A small sweep over algorithms, budgets and k, written as CSV and as a
//! JSON summary.

use std::sync::Arc;

use kbm_igs::bench::{run_experiment, to_csv, BenchConfig, ExperimentReport};
use kbm_igs::synth::{gen_random_tree, sample_objects};
use kbm_igs::Algorithm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = Arc::new(gen_random_tree(2000, 6, 21)?);
    let objects = sample_objects(&h, 50, 1..=3, 22)?;
    let cfg = BenchConfig {
        algorithms: vec![Algorithm::Stbis, Algorithm::BingSingle, Algorithm::KbmDpPlus, Algorithm::BingMulti],
        budgets: vec![5, 10, 20],
        ks: vec![1, 3],
        noise: None,
        timing: true,
    };
    let rows = run_experiment(&h, &objects, &cfg)?;
    let csv = to_csv(&rows);
    println!("{} rows; first lines:", rows.len());
    for line in csv.lines().take(4) {
        println!("  {line}");
    }
    let report = ExperimentReport::from_rows(&rows);
    for r in &report.rows {
        println!(
            "{:<12} b = {:<3} k = {}  mean penalty {:>6.2}  {:>8.1} us/question",
            r.algorithm, r.b, r.k, r.mean_penalty, r.mean_time_per_question_us
        );
    }
    Ok(())
}
