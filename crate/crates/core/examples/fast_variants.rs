//! kBM-DP against its faster relatives on a large random tree: per-question
//! time, how many exact evaluations kBM-DP+ needed, and the final penalties.
//!
//! `cargo run --release --example fast_variants -- 50000`

use std::sync::Arc;
use std::time::Instant;

use kbm_igs::dp_plus::precompute_first_round;
use kbm_igs::synth::{gen_random_tree, sample_targets};
use kbm_igs::{set_penalty, Algorithm, Searcher, TruthfulOracle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(20_000), |s| s.parse())?;
    let (budget, k) = (20, 3);
    let h = Arc::new(gen_random_tree(n, 8, 1)?);
    let targets = sample_targets(&h, 3..=3, 2)?;
    println!("n = {}, height = {}, b = {budget}, k = {k}", h.len(), h.height());

    let started = Instant::now();
    let cache = precompute_first_round(&h, k)?;
    println!("kBM-DP+ first-round cache: {:.1?}", started.elapsed());

    for algo in [Algorithm::KbmTopk, Algorithm::KbmDpPlus, Algorithm::KbmDp, Algorithm::BingMulti] {
        let mut s = if algo == Algorithm::KbmDpPlus {
            Searcher::with_cache(h.clone(), budget, k, &cache)?
        } else {
            Searcher::new(h.clone(), algo, budget, k)?
        };
        let started = Instant::now();
        let out = s.run_with(TruthfulOracle::new(targets.clone()))?;
        let per_q = started.elapsed() / out.questions.len().max(1) as u32;
        let pen = set_penalty(&h, out.selection.members(), targets.members());
        print!("{algo:<12} {per_q:>10.2?}/question  penalty {pen}");
        if algo == Algorithm::KbmDpPlus {
            let evals: usize = s.evaluations().iter().sum();
            print!("  exact evaluations {evals}");
        }
        println!();
    }
    Ok(())
}
