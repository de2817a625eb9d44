//! Find one hidden target with STBIS and compare it with the BinG baseline.

use std::sync::Arc;

use kbm_igs::fixtures::toy10;
use kbm_igs::{set_penalty, Algorithm, Searcher, TargetSet, TruthfulOracle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = Arc::new(toy10());
    let target = TargetSet::from_labels(&h, &["v5"])?;

    for algo in [Algorithm::Stbis, Algorithm::BingSingle] {
        for budget in [1, 2, 5] {
            let mut s = Searcher::new(h.clone(), algo, budget, 1)?;
            let out = s.run_with(TruthfulOracle::new(target.clone()))?;
            let asked: Vec<String> = out.questions.iter().map(|(q, a)| format!("{}={a}", h.key(*q))).collect();
            let pick = h.key(out.selection.members()[0]);
            let pen = set_penalty(&h, out.selection.members(), target.members());
            println!("{algo:<12} b={budget}  asked [{}]  picks {pick}  penalty {pen}", asked.join(", "));
        }
    }
    Ok(())
}
