//! Several hidden targets, a k-sized selection, and the question-by-question
//! state of a kBM-DP session.

use std::sync::Arc;

use kbm_igs::fixtures::toy10;
use kbm_igs::oracle::truthful_answer;
use kbm_igs::session::export_log_jsonl;
use kbm_igs::{set_penalty, Algorithm, Searcher, TargetSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = Arc::new(toy10());
    let targets = TargetSet::from_labels(&h, &["v5", "v8"])?;
    let mut s = Searcher::new(h.clone(), Algorithm::KbmDp, 3, 2)?;

    while let Some(q) = s.next_question()? {
        let a = truthful_answer(&h, &targets, q);
        s.answer(a)?;
        let st = s.state();
        let best: Vec<&str> = s.finalize().members().iter().map(|&v| h.key(v)).collect();
        println!(
            "{} -> {a}: |P| = {}, |Y| = {}, best so far {best:?} (potential penalty {})",
            h.key(q),
            st.p_count(),
            st.y_count(),
            st.potential_penalty(&h)
        );
    }
    let sel = s.finalize();
    println!("penalty against the real targets: {}", set_penalty(&h, sel.members(), targets.members()));
    print!("log:\n{}", export_log_jsonl(&h, s.state()));
    Ok(())
}
