//! End-to-end sessions with simulated oracles.

mod common;

use std::sync::Arc;

use common::instance;
use kbm_igs::bing::{bing_next_question_multi, bing_next_question_single, bing_score_single, p_above};
use kbm_igs::oracle::truthful_answer;
use kbm_igs::session::export_log_jsonl;
use kbm_igs::{set_penalty, Algorithm, Mode, NoisyOracle, NoisyOracleConfig, Searcher, SessionState, TruthfulOracle};

#[test]
fn exhaustive_budget_recovers_targets() {
    for seed in 0..80u64 {
        for algo in Algorithm::ALL {
            let inst = instance(seed, 30, 3, algo.mode());
            let h = Arc::new(inst.h);
            let k = if algo.mode() == Mode::Multi { inst.targets.len() } else { 1 };
            let mut s = Searcher::new(h.clone(), algo, h.len() + 1, k).unwrap();
            let out = s.run_with(TruthfulOracle::new(inst.targets.clone())).unwrap();
            let mut p = s.state().potential_targets();
            p.sort();
            assert_eq!(p, inst.targets.members(), "{algo} seed {seed}");
            assert_eq!(set_penalty(&h, out.selection.members(), inst.targets.members()), 0, "{algo} seed {seed}");
        }
    }
}

#[test]
fn budget_is_never_exceeded() {
    for seed in 0..40u64 {
        for algo in Algorithm::ALL {
            let inst = instance(seed, 30, 3, algo.mode());
            let h = Arc::new(inst.h);
            let mut s = Searcher::new(h.clone(), algo, 3, inst.k).unwrap();
            let out = s.run_with(TruthfulOracle::new(inst.targets.clone())).unwrap();
            assert!(out.questions.len() <= 3);
            assert!(out.selection.len() <= s.state().k());
        }
    }
}

#[test]
fn bing_single_finds_the_target_and_prunes_as_promised() {
    for seed in 0..60u64 {
        let inst = instance(seed, 40, 1, Mode::Single);
        let h = &inst.h;
        let mut s = SessionState::new(h, Mode::Single, h.len(), 1).unwrap();
        while !s.is_terminated() {
            let q = bing_next_question_single(h, &s).unwrap();
            let promised = bing_score_single(&s, q);
            let before = s.p_count();
            s.apply_answer(h, q, truthful_answer(h, &inst.targets, q)).unwrap();
            assert!(before - s.p_count() >= promised);
        }
        assert!(s.questions_asked() < h.len());
        assert_eq!(s.potential_targets(), inst.targets.members());
    }
}

#[test]
fn bing_multi_prunes_as_promised() {
    for seed in 0..60u64 {
        let inst = instance(seed, 40, 3, Mode::Multi);
        let h = &inst.h;
        let mut s = SessionState::new(h, Mode::Multi, h.len(), inst.k).unwrap();
        while !s.is_terminated() {
            let q = bing_next_question_multi(h, &s).unwrap();
            let above = p_above(h, &s)[q.index()] as usize - 1;
            let promised = above.min(s.p_below(q) as usize);
            let before = s.p_count();
            s.apply_answer(h, q, truthful_answer(h, &inst.targets, q)).unwrap();
            assert!(before - s.p_count() >= promised);
        }
    }
}

#[test]
fn dp_plus_never_evaluates_more_than_dp() {
    let mut matched = 0;
    let total = 60;
    for seed in 0..total {
        let inst = instance(seed, 25, 3, Mode::Multi);
        let h = Arc::new(inst.h);
        let mut dp = Searcher::new(h.clone(), Algorithm::KbmDp, 6, inst.k).unwrap();
        let mut plus = Searcher::new(h.clone(), Algorithm::KbmDpPlus, 6, inst.k).unwrap();
        let a = dp.run_with(TruthfulOracle::new(inst.targets.clone())).unwrap();
        let mut pools = Vec::new();
        let mut probe = Searcher::new(h.clone(), Algorithm::KbmDp, 6, inst.k).unwrap();
        for &(q, ans) in &a.questions {
            pools.push(probe.state().candidate_count());
            probe.next_question().unwrap();
            probe.answer(ans).unwrap();
            let _ = q;
        }
        let b = plus.run_with(TruthfulOracle::new(inst.targets.clone())).unwrap();
        for (round, &evals) in plus.evaluations().iter().enumerate() {
            if let Some(&pool) = pools.get(round) {
                if a.questions.get(round).map(|x| x.0) == b.questions.get(round).map(|x| x.0) {
                    assert!(evals <= pool);
                }
            }
            assert!(evals >= 1);
        }
        if a.questions == b.questions {
            matched += 1;
        }
    }
    assert!(matched * 2 >= total, "kBM-DP+ matched kBM-DP on only {matched}/{total}");
}

#[test]
fn noisy_sessions_complete() {
    let cfg = NoisyOracleConfig::new(1.0, 0.3, 17).unwrap();
    for seed in 0..60u64 {
        for algo in Algorithm::ALL {
            let inst = instance(seed, 30, 3, algo.mode());
            let h = Arc::new(inst.h);
            let mut s = Searcher::new(h.clone(), algo, 10, inst.k).unwrap();
            let oracle = NoisyOracle::new(inst.targets.clone(), cfg, true, seed);
            let out = s.run_with(oracle).unwrap();
            assert!(!out.selection.is_empty());
        }
    }
}

#[test]
fn log_export_has_one_line_per_question() {
    let inst = instance(3, 30, 3, Mode::Multi);
    let h = Arc::new(inst.h);
    let mut s = Searcher::new(h.clone(), Algorithm::KbmTopk, 5, inst.k).unwrap();
    let out = s.run_with(TruthfulOracle::new(inst.targets.clone())).unwrap();
    let text = export_log_jsonl(&h, s.state());
    assert_eq!(text.lines().count(), out.questions.len());
    let mut last = i64::MAX;
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let p = v["penalty_so_far"].as_i64().unwrap();
        assert!(p <= last, "truthful answers never raise the potential penalty");
        last = p;
    }
}
