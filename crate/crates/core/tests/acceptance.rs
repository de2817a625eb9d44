//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any fails.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{after, instance, random_walk};
use kbm_igs::bench::{run_experiment, BenchConfig, ExperimentReport};
use kbm_igs::dp::{kbm_dp_gain_all, kbm_dp_next_question, DpTable};
use kbm_igs::dp_plus::{kbm_dp_plus_round, precompute_first_round, GainBounds};
use kbm_igs::fixtures::{toy10, verify_fixtures, FixtureOptions};
use kbm_igs::gain::{expected_gain, gains_tie};
use kbm_igs::oracle::truthful_answer;
use kbm_igs::penalty::brute_force_potential_penalty;
use kbm_igs::single::{dfs_gain_all, naive_gain_single};
use kbm_igs::synth::{gen_random_tree, sample_objects, sample_targets};
use kbm_igs::topk::approximation_bounds;
use kbm_igs::{
    set_penalty, Algorithm, Answer, Hierarchy, Mode, NoisyOracleConfig, Oracle, Searcher, SessionState, TargetSet,
    TruthfulOracle,
};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn fixture_table(table: &'static str) -> Outcome {
    let started = Instant::now();
    let h = toy10();
    let report = verify_fixtures(&h, &FixtureOptions::default()).map_err(|e| e.to_string())?;
    let cells: Vec<_> = report.cells.iter().filter(|c| c.table == table).collect();
    ensure(!cells.is_empty(), || format!("no {table} cells checked"))?;
    if let Some(bad) = cells.iter().find(|c| !c.ok()) {
        return Err(format!(
            "{} {} expected {} got {}",
            bad.row, bad.column, bad.expected, bad.actual
        ));
    }
    within(Duration::from_secs(1), started)?;
    Ok(format!("{} cells", cells.len()))
}

fn dp_oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut states = 0;
    let mut overlays = 0;
    for seed in 0..120u64 {
        let inst = instance(seed, 25, 3, Mode::Multi);
        let h = &inst.h;
        for s in random_walk(&inst, Mode::Multi, seed) {
            let table = DpTable::build(h, &s);
            let (g, _) = brute_force_potential_penalty(h, &s.yes_candidates(), &s.potential_targets(), s.k())
                .map_err(|e| e.to_string())?;
            ensure(table.root_value() == g, || format!("seed {seed}: dp {} vs {g}", table.root_value()))?;
            let sel = table.extract_selection(h, &s);
            let pen = set_penalty(h, sel.members(), &s.potential_targets());
            ensure(pen == g, || format!("seed {seed}: extracted selection costs {pen}, optimum {g}"))?;
            if !s.is_terminated() {
                for u in s.candidates() {
                    let yes = DpTable::build(h, &after(h, &s, u, Answer::Yes)).root_value();
                    let no = DpTable::build(h, &after(h, &s, u, Answer::No)).root_value();
                    ensure(table.calg_yes(h, &s, u) == yes && table.calg_no(h, &s, u) == no, || {
                        format!("seed {seed}: overlay mismatch at {u}")
                    })?;
                    overlays += 1;
                }
            }
            states += 1;
        }
    }
    ensure(states >= 1000, || format!("only {states} states"))?;
    within(Duration::from_secs(120), started)?;
    Ok(format!("{states} states, {overlays} overlay pairs"))
}

fn stbis_equivalence() -> Outcome {
    let started = Instant::now();
    let mut states = 0;
    for seed in 0..200u64 {
        let inst = instance(seed, 40, 1, Mode::Single);
        let h = &inst.h;
        for s in random_walk(&inst, Mode::Single, seed) {
            if s.is_terminated() {
                continue;
            }
            for r in dfs_gain_all(h, &s) {
                let n = naive_gain_single(h, &s, r.vertex);
                let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
                ensure(
                    r.g_yes == n.g_yes
                        && r.g_no == n.g_no
                        && close(r.p_yes, n.p_yes)
                        && close(r.p_no, n.p_no)
                        && close(r.gain, n.gain),
                    || format!("seed {seed}: {r:?} vs {n:?}"),
                )?;
            }
            states += 1;
        }
    }
    ensure(states >= 500, || format!("only {states} states"))?;
    within(Duration::from_secs(60), started)?;
    Ok(format!("{states} states"))
}

fn approximation_suite() -> Outcome {
    let mut sessions = 0;
    let mut states = 0;
    for seed in 0..500u64 {
        let inst = instance(seed, 25, 3, Mode::Multi);
        for s in random_walk(&inst, Mode::Multi, seed + 7000) {
            let b = approximation_bounds(&inst.h, &s).map_err(|e| e.to_string())?;
            ensure(b.holds(), || format!("seed {seed}: {b:?}"))?;
            if s.k() == 1 {
                ensure(b.gprime == b.ub, || format!("seed {seed}: k = 1 but {b:?}"))?;
            }
            states += 1;
        }
        sessions += 1;
    }
    Ok(format!("{sessions} sessions, {states} states, 0 violations"))
}

fn unbounded_endpoint() -> Outcome {
    let mut runs = 0;
    for seed in 0..500u64 {
        for algo in Algorithm::ALL {
            let inst = instance(seed, 30, 3, algo.mode());
            let h = Arc::new(inst.h);
            let k = inst.targets.len();
            let mut s = Searcher::new(h.clone(), algo, h.len() + 1, k).map_err(|e| e.to_string())?;
            let out = s.run_with(TruthfulOracle::new(inst.targets.clone())).map_err(|e| e.to_string())?;
            let mut p = s.state().potential_targets();
            p.sort();
            ensure(p == inst.targets.members(), || format!("{algo} seed {seed}: P differs from T"))?;
            let pen = set_penalty(&h, out.selection.members(), inst.targets.members());
            ensure(pen == 0, || format!("{algo} seed {seed}: penalty {pen}"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} sessions over 500 instances"))
}

/// Replays a kBM-DP+ session and, at each round, the full kBM-DP gain pool of
/// the same state. Returns (plus sequence, dp sequence, per-round plus
/// evaluations, per-round pool sizes, whether every carried bound dominated
/// the exact gain).
fn plus_vs_dp(
    h: &Hierarchy,
    targets: &TargetSet,
    budget: usize,
    k: usize,
) -> (Vec<String>, Vec<String>, Vec<usize>, Vec<usize>, bool) {
    let cache = precompute_first_round(h, k).unwrap();
    let mut bounds = GainBounds::from_cache(&cache);
    let mut s = SessionState::new(h, Mode::Multi, budget, k).unwrap();
    let (mut plus_seq, mut dp_here, mut evals, mut pools) = (vec![], vec![], vec![], vec![]);
    let mut monotone = true;
    while !s.is_terminated() {
        let table = DpTable::build(h, &s);
        let exact = kbm_dp_gain_all(h, &s, &table);
        for r in &exact {
            let ub = expected_gain(r.p_yes, r.p_no, bounds.ub_g_yes[r.vertex.index()], bounds.ub_g_no[r.vertex.index()]);
            if ub < r.gain && !gains_tie(ub, r.gain) {
                monotone = false;
            }
        }
        let round = kbm_dp_plus_round(h, &s, &bounds).unwrap();
        bounds.update_after_round(&round.evaluated);
        dp_here.push(h.key(kbm_dp_next_question(h, &s).unwrap()).to_string());
        plus_seq.push(h.key(round.question).to_string());
        evals.push(round.evaluations());
        pools.push(exact.len());
        let a = truthful_answer(h, targets, round.question);
        s.apply_answer(h, round.question, a).unwrap();
    }
    (plus_seq, dp_here, evals, pools, monotone)
}

fn dp_plus_consistency() -> Outcome {
    let h = toy10();
    let t = TargetSet::from_labels(&h, &["v5", "v8"]).map_err(|e| e.to_string())?;
    let (plus, dp, evals, pools, _) = plus_vs_dp(&h, &t, 2, 2);
    ensure(plus == dp && plus == ["v3", "v5"], || format!("fixture sequences {plus:?} vs {dp:?}"))?;
    ensure(evals.iter().zip(&pools).all(|(e, p)| e <= p), || "fixture evaluations exceed pool".into())?;

    let (mut matched, mut monotone_instances, mut saved, mut total_pool) = (0, 0, 0usize, 0usize);
    let total = 300;
    for seed in 0..total {
        let inst = instance(seed, 30, 3, Mode::Multi);
        let h = Arc::new(inst.h);
        let (plus, _, evals, pools, monotone) = plus_vs_dp(&h, &inst.targets, 8, inst.k);
        ensure(evals.iter().zip(&pools).all(|(e, p)| e <= p), || format!("seed {seed}: {evals:?} > {pools:?}"))?;
        let mut dp = Searcher::new(h.clone(), Algorithm::KbmDp, 8, inst.k).map_err(|e| e.to_string())?;
        let dp_seq: Vec<String> = dp
            .run_with(TruthfulOracle::new(inst.targets.clone()))
            .map_err(|e| e.to_string())?
            .questions
            .iter()
            .map(|(q, _)| h.key(*q).to_string())
            .collect();
        if monotone {
            monotone_instances += 1;
            ensure(plus == dp_seq, || format!("seed {seed}: monotone instance diverged"))?;
        }
        if plus == dp_seq {
            matched += 1;
        }
        saved += pools.iter().sum::<usize>() - evals.iter().sum::<usize>();
        total_pool += pools.iter().sum::<usize>();
    }
    Ok(format!(
        "fixture (v3, v5); match rate {matched}/{total}; monotone instances {monotone_instances} all exact; \
         evaluations skipped {saved}/{total_pool}"
    ))
}

const BUDGETS: [usize; 4] = [5, 10, 20, 50];

fn suite_tree() -> Arc<Hierarchy> {
    Arc::new(gen_random_tree(5000, 6, 2024).unwrap())
}

fn mean(report: &ExperimentReport, algo: Algorithm, b: usize, k: usize) -> f64 {
    report.find(algo, b, k).map(|r| r.mean_penalty).unwrap_or(f64::NAN)
}

fn non_increasing(report: &ExperimentReport, algo: Algorithm, k: usize) -> Result<(), String> {
    for w in BUDGETS.windows(2) {
        let (a, b) = (mean(report, algo, w[0], k), mean(report, algo, w[1], k));
        ensure(b <= a + 1e-9, || format!("{algo} rises from {a:.3} at b={} to {b:.3} at b={}", w[0], w[1]))?;
    }
    Ok(())
}

fn baseline_ordering() -> Outcome {
    let h = suite_tree();
    let single_objects = sample_objects(&h, 200, 1..=1, 11).map_err(|e| e.to_string())?;
    let multi_objects = sample_objects(&h, 200, 1..=3, 12).map_err(|e| e.to_string())?;
    let cfg = |algorithms: Vec<Algorithm>| BenchConfig {
        algorithms,
        budgets: BUDGETS.to_vec(),
        ks: vec![3],
        noise: None,
        timing: false,
    };
    let single = ExperimentReport::from_rows(
        &run_experiment(&h, &single_objects, &cfg(vec![Algorithm::Stbis, Algorithm::BingSingle]))
            .map_err(|e| e.to_string())?,
    );
    let multi = ExperimentReport::from_rows(
        &run_experiment(&h, &multi_objects, &cfg(vec![Algorithm::KbmDpPlus, Algorithm::BingMulti]))
            .map_err(|e| e.to_string())?,
    );
    let mut detail = Vec::new();
    for b in BUDGETS {
        let (st, bs) = (mean(&single, Algorithm::Stbis, b, 1), mean(&single, Algorithm::BingSingle, b, 1));
        let (dp, bm) = (mean(&multi, Algorithm::KbmDpPlus, b, 3), mean(&multi, Algorithm::BingMulti, b, 3));
        ensure(st <= bs, || format!("b={b}: stbis {st:.3} > bing-single {bs:.3}"))?;
        ensure(dp <= bm, || format!("b={b}: kbm-dp-plus {dp:.3} > bing-multi {bm:.3}"))?;
        detail.push(format!("b={b} {st:.2}/{bs:.2} {dp:.2}/{bm:.2}"));
    }
    non_increasing(&single, Algorithm::Stbis, 1)?;
    non_increasing(&single, Algorithm::BingSingle, 1)?;
    non_increasing(&multi, Algorithm::KbmDpPlus, 3)?;
    non_increasing(&multi, Algorithm::BingMulti, 3)?;
    Ok(format!("n=5000, 200 objects, stbis/bing-single dp+/bing-multi: {}", detail.join("; ")))
}

fn noise_robustness() -> Outcome {
    let h = suite_tree();
    let objects = sample_objects(&h, 200, 1..=3, 13).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for frac in [0.1, 0.3, 0.5] {
        let cfg = BenchConfig {
            algorithms: vec![Algorithm::KbmDpPlus, Algorithm::BingMulti],
            budgets: BUDGETS.to_vec(),
            ks: vec![3],
            noise: Some(NoisyOracleConfig::new(frac, 0.1, 99)?),
            timing: false,
        };
        let rows = run_experiment(&h, &objects, &cfg).map_err(|e| format!("fraction {frac}: {e}"))?;
        let report = ExperimentReport::from_rows(&rows);
        for b in BUDGETS {
            let (dp, bm) = (mean(&report, Algorithm::KbmDpPlus, b, 3), mean(&report, Algorithm::BingMulti, b, 3));
            ensure(dp <= bm, || format!("fraction {frac}, b={b}: kbm-dp-plus {dp:.3} > bing-multi {bm:.3}"))?;
        }
        detail.push(format!(
            "X={frac} b=50 {:.2}/{:.2}",
            mean(&report, Algorithm::KbmDpPlus, 50, 3),
            mean(&report, Algorithm::BingMulti, 50, 3)
        ));
    }
    Ok(detail.join("; "))
}

/// Mean seconds per question over up to `questions` rounds.
fn per_question(h: &Arc<Hierarchy>, algo: Algorithm, targets: &TargetSet, questions: usize) -> f64 {
    let mut s = Searcher::new(h.clone(), algo, questions, 3).unwrap();
    let mut oracle = TruthfulOracle::new(targets.clone());
    let started = Instant::now();
    let mut asked = 0;
    while let Some(q) = s.next_question().unwrap() {
        let a = oracle.reach(h, q);
        s.answer(a).unwrap();
        asked += 1;
    }
    started.elapsed().as_secs_f64() / asked.max(1) as f64
}

fn performance_envelope() -> Outcome {
    let h = Arc::new(gen_random_tree(50_000, 8, 5).unwrap());
    let t = sample_targets(&h, 3..=3, 6).map_err(|e| e.to_string())?;
    let topk = per_question(&h, Algorithm::KbmTopk, &t, 50);
    let plus = per_question(&h, Algorithm::KbmDpPlus, &t, 50);
    let dp = per_question(&h, Algorithm::KbmDp, &t, 50);
    let ms = |x: f64| x * 1e3;
    ensure(topk < plus && plus < dp, || {
        format!("topk {:.2} ms, dp+ {:.2} ms, dp {:.2} ms", ms(topk), ms(plus), ms(dp))
    })?;

    let mut ratios = Vec::new();
    for (i, n) in [12_500usize, 25_000, 50_000, 100_000].into_iter().enumerate() {
        let h = Arc::new(gen_random_tree(n, 8, 40 + i as u64).unwrap());
        let t = sample_targets(&h, 3..=3, 41).map_err(|e| e.to_string())?;
        let took = per_question(&h, Algorithm::KbmTopk, &t, 20);
        let predicted = n as f64 * h.height() as f64 * (n as f64).log2();
        ratios.push(took / predicted);
    }
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max) / ratios.iter().cloned().fold(f64::MAX, f64::min);
    ensure(spread <= 3.0, || format!("topk time / (n h log n) varies {spread:.2}x over the doubling family"))?;
    Ok(format!(
        "n=50000 per question: topk {:.2} ms < dp+ {:.2} ms < dp {:.2} ms; topk slope spread {spread:.2}x",
        ms(topk),
        ms(plus),
        ms(dp)
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("single-target gain tables", || fixture_table("single")),
        ("multi-target gain tables", || fixture_table("multi")),
        ("dp oracle equivalence", dp_oracle_equivalence),
        ("stbis fast-path equivalence", stbis_equivalence),
        ("approximation bounds", approximation_suite),
        ("unbounded budget endpoint", unbounded_endpoint),
        ("kbm-dp-plus consistency", dp_plus_consistency),
        ("baseline ordering", baseline_ordering),
        ("noise robustness", noise_robustness),
        ("performance envelope", performance_envelope),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let took = started.elapsed();
        match result {
            Ok(detail) => println!("PASS {name} [{took:.1?}]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} [{took:.1?}]: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
