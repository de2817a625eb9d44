//! Simulated experiment sweeps over algorithms, budgets and `k`.
//!
//! A session never looks at its remaining budget when choosing a question, so
//! one run with the largest budget, finalized at every smaller budget along
//! the way, gives the same selections as separate runs per budget.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dp_plus::{precompute_first_round, FirstRoundCache};
use crate::engine::{Algorithm, Searcher};
use crate::error::Error;
use crate::hierarchy::Hierarchy;
use crate::oracle::{NoisyOracle, NoisyOracleConfig, Oracle, TargetSet, TruthfulOracle};
use crate::penalty::set_penalty;
use crate::session::Mode;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub budgets: Vec<usize>,
    pub ks: Vec<usize>,
    pub noise: Option<NoisyOracleConfig>,
    /// Record wall-clock times. Off, the time columns are zero and the output
    /// is byte-identical across runs.
    pub timing: bool,
}

impl BenchConfig {
    fn validate(&self) -> Result<(), Error> {
        if self.algorithms.is_empty() || self.budgets.is_empty() || self.ks.is_empty() {
            return Err(Error::Config("algorithms, budgets and ks must be non-empty".into()));
        }
        if self.budgets.contains(&0) || self.ks.contains(&0) {
            return Err(Error::Config("budgets and ks must be positive".into()));
        }
        Ok(())
    }
}

/// One (algorithm, b, k, object) outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub b: usize,
    pub k: usize,
    pub object_id: usize,
    pub penalty: u64,
    pub questions: usize,
    pub total_us: u64,
    pub per_question_us: f64,
}

pub const CSV_HEADER: &str = "algorithm,b,k,object_id,penalty,questions,total_us,per_question_us";

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 48);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.3}",
            r.algorithm, r.b, r.k, r.object_id, r.penalty, r.questions, r.total_us, r.per_question_us
        );
    }
    out
}

/// Exactly `round(fraction · objects)` objects flagged difficult, chosen by a
/// seeded shuffle.
pub fn difficult_flags(objects: usize, fraction: f64, seed: u64) -> Vec<bool> {
    let wanted = (fraction * objects as f64).round() as usize;
    let mut idx: Vec<usize> = (0..objects).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut flags = vec![false; objects];
    for &i in idx.iter().take(wanted.min(objects)) {
        flags[i] = true;
    }
    flags
}

fn oracle_for(
    targets: &TargetSet,
    noise: Option<&NoisyOracleConfig>,
    difficult: &[bool],
    object: usize,
) -> Box<dyn Oracle + Send> {
    match noise {
        None => Box::new(TruthfulOracle::new(targets.clone())),
        Some(cfg) => Box::new(NoisyOracle::new(targets.clone(), *cfg, difficult[object], object as u64)),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_object(
    h: &Arc<Hierarchy>,
    algo: Algorithm,
    k: usize,
    budgets: &[usize],
    cache: Option<&FirstRoundCache>,
    targets: &TargetSet,
    mut oracle: Box<dyn Oracle + Send>,
    object: usize,
    timing: bool,
) -> Result<Vec<BenchRow>, Error> {
    let max_b = *budgets.iter().max().expect("validated");
    let mut searcher = match cache {
        Some(c) => Searcher::with_cache(h.clone(), max_b, k, c)?,
        None => Searcher::new(h.clone(), algo, max_b, k)?,
    };
    let mut rows = Vec::with_capacity(budgets.len());
    let mut elapsed_us = 0u64;
    let record = |searcher: &Searcher, b: usize, elapsed_us: u64, rows: &mut Vec<BenchRow>| {
        let sel = searcher.finalize();
        let questions = searcher.state().questions_asked();
        let (total_us, per_question_us) = if timing {
            (elapsed_us, if questions == 0 { 0.0 } else { elapsed_us as f64 / questions as f64 })
        } else {
            (0, 0.0)
        };
        rows.push(BenchRow {
            algorithm: algo,
            b,
            k: searcher.state().k(),
            object_id: object,
            penalty: set_penalty(h, sel.members(), targets.members()),
            questions,
            total_us,
            per_question_us,
        });
    };
    let mut sorted: Vec<usize> = budgets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut next_checkpoint = 0;
    loop {
        let asked = searcher.state().questions_asked();
        while next_checkpoint < sorted.len() && (sorted[next_checkpoint] == asked || searcher.is_done()) {
            record(&searcher, sorted[next_checkpoint], elapsed_us, &mut rows);
            next_checkpoint += 1;
        }
        if next_checkpoint == sorted.len() {
            break;
        }
        let start = Instant::now();
        let q = searcher.next_question()?.expect("session is live");
        let a = oracle.reach(h, q);
        searcher.answer(a)?;
        elapsed_us += start.elapsed().as_micros() as u64;
    }
    Ok(rows)
}

/// Run every (algorithm, k, object) session and report each budget.
/// Single-target algorithms always run with `k = 1`. Rows come back ordered
/// by algorithm (config order), b, k and object.
pub fn run_experiment(h: &Arc<Hierarchy>, objects: &[TargetSet], cfg: &BenchConfig) -> Result<Vec<BenchRow>, Error> {
    cfg.validate()?;
    let difficult = match &cfg.noise {
        Some(n) => difficult_flags(objects.len(), n.difficult_fraction, n.rng_seed),
        None => vec![false; objects.len()],
    };
    let mut all = Vec::new();
    for (ai, &algo) in cfg.algorithms.iter().enumerate() {
        let ks: Vec<usize> = if algo.mode() == Mode::Single {
            vec![1]
        } else {
            let mut ks = cfg.ks.clone();
            ks.sort_unstable();
            ks.dedup();
            ks
        };
        for k in ks {
            if k > h.len() {
                return Err(Error::Config(format!("k = {k} exceeds the hierarchy size {}", h.len())));
            }
            let cache = if algo == Algorithm::KbmDpPlus {
                Some(precompute_first_round(h, k)?)
            } else {
                None
            };
            let per_object: Vec<Result<Vec<BenchRow>, Error>> = objects
                .par_iter()
                .enumerate()
                .map(|(i, t)| {
                    let oracle = oracle_for(t, cfg.noise.as_ref(), &difficult, i);
                    run_object(h, algo, k, &cfg.budgets, cache.as_ref(), t, oracle, i, cfg.timing).map_err(|e| {
                        Error::Object {
                            index: i,
                            source: Box::new(e),
                        }
                    })
                })
                .collect();
            for rows in per_object {
                all.extend(rows?.into_iter().map(|r| (ai, r)));
            }
        }
    }
    all.sort_by_key(|(ai, r)| (*ai, r.b, r.k, r.object_id));
    Ok(all.into_iter().map(|(_, r)| r).collect())
}

/// Means over query objects for one (algorithm, b, k).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub algorithm: Algorithm,
    pub b: usize,
    pub k: usize,
    pub objects: usize,
    pub mean_penalty: f64,
    pub mean_time_per_question_us: f64,
    pub mean_total_time_us: f64,
    pub questions_asked_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn from_rows(rows: &[BenchRow]) -> Self {
        let mut out: Vec<ReportRow> = Vec::new();
        for group in rows.chunk_by(|a, b| (a.algorithm, a.b, a.k) == (b.algorithm, b.b, b.k)) {
            let n = group.len() as f64;
            let mean = |f: &dyn Fn(&BenchRow) -> f64| group.iter().map(f).sum::<f64>() / n;
            out.push(ReportRow {
                algorithm: group[0].algorithm,
                b: group[0].b,
                k: group[0].k,
                objects: group.len(),
                mean_penalty: mean(&|r| r.penalty as f64),
                mean_time_per_question_us: mean(&|r| r.per_question_us),
                mean_total_time_us: mean(&|r| r.total_us as f64),
                questions_asked_mean: mean(&|r| r.questions as f64),
            });
        }
        ExperimentReport { rows: out }
    }

    pub fn find(&self, algorithm: Algorithm, b: usize, k: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.b == b && r.k == k)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
