//! kBM-DP+: kBM-DP with upper-bound pruning of the candidate loop.
//!
//! Each candidate carries the Yes/No gains it had the last time it was
//! evaluated (round 1 uses a precomputed cache). Under the current
//! probabilities these give a bound on its expected gain; candidates are
//! opened in descending bound order and the loop stops once the best exact
//! gain found strictly exceeds the next bound. Gains usually shrink from round
//! to round, so the bound is a heuristic rather than a guarantee.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dp::{kbm_dp_gain_all, kbm_dp_gain_row, no_probabilities, DpTable};
use crate::gain::{expected_gain, gains_tie, prefer, GainRow};
use crate::hierarchy::{Hierarchy, VertexId};
use crate::session::{Mode, SessionError, SessionState};

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache was built for hierarchy {found}, expected {expected}")]
    HierarchyMismatch { expected: String, found: String },
    #[error("cache was built for k = {found}, expected {expected}")]
    KMismatch { expected: usize, found: usize },
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache format: {0}")]
    Format(#[from] serde_json::Error),
}

/// Exact round-1 gains for every vertex. They depend only on the hierarchy and
/// `k`, never on the targets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstRoundCache {
    pub hierarchy_hash: String,
    pub k: usize,
    pub g_yes: Vec<i64>,
    pub g_no: Vec<i64>,
}

impl FirstRoundCache {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CacheError> {
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CacheError> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }

    pub fn check(&self, h: &Hierarchy, k: usize) -> Result<(), CacheError> {
        let expected = h.content_hash();
        if self.hierarchy_hash != expected {
            return Err(CacheError::HierarchyMismatch {
                expected,
                found: self.hierarchy_hash.clone(),
            });
        }
        if self.k != k {
            return Err(CacheError::KMismatch { expected: k, found: self.k });
        }
        Ok(())
    }
}

pub fn precompute_first_round(h: &Hierarchy, k: usize) -> Result<FirstRoundCache, SessionError> {
    let state = SessionState::new(h, Mode::Multi, 1, k)?;
    let mut g_yes = vec![0i64; h.len()];
    let mut g_no = vec![0i64; h.len()];
    if !state.is_terminated() {
        let table = DpTable::build(h, &state);
        for row in kbm_dp_gain_all(h, &state, &table) {
            g_yes[row.vertex.index()] = row.g_yes;
            g_no[row.vertex.index()] = row.g_no;
        }
    }
    Ok(FirstRoundCache {
        hierarchy_hash: h.content_hash(),
        k,
        g_yes,
        g_no,
    })
}

/// Carried per-vertex gain bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainBounds {
    pub ub_g_yes: Vec<i64>,
    pub ub_g_no: Vec<i64>,
}

impl GainBounds {
    pub fn from_cache(cache: &FirstRoundCache) -> Self {
        GainBounds {
            ub_g_yes: cache.g_yes.clone(),
            ub_g_no: cache.g_no.clone(),
        }
    }

    /// Evaluated vertices take their fresh exact gains; skipped vertices keep
    /// their previous bounds.
    pub fn update_after_round(&mut self, exact_rows: &[GainRow]) {
        for r in exact_rows {
            self.ub_g_yes[r.vertex.index()] = r.g_yes;
            self.ub_g_no[r.vertex.index()] = r.g_no;
        }
    }
}

/// Outcome of one kBM-DP+ round.
#[derive(Clone, Debug)]
pub struct PlusRound {
    pub question: VertexId,
    pub evaluated: Vec<GainRow>,
    pub pool_size: usize,
}

impl PlusRound {
    pub fn evaluations(&self) -> usize {
        self.evaluated.len()
    }
}

pub fn kbm_dp_plus_round(h: &Hierarchy, state: &SessionState, bounds: &GainBounds) -> Result<PlusRound, SessionError> {
    if state.budget_remaining() == 0 {
        return Err(SessionError::BudgetExhausted);
    }
    let p_no = no_probabilities(h, state);
    let mut order: Vec<(VertexId, f64)> = state
        .candidates()
        .map(|v| {
            let pn = p_no[v.index()];
            let ub = expected_gain(1.0 - pn, pn, bounds.ub_g_yes[v.index()], bounds.ub_g_no[v.index()]);
            (v, ub)
        })
        .collect();
    if order.is_empty() {
        return Err(SessionError::EmptyPool);
    }
    order.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(h.depth(b.0).cmp(&h.depth(a.0)))
            .then(a.0.cmp(&b.0))
    });
    let table = DpTable::build(h, state);
    let mut evaluated: Vec<GainRow> = Vec::new();
    let mut best: Option<GainRow> = None;
    for &(v, ub) in &order {
        if let Some(b) = best {
            if b.gain > ub && !gains_tie(b.gain, ub) {
                break;
            }
        }
        let row = kbm_dp_gain_row(h, state, &table, &p_no, v);
        evaluated.push(row);
        if best.is_none_or(|b| prefer(h, row.vertex, row.gain, b.vertex, b.gain)) {
            best = Some(row);
        }
    }
    Ok(PlusRound {
        question: best.expect("pool is non-empty").vertex,
        evaluated,
        pool_size: order.len(),
    })
}

/// Select the next question and fold the round's exact gains into `bounds`.
pub fn kbm_dp_plus_next_question(
    h: &Hierarchy,
    state: &SessionState,
    bounds: &mut GainBounds,
) -> Result<PlusRound, SessionError> {
    let round = kbm_dp_plus_round(h, state, bounds)?;
    bounds.update_after_round(&round.evaluated);
    Ok(round)
}
