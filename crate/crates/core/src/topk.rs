//! kBM-Topk: approximate potential penalty from independent selected gains.
//!
//! Selecting `x` instead of relying on the root saves `depth(x)` for every
//! potential target below it, so `IG(x) = |P ∩ des(x)| · depth(x)`. The
//! approximation `g′(Y, P, k) = f({r}, P) − (sum of the k largest IG over Y)`
//! ignores that nested selections share targets; it is exact for `k = 1`.
//!
//! A hypothetical answer to `u` changes `IG` only on the root path of `u`, so
//! each candidate costs `O(h + k)` against the committed sorted list.

use crate::dp::no_probabilities;
use crate::gain::{best_row, GainRow};
use crate::hierarchy::{Hierarchy, VertexId};
use crate::penalty::{brute_force_potential_penalty, PenaltyError};
use crate::session::{SessionError, SessionState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelectedGain {
    pub vertex: VertexId,
    pub ig: u64,
}

pub fn selected_gain(h: &Hierarchy, state: &SessionState, x: VertexId) -> u64 {
    state.p_below(x) as u64 * h.depth(x) as u64
}

/// Selected gains of every Yes-candidate, largest first.
#[derive(Clone, Debug)]
pub struct TopkStructure {
    entries: Vec<SelectedGain>,
    k: usize,
    root_cost: u64,
    /// `Σ depth(t)` over `t ∈ P ∩ des(v)`.
    depth_below: Vec<u64>,
}

impl TopkStructure {
    pub fn build(h: &Hierarchy, state: &SessionState) -> Self {
        let mut entries: Vec<SelectedGain> = state
            .yes_candidates()
            .into_iter()
            .map(|x| SelectedGain {
                vertex: x,
                ig: selected_gain(h, state, x),
            })
            .collect();
        entries.sort_by(|a, b| b.ig.cmp(&a.ig).then(a.vertex.cmp(&b.vertex)));
        let mut depth_below = vec![0u64; h.len()];
        for &v in h.preorder().iter().rev() {
            let own = if state.in_p(v) { h.depth(v) as u64 } else { 0 };
            depth_below[v.index()] = own + h.children(v).iter().map(|c| depth_below[c.index()]).sum::<u64>();
        }
        TopkStructure {
            entries,
            k: state.k(),
            root_cost: depth_below[h.root().index()],
            depth_below,
        }
    }

    pub fn entries(&self) -> &[SelectedGain] {
        &self.entries
    }

    pub fn topk_sum(&self) -> u64 {
        self.entries.iter().take(self.k).map(|e| e.ig).sum()
    }

    /// `f({r}, P)`.
    pub fn root_cost(&self) -> u64 {
        self.root_cost
    }

    /// `g′(Y, P, k)`.
    pub fn approx_penalty(&self) -> i64 {
        self.root_cost as i64 - self.topk_sum() as i64
    }

    /// Up to `k` largest committed gains of Yes-candidates off the root path
    /// of `u`.
    fn off_path_top(&self, h: &Hierarchy, u: VertexId, out: &mut Vec<u64>) {
        out.clear();
        for e in &self.entries {
            if out.len() == self.k {
                break;
            }
            if !h.is_ancestor(e.vertex, u) {
                out.push(e.ig);
            }
        }
    }

    /// Sum of the `k` largest values of `a ∪ b`, where `a` is sorted
    /// descending.
    fn merged_top(&self, a: &[u64], b: &mut [u64]) -> u64 {
        b.sort_unstable_by(|x, y| y.cmp(x));
        let (mut i, mut j, mut sum) = (0, 0, 0);
        for _ in 0..self.k {
            let take_a = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x >= y,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            if take_a {
                sum += a[i];
                i += 1;
            } else {
                sum += b[j];
                j += 1;
            }
        }
        sum
    }

    /// `g′` after a hypothetical Yes to `u`: every vertex on the root path
    /// joins Y and the strict ancestors leave P.
    pub fn approx_yes(&self, h: &Hierarchy, state: &SessionState, u: VertexId) -> i64 {
        let mut off = Vec::with_capacity(self.k);
        self.off_path_top(h, u, &mut off);
        let mut path = Vec::with_capacity(h.depth(u) as usize + 1);
        let mut removed = 0u64;
        let mut removed_depth = 0u64;
        for v in h.ancestors(u) {
            if v != u && state.in_p(v) {
                removed += 1;
                removed_depth += h.depth(v) as u64;
            }
            path.push((state.p_below(v) as u64 - removed) * h.depth(v) as u64);
        }
        (self.root_cost - removed_depth) as i64 - self.merged_top(&off, &mut path) as i64
    }

    /// `g′` after a hypothetical No to `u`: `P ∩ des(u)` disappears, which
    /// lowers the gains of the Yes-candidates above `u`.
    pub fn approx_no(&self, h: &Hierarchy, state: &SessionState, u: VertexId) -> i64 {
        let mut off = Vec::with_capacity(self.k);
        self.off_path_top(h, u, &mut off);
        let gone = state.p_below(u) as u64;
        let mut path: Vec<u64> = h
            .ancestors(u)
            .filter(|&v| state.in_y(v))
            .map(|v| (state.p_below(v) as u64 - gone) * h.depth(v) as u64)
            .collect();
        (self.root_cost - self.depth_below[u.index()]) as i64 - self.merged_top(&off, &mut path) as i64
    }
}

/// `g′(Y, P, k)` computed from scratch.
pub fn approx_penalty(h: &Hierarchy, state: &SessionState) -> i64 {
    TopkStructure::build(h, state).approx_penalty()
}

pub fn kbm_topk_gain_all(h: &Hierarchy, state: &SessionState) -> Vec<GainRow> {
    let topk = TopkStructure::build(h, state);
    let base = topk.approx_penalty();
    let p_no = no_probabilities(h, state);
    state
        .candidates()
        .map(|u| {
            let pn = p_no[u.index()];
            let g_yes = base - topk.approx_yes(h, state, u);
            let g_no = base - topk.approx_no(h, state, u);
            GainRow::new(u, 1.0 - pn, pn, g_yes, g_no)
        })
        .collect()
}

pub fn kbm_topk_next_question(h: &Hierarchy, state: &SessionState) -> Result<VertexId, SessionError> {
    if state.budget_remaining() == 0 {
        return Err(SessionError::BudgetExhausted);
    }
    best_row(h, &kbm_topk_gain_all(h, state)).ok_or(SessionError::EmptyPool)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ApproxBounds {
    pub lb: i64,
    pub ub: i64,
    pub gprime: i64,
}

impl ApproxBounds {
    pub fn holds(&self) -> bool {
        self.lb <= self.gprime && self.gprime <= self.ub
    }
}

/// `LB ≤ g′ ≤ UB` with `UB = g` and `LB = g − (k − 1)(f({r}, P) − g)`, where
/// `g` comes from exhaustive enumeration.
pub fn approximation_bounds(h: &Hierarchy, state: &SessionState) -> Result<ApproxBounds, PenaltyError> {
    let (g, _) = brute_force_potential_penalty(h, &state.yes_candidates(), &state.potential_targets(), state.k())?;
    let topk = TopkStructure::build(h, state);
    let g = g as i64;
    let root_cost = topk.root_cost() as i64;
    Ok(ApproxBounds {
        lb: g - (state.k() as i64 - 1) * (root_cost - g),
        ub: g,
        gprime: topk.approx_penalty(),
    })
}
