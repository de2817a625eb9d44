//! Search state shared by every question-selection strategy.
//!
//! The state tracks the potential targets `P`, the Yes-candidates `Y`, the
//! per-vertex target probability and the budget. Answers are applied with the
//! single-target rules (a Yes narrows `P` to the asked subtree and moves the
//! anchor down) or the multi-target rules (a Yes only evicts the strict
//! ancestors of the asked vertex). The root's Yes is implicit and free.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dp::DpTable;
use crate::hierarchy::{Hierarchy, VertexId};
use crate::oracle::Answer;
use crate::penalty::{set_penalty, SelectionSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    Multi,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("k = {k} exceeds the number of vertices {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("vertex {0} is not a potential target outside the Yes-candidates")]
    NotACandidate(VertexId),
    #[error("no budget left")]
    BudgetExhausted,
    #[error("session already terminated")]
    Terminated,
    #[error("no candidate question left")]
    EmptyPool,
    #[error("no question is pending")]
    NoPendingQuestion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub question: VertexId,
    pub answer: Answer,
    pub p_size_after: usize,
    pub y_size_after: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SessionState {
    mode: Mode,
    k: usize,
    budget: usize,
    budget_remaining: usize,
    in_p: Vec<bool>,
    p_count: usize,
    in_y: Vec<bool>,
    y_count: usize,
    /// Deepest Yes vertex; in single mode `Y = {anchor}`.
    anchor: VertexId,
    pr: Vec<f64>,
    /// `|P ∩ des(v)|` for every vertex.
    p_below: Vec<u32>,
    log: Vec<QuestionRecord>,
    terminated: bool,
}

impl SessionState {
    /// Fresh session: `P = V`, `Y = {root}`, uniform prior `k/n` (`1/n` in
    /// single mode, where `k` is forced to 1).
    pub fn new(h: &Hierarchy, mode: Mode, budget: usize, k: usize) -> Result<Self, SessionError> {
        if budget == 0 {
            return Err(SessionError::ZeroBudget);
        }
        if k == 0 {
            return Err(SessionError::ZeroK);
        }
        let n = h.len();
        if k > n {
            return Err(SessionError::KTooLarge { k, n });
        }
        let k = if mode == Mode::Single { 1 } else { k };
        let root = h.root();
        let mut in_y = vec![false; n];
        in_y[root.index()] = true;
        let p_below = h.vertices().map(|v| h.subtree_size(v) as u32).collect();
        let mut state = SessionState {
            mode,
            k,
            budget,
            budget_remaining: budget,
            in_p: vec![true; n],
            p_count: n,
            in_y,
            y_count: 1,
            anchor: root,
            pr: vec![k as f64 / n as f64; n],
            p_below,
            log: Vec::new(),
            terminated: false,
        };
        state.terminated = state.p_within_y();
        Ok(state)
    }

    /// Replace the prior with a uniform value (used by negative controls).
    pub fn set_uniform_prior(&mut self, value: f64) {
        for (p, &alive) in self.pr.iter_mut().zip(&self.in_p) {
            *p = if alive { value } else { 0.0 };
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn budget_remaining(&self) -> usize {
        self.budget_remaining
    }

    pub fn questions_asked(&self) -> usize {
        self.log.len()
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    #[inline]
    pub fn in_p(&self, v: VertexId) -> bool {
        self.in_p[v.index()]
    }

    #[inline]
    pub fn in_y(&self, v: VertexId) -> bool {
        self.in_y[v.index()]
    }

    pub fn p_count(&self) -> usize {
        self.p_count
    }

    pub fn y_count(&self) -> usize {
        self.y_count
    }

    pub fn anchor(&self) -> VertexId {
        self.anchor
    }

    #[inline]
    pub fn pr(&self, v: VertexId) -> f64 {
        self.pr[v.index()]
    }

    #[inline]
    pub fn p_below(&self, v: VertexId) -> u32 {
        self.p_below[v.index()]
    }

    pub fn log(&self) -> &[QuestionRecord] {
        &self.log
    }

    pub fn potential_targets(&self) -> Vec<VertexId> {
        collect_flags(&self.in_p)
    }

    pub fn yes_candidates(&self) -> Vec<VertexId> {
        collect_flags(&self.in_y)
    }

    #[inline]
    pub fn is_candidate(&self, v: VertexId) -> bool {
        self.in_p[v.index()] && !self.in_y[v.index()]
    }

    /// `P ∖ Y` in id order.
    pub fn candidates(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.in_p
            .iter()
            .zip(&self.in_y)
            .enumerate()
            .filter(|(_, (&p, &y))| p && !y)
            .map(|(i, _)| VertexId::new(i))
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates().count()
    }

    fn p_within_y(&self) -> bool {
        self.candidates().next().is_none()
    }

    /// Apply `reach(q) = a` and renormalize the prior.
    pub fn apply_answer(&mut self, h: &Hierarchy, q: VertexId, a: Answer) -> Result<(), SessionError> {
        if self.terminated && self.budget_remaining == 0 {
            return Err(SessionError::BudgetExhausted);
        }
        if self.terminated {
            return Err(SessionError::Terminated);
        }
        if !self.is_candidate(q) {
            return Err(SessionError::NotACandidate(q));
        }
        let p_old = self.p_count;
        match (self.mode, a) {
            (Mode::Single, Answer::Yes) => {
                let (lo, hi) = (h.euler_in(q) as usize, h.euler_out(q) as usize);
                for (pos, &v) in h.preorder().iter().enumerate() {
                    if (pos < lo || pos >= hi) && self.in_p[v.index()] {
                        self.evict(v);
                    }
                }
                self.in_y[self.anchor.index()] = false;
                self.in_y[q.index()] = true;
                self.anchor = q;
            }
            (Mode::Multi, Answer::Yes) => {
                for v in h.ancestors(q) {
                    if v != q && self.in_p[v.index()] {
                        self.evict(v);
                    }
                    if !self.in_y[v.index()] {
                        self.in_y[v.index()] = true;
                        self.y_count += 1;
                    }
                }
                if h.depth(q) > h.depth(self.anchor) {
                    self.anchor = q;
                }
            }
            (_, Answer::No) => {
                for &v in h.subtree_vertices(q) {
                    if self.in_p[v.index()] {
                        self.evict(v);
                    }
                }
            }
        }
        self.refresh_p_below(h);
        self.renormalize(p_old);
        self.budget_remaining -= 1;
        self.log.push(QuestionRecord {
            question: q,
            answer: a,
            p_size_after: self.p_count,
            y_size_after: self.y_count,
        });
        self.terminated = self.p_count == 0 || self.p_within_y() || self.budget_remaining == 0;
        Ok(())
    }

    fn evict(&mut self, v: VertexId) {
        self.in_p[v.index()] = false;
        self.p_count -= 1;
    }

    fn refresh_p_below(&mut self, h: &Hierarchy) {
        for &v in h.preorder().iter().rev() {
            let own = self.in_p[v.index()] as u32;
            let below: u32 = h.children(v).iter().map(|c| self.p_below[c.index()]).sum();
            self.p_below[v.index()] = own + below;
        }
    }

    /// Zero the prior outside `P` and rescale survivors by `|P_old| / |P|`,
    /// clamped at 1.
    pub fn renormalize(&mut self, p_old: usize) {
        if self.p_count == 0 {
            self.pr.iter_mut().for_each(|p| *p = 0.0);
            return;
        }
        let scale = p_old as f64 / self.p_count as f64;
        for (p, &alive) in self.pr.iter_mut().zip(&self.in_p) {
            *p = if alive { (*p * scale).min(1.0) } else { 0.0 };
        }
    }

    /// Best selection over the current state: the anchor in single mode, the
    /// potential-penalty minimizer over `Y` in multi mode.
    pub fn finalize_selection(&self, h: &Hierarchy) -> SelectionSet {
        match self.mode {
            Mode::Single => SelectionSet::new(vec![self.anchor], 1),
            Mode::Multi => DpTable::build(h, self).extract_selection(h, self),
        }
    }

    /// `g(Y, P, k)`: penalty of the best selection against `P`.
    pub fn potential_penalty(&self, h: &Hierarchy) -> u64 {
        match self.mode {
            Mode::Single => set_penalty(h, &[self.anchor], &self.potential_targets()),
            Mode::Multi => DpTable::build(h, self).root_value(),
        }
    }
}

fn collect_flags(flags: &[bool]) -> Vec<VertexId> {
    flags
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(i, _)| VertexId::new(i))
        .collect()
}

/// Rebuild a state by replaying a question log.
pub fn replay(
    h: &Hierarchy,
    mode: Mode,
    budget: usize,
    k: usize,
    steps: &[(VertexId, Answer)],
) -> Result<SessionState, SessionError> {
    let mut state = SessionState::new(h, mode, budget, k)?;
    for &(q, a) in steps {
        state.apply_answer(h, q, a)?;
    }
    Ok(state)
}

#[derive(Debug, Serialize)]
struct LogLine<'a> {
    q: &'a str,
    answer: Answer,
    p_size: usize,
    y_size: usize,
    penalty_so_far: u64,
}

/// JSON-lines export, one record per asked question. `penalty_so_far` is the
/// potential penalty of the best selection after that answer.
pub fn export_log_jsonl(h: &Hierarchy, state: &SessionState) -> String {
    let mut replayed = SessionState::new(h, state.mode, state.budget, state.k)
        .expect("state parameters were valid at creation");
    let mut out = String::new();
    for rec in &state.log {
        replayed
            .apply_answer(h, rec.question, rec.answer)
            .expect("logged answers replay");
        let line = LogLine {
            q: h.key(rec.question),
            answer: rec.answer,
            p_size: rec.p_size_after,
            y_size: rec.y_size_after,
            penalty_so_far: replayed.potential_penalty(h),
        };
        out.push_str(&serde_json::to_string(&line).expect("log line serializes"));
        out.push('\n');
    }
    out
}
