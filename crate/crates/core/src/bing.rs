//! BinG baselines: ask the vertex that prunes the most potential targets in
//! the worst case over both answers. No probabilities involved.

use crate::gain::best_of;
use crate::hierarchy::{Hierarchy, VertexId};
use crate::session::{SessionError, SessionState};

/// Guaranteed pruning under the single-target rules: a Yes keeps only
/// `P ∩ des(v)`, a No drops it.
pub fn bing_score_single(state: &SessionState, v: VertexId) -> usize {
    let below = state.p_below(v) as usize;
    below.min(state.p_count() - below)
}

/// `|P ∩ anc(v)|` for every vertex.
pub fn p_above(h: &Hierarchy, state: &SessionState) -> Vec<u32> {
    let mut out = vec![0u32; h.len()];
    for &v in h.preorder() {
        let up = h.parent(v).map_or(0, |p| out[p.index()]);
        out[v.index()] = up + state.in_p(v) as u32;
    }
    out
}

pub fn bing_next_question_single(h: &Hierarchy, state: &SessionState) -> Result<VertexId, SessionError> {
    if state.budget_remaining() == 0 {
        return Err(SessionError::BudgetExhausted);
    }
    best_of(h, state.candidates().map(|v| (v, bing_score_single(state, v) as f64))).ok_or(SessionError::EmptyPool)
}

/// Multi-target variant: a Yes only prunes the strict ancestors in `P`.
pub fn bing_next_question_multi(h: &Hierarchy, state: &SessionState) -> Result<VertexId, SessionError> {
    if state.budget_remaining() == 0 {
        return Err(SessionError::BudgetExhausted);
    }
    let above = p_above(h, state);
    best_of(
        h,
        state.candidates().map(|v| {
            let up = above[v.index()] as usize - state.in_p(v) as usize;
            (v, up.min(state.p_below(v) as usize) as f64)
        }),
    )
    .ok_or(SessionError::EmptyPool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{truthful_answer, TargetSet};
    use crate::session::Mode;
    use crate::synth::star;

    #[test]
    fn star_needs_n_minus_one_questions_for_root_target() {
        let h = star(8);
        let t = TargetSet::new(&h, vec![h.root()]).unwrap();
        let mut s = SessionState::new(&h, Mode::Single, 50, 1).unwrap();
        while !s.is_terminated() {
            let q = bing_next_question_single(&h, &s).unwrap();
            assert_eq!(bing_score_single(&s, q), 1);
            s.apply_answer(&h, q, truthful_answer(&h, &t, q)).unwrap();
        }
        assert_eq!(s.questions_asked(), 7);
        assert_eq!(s.potential_targets(), vec![h.root()]);
    }

    #[test]
    fn balanced_binary_first_question_splits() {
        let parents = vec![None, Some(0), Some(0), Some(1), Some(1), Some(2), Some(2)];
        let keys: Vec<String> = (0..7).map(|i| format!("v{i}")).collect();
        let h = Hierarchy::from_parents(keys.clone(), keys, parents).unwrap();
        let s = SessionState::new(&h, Mode::Single, 5, 1).unwrap();
        let q = bing_next_question_single(&h, &s).unwrap();
        assert_eq!(h.parent(q), Some(h.root()));
    }

    #[test]
    fn chain_multi_balances_path() {
        let h = crate::synth::chain(9);
        let s = SessionState::new(&h, Mode::Multi, 5, 1).unwrap();
        let q = bing_next_question_multi(&h, &s).unwrap();
        // v4 has 4 vertices above and 5 below, v5 has 5 above and 4 below; deeper wins
        assert_eq!(h.key(q), "v5");
    }

    #[test]
    fn empty_pool_is_an_error() {
        let h = crate::synth::chain(1);
        let s = SessionState::new(&h, Mode::Multi, 5, 1).unwrap();
        assert_eq!(bing_next_question_multi(&h, &s), Err(SessionError::EmptyPool));
    }
}
