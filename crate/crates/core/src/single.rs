//! STBIS: expected-gain questions for a single hidden target.
//!
//! With anchor `s` (the deepest Yes vertex) every potential target lies in
//! `des(s)`. One bottom-up pass over the P-restricted subtree of `s` yields,
//! for each candidate `v`, the probability mass below `v`, the count
//! `|P̂v| = |P ∩ des(v)|`, and `f({v}, P̂v)` via
//! `f({v}, P̂v) = Σ_c f({c}, P̂c) + |P̂v| − 1`. Then
//! `gYes(v) = f({s}, P) − f({v}, P̂v)` and
//! `gNo(v) = f({v}, P̂v) + dist⟨s,v⟩·|P̂v|`.

use crate::gain::{best_row, GainRow};
use crate::hierarchy::{Hierarchy, VertexId};
use crate::penalty::set_penalty;
use crate::session::{Mode, SessionError, SessionState};

/// Rows for every candidate in `P ∖ {s}`, in pre-order.
pub fn dfs_gain_all(h: &Hierarchy, state: &SessionState) -> Vec<GainRow> {
    dfs_gain_all_counted(h, state).0
}

/// [`dfs_gain_all`] plus the number of vertex visits made.
pub fn dfs_gain_all_counted(h: &Hierarchy, state: &SessionState) -> (Vec<GainRow>, usize) {
    debug_assert_eq!(state.mode(), Mode::Single);
    let s = state.anchor();
    let sub = h.subtree_vertices(s);
    let base = h.euler_in(s) as usize;
    let m = sub.len();
    // indexed by pre-order position relative to s
    let mut p_yes = vec![0.0f64; m];
    let mut size = vec![0u64; m];
    let mut f = vec![0u64; m];
    let mut visits = 0usize;

    for (pos, &v) in sub.iter().enumerate().rev() {
        if state.p_below(v) == 0 {
            continue;
        }
        visits += 1;
        let alive = state.in_p(v);
        let (mut py, mut sz, mut fv) = (if alive { state.pr(v) } else { 0.0 }, alive as u64, 0u64);
        for &c in h.children(v) {
            if state.p_below(c) == 0 {
                continue;
            }
            let ci = h.euler_in(c) as usize - base;
            py += p_yes[ci];
            sz += size[ci];
            fv += f[ci] + size[ci];
        }
        p_yes[pos] = py;
        size[pos] = sz;
        f[pos] = fv;
    }

    let f_s = f[0] as i64;
    let ds = h.depth(s);
    let mut rows = Vec::new();
    for (pos, &v) in sub.iter().enumerate().skip(1) {
        if !state.in_p(v) {
            continue;
        }
        let py = p_yes[pos].min(1.0);
        let g_yes = f_s - f[pos] as i64;
        let g_no = f[pos] as i64 + (h.depth(v) - ds) as i64 * size[pos] as i64;
        rows.push(GainRow::new(v, py, 1.0 - py, g_yes, g_no));
    }
    (rows, visits)
}

/// Direct evaluation of one candidate's row from set penalties. Test oracle
/// for [`dfs_gain_all`].
pub fn naive_gain_single(h: &Hierarchy, state: &SessionState, v: VertexId) -> GainRow {
    let s = state.anchor();
    let p = state.potential_targets();
    let (below, rest): (Vec<VertexId>, Vec<VertexId>) = p.iter().partition(|&&t| h.is_ancestor(v, t));
    let base = set_penalty(h, &[s], &p) as i64;
    let g_yes = base - set_penalty(h, &[v], &below) as i64;
    let g_no = base - set_penalty(h, &[s], &rest) as i64;
    let p_yes: f64 = below.iter().map(|&t| state.pr(t)).sum::<f64>().min(1.0);
    GainRow::new(v, p_yes, 1.0 - p_yes, g_yes, g_no)
}

pub fn stbis_next_question(h: &Hierarchy, state: &SessionState) -> Result<VertexId, SessionError> {
    if state.budget_remaining() == 0 {
        return Err(SessionError::BudgetExhausted);
    }
    best_row(h, &dfs_gain_all(h, state)).ok_or(SessionError::EmptyPool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::toy10;
    use crate::oracle::Answer;

    fn row(h: &Hierarchy, rows: &[GainRow], name: &str) -> GainRow {
        let v = h.lookup(name).unwrap();
        *rows.iter().find(|r| r.vertex == v).unwrap()
    }

    #[test]
    fn first_round_rows() {
        let h = toy10();
        let s = SessionState::new(&h, Mode::Single, 2, 1).unwrap();
        let rows = dfs_gain_all(&h, &s);
        assert_eq!(rows.len(), 9);
        let r3 = row(&h, &rows, "v3");
        assert_eq!((r3.g_yes, r3.g_no), (17, 11));
        assert!((r3.p_yes - 0.4).abs() < 1e-12 && (r3.gain - 13.4).abs() < 1e-9);
        let r1 = row(&h, &rows, "v1");
        assert_eq!((r1.g_yes, r1.g_no), (9, 19));
        assert!((r1.gain - 11.0).abs() < 1e-9);
        let naive = naive_gain_single(&h, &s, h.lookup("v2").unwrap());
        assert_eq!((naive.g_yes, naive.g_no), (20, 1));
        assert_eq!(stbis_next_question(&h, &s).unwrap(), h.lookup("v3").unwrap());
    }

    #[test]
    fn second_round_tie_goes_deeper() {
        let h = toy10();
        let mut s = SessionState::new(&h, Mode::Single, 2, 1).unwrap();
        s.apply_answer(&h, h.lookup("v3").unwrap(), Answer::No).unwrap();
        let rows = dfs_gain_all(&h, &s);
        assert!((row(&h, &rows, "v9").gain - 4.0).abs() < 1e-9);
        assert!((row(&h, &rows, "v1").gain - 6.0).abs() < 1e-9);
        assert!((row(&h, &rows, "v5").gain - 6.0).abs() < 1e-9);
        assert_eq!(stbis_next_question(&h, &s).unwrap(), h.lookup("v5").unwrap());
    }

    #[test]
    fn two_vertex_chain() {
        let h = crate::synth::chain(2);
        let s = SessionState::new(&h, Mode::Single, 1, 1).unwrap();
        assert_eq!(stbis_next_question(&h, &s).unwrap(), VertexId::new(1));
    }
}
