//! kBM-DP: exact potential penalty by tree DP with knapsack child merging.
//!
//! For a vertex `u` whose nearest selected ancestor sits at depth `s`
//! (the root acts as an always-available fallback at depth 0), the table keeps
//!
//! * `dp_no(u, s, j)`: best penalty inside `des(u)` with `u` unselected and at
//!   most `j` selections below it; `u` itself costs `depth(u) − s` when in `P`;
//! * `sel(u, j)`: same with `u` selected, so children see `s = depth(u)`;
//! * `dp(u, s, j)`: the smaller of the two when `u ∈ Y`, else `dp_no`.
//!
//! Children are merged with an at-most-`j` knapsack. Vertices outside `P`
//! remain structural but add no penalty, which keeps `dp(r, 0, k)` meaningful
//! after Yes answers evict the upper part of the tree.
//!
//! Hypothetical answers are evaluated by recomputing only the root path of
//! the asked vertex into scratch buffers; the committed table is never touched.

use crate::gain::{best_row, GainRow};
use crate::hierarchy::{Hierarchy, VertexId};
use crate::penalty::SelectionSet;
use crate::session::{Mode, SessionError, SessionState};

const INF: u32 = u32::MAX / 2;

#[derive(Clone, Debug)]
pub struct DpTable {
    root: VertexId,
    k: usize,
    width: usize,
    offsets: Vec<usize>,
    dp: Vec<u32>,
    dp_no: Vec<u32>,
    sel: Vec<u32>,
}

#[inline]
fn slots(h: &Hierarchy, u: VertexId) -> usize {
    (h.depth(u) as usize).max(1)
}

/// `acc ← acc ⊕ vals`: `acc[j] = min_x acc[j − x] + vals[x]`.
#[inline]
fn merge(acc: &mut [u32], vals: &[u32], scratch: &mut [u32]) {
    let m = acc.len();
    for j in 0..m {
        let mut best = INF;
        for x in 0..=j {
            let v = acc[j - x] + vals[x];
            if v < best {
                best = v;
            }
        }
        scratch[j] = best;
    }
    acc.copy_from_slice(&scratch[..m]);
}

impl DpTable {
    pub fn build(h: &Hierarchy, state: &SessionState) -> Self {
        let k = state.k();
        let width = k + 1;
        let n = h.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for v in h.vertices() {
            offsets.push(total);
            total += slots(h, v) * width;
        }
        offsets.push(total);
        let mut table = DpTable {
            root: h.root(),
            k,
            width,
            offsets,
            dp: vec![0; total],
            dp_no: vec![0; total],
            sel: vec![0; n * width],
        };
        let mut acc = vec![0u32; width];
        let mut scratch = vec![0u32; width];
        for &u in h.preorder().iter().rev() {
            if state.p_below(u) == 0 {
                continue;
            }
            let du = h.depth(u) as usize;
            let own_in_p = state.in_p(u);
            for s in 0..slots(h, u) {
                table.children_merge(h, state, u, s, &mut acc, &mut scratch);
                let own = if own_in_p { (du - s.min(du)) as u32 } else { 0 };
                let base = table.offsets[u.index()] + s * width;
                for (cell, &a) in table.dp_no[base..base + width].iter_mut().zip(&acc) {
                    *cell = a + own;
                }
            }
            table.children_merge(h, state, u, du, &mut acc, &mut scratch);
            let sb = u.index() * width;
            table.sel[sb] = INF;
            table.sel[sb + 1..sb + width].copy_from_slice(&acc[..width - 1]);
            let in_y = state.in_y(u);
            for s in 0..slots(h, u) {
                let base = table.offsets[u.index()] + s * width;
                for j in 0..width {
                    let no = table.dp_no[base + j];
                    table.dp[base + j] = if in_y && j >= 1 { no.min(table.sel[sb + j]) } else { no };
                }
            }
        }
        table
    }

    fn children_merge(
        &self,
        h: &Hierarchy,
        state: &SessionState,
        u: VertexId,
        s: usize,
        acc: &mut [u32],
        scratch: &mut [u32],
    ) {
        acc.iter_mut().for_each(|x| *x = 0);
        for &c in h.children(u) {
            if state.p_below(c) == 0 {
                continue;
            }
            merge(acc, self.dp_at(c, s), scratch);
        }
    }

    #[inline]
    fn dp_at(&self, u: VertexId, s: usize) -> &[u32] {
        let base = self.offsets[u.index()] + s * self.width;
        &self.dp[base..base + self.width]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `dp(u, s, j)` with the nearest selected ancestor at depth `s`.
    pub fn value(&self, u: VertexId, s: usize, j: usize) -> u64 {
        self.dp_at(u, s)[j] as u64
    }

    /// `g(Y, P, k)`.
    pub fn root_value(&self) -> u64 {
        self.value(self.root, 0, self.k)
    }

    /// `g(Y ∪ anc(u), P ∖ (anc(u) ∖ {u}), k)`.
    pub fn calg_yes(&self, h: &Hierarchy, state: &SessionState, u: VertexId) -> u64 {
        self.calg_yes_counted(h, state, u).0
    }

    fn calg_yes_counted(&self, h: &Hierarchy, state: &SessionState, u: VertexId) -> (u64, usize) {
        let w = self.width;
        let mut merges = 0usize;
        let Some(mut a) = h.parent(u) else {
            return (self.root_value(), 0);
        };
        // u joins Y; its own block is otherwise unchanged
        let mut cur = Vec::with_capacity(slots(h, u) * w);
        let sb = u.index() * w;
        for s in 0..slots(h, u) {
            let base = self.offsets[u.index()] + s * w;
            for j in 0..w {
                let no = self.dp_no[base + j];
                cur.push(if j >= 1 { no.min(self.sel[sb + j]) } else { no });
            }
        }
        let mut prev = u;
        let mut next = Vec::new();
        let mut acc = vec![0u32; w];
        let mut scratch = vec![0u32; w];
        loop {
            let da = h.depth(a) as usize;
            let n_slots = slots(h, a);
            next.clear();
            next.resize(n_slots * w, 0);
            let mut sel_row = vec![INF; w];
            for s in 0..=da {
                acc.iter_mut().for_each(|x| *x = 0);
                for &c in h.children(a) {
                    if c == prev {
                        merge(&mut acc, &cur[s * w..(s + 1) * w], &mut scratch);
                    } else if state.p_below(c) > 0 {
                        merge(&mut acc, self.dp_at(c, s), &mut scratch);
                    } else {
                        continue;
                    }
                    merges += 1;
                }
                if s == da {
                    sel_row[1..w].copy_from_slice(&acc[..w - 1]);
                }
                if s < n_slots {
                    // a left P, so no own cost
                    next[s * w..(s + 1) * w].copy_from_slice(&acc);
                }
            }
            for s in 0..n_slots {
                for j in 1..w {
                    let x = &mut next[s * w + j];
                    *x = (*x).min(sel_row[j]);
                }
            }
            std::mem::swap(&mut cur, &mut next);
            match h.parent(a) {
                Some(p) => {
                    prev = a;
                    a = p;
                }
                None => return (cur[self.k] as u64, merges),
            }
        }
    }

    /// `g(Y, P ∖ des(u), k)`.
    pub fn calg_no(&self, h: &Hierarchy, state: &SessionState, u: VertexId) -> u64 {
        self.calg_no_counted(h, state, u).0
    }

    fn calg_no_counted(&self, h: &Hierarchy, state: &SessionState, u: VertexId) -> (u64, usize) {
        let w = self.width;
        let mut merges = 0usize;
        let Some(mut a) = h.parent(u) else {
            return (0, 0);
        };
        // Y is ancestor-closed, so its members on the root path of u occupy
        // depths 0..m and only those slots can be referenced
        let m = h.ancestors(a).filter(|&x| state.in_y(x)).count();
        let mut cur: Vec<u32> = Vec::new();
        let mut next = Vec::new();
        let mut prev = u;
        let mut prev_dead = true;
        let mut acc = vec![0u32; w];
        let mut scratch = vec![0u32; w];
        loop {
            let da = h.depth(a) as usize;
            let n_slots = slots(h, a).min(m);
            let top = (da + 1).min(m);
            let a_in_p = state.in_p(a);
            let a_in_y = state.in_y(a);
            next.clear();
            next.resize(n_slots * w, 0);
            let mut sel_row = vec![INF; w];
            for s in 0..top {
                acc.iter_mut().for_each(|x| *x = 0);
                for &c in h.children(a) {
                    if c == prev {
                        if prev_dead {
                            continue;
                        }
                        merge(&mut acc, &cur[s * w..(s + 1) * w], &mut scratch);
                    } else if state.p_below(c) > 0 {
                        merge(&mut acc, self.dp_at(c, s), &mut scratch);
                    } else {
                        continue;
                    }
                    merges += 1;
                }
                if s == da && a_in_y {
                    sel_row[1..w].copy_from_slice(&acc[..w - 1]);
                }
                if s < n_slots {
                    let own = if a_in_p { (da - s.min(da)) as u32 } else { 0 };
                    for j in 0..w {
                        next[s * w + j] = acc[j] + own;
                    }
                }
            }
            if a_in_y {
                for s in 0..n_slots {
                    for j in 1..w {
                        let x = &mut next[s * w + j];
                        *x = (*x).min(sel_row[j]);
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
            match h.parent(a) {
                Some(p) => {
                    prev = a;
                    prev_dead = false;
                    a = p;
                }
                None => return (cur[self.k] as u64, merges),
            }
        }
    }

    /// Backtrack an optimal selection of at most `k` Yes-candidates. Prefers
    /// leaving a vertex unselected and spending fewer selections on ties.
    /// Falls back to `{root}` when nothing needs selecting.
    pub fn extract_selection(&self, h: &Hierarchy, state: &SessionState) -> SelectionSet {
        let mut out = Vec::new();
        let mut stack = vec![(h.root(), 0usize, self.k)];
        let w = self.width;
        let mut acc = vec![0u32; w];
        let mut scratch = vec![0u32; w];
        while let Some((u, s, j)) = stack.pop() {
            if state.p_below(u) == 0 {
                continue;
            }
            let base = self.offsets[u.index()] + s * w;
            let no = self.dp_no[base + j];
            let yes = if j >= 1 { self.sel[u.index() * w + j] } else { INF };
            let (child_slot, budget) = if state.in_y(u) && yes < no {
                out.push(u);
                (h.depth(u) as usize, j - 1)
            } else {
                (s, j)
            };
            let live: Vec<VertexId> = h.children(u).iter().copied().filter(|&c| state.p_below(c) > 0).collect();
            // prefix knapsack rows, then walk back from the last child
            let mut rows = Vec::with_capacity(live.len() + 1);
            acc.iter_mut().for_each(|x| *x = 0);
            rows.push(acc.clone());
            for &c in &live {
                merge(&mut acc, self.dp_at(c, child_slot), &mut scratch);
                rows.push(acc.clone());
            }
            let mut left = budget;
            for (i, &c) in live.iter().enumerate().rev() {
                let target = rows[i + 1][left];
                let vals = self.dp_at(c, child_slot);
                let x = (0..=left)
                    .find(|&x| rows[i][left - x] + vals[x] == target)
                    .expect("knapsack row is reachable");
                stack.push((c, child_slot, x));
                left -= x;
            }
        }
        if out.is_empty() {
            out.push(h.root());
        }
        SelectionSet::new(out, self.k.max(1))
    }
}

/// `pNo(v) = Π (1 − pr(u))` over `u ∈ des(v) ∩ P`, for every vertex.
pub fn no_probabilities(h: &Hierarchy, state: &SessionState) -> Vec<f64> {
    let mut p_no = vec![1.0f64; h.len()];
    for &v in h.preorder().iter().rev() {
        let mut p = if state.in_p(v) { 1.0 - state.pr(v) } else { 1.0 };
        for &c in h.children(v) {
            p *= p_no[c.index()];
        }
        p_no[v.index()] = p;
    }
    p_no
}

/// One round of exact gains over `P ∖ Y`, plus the number of child merges
/// spent in overlays.
pub fn kbm_dp_gain_all_counted(h: &Hierarchy, state: &SessionState, table: &DpTable) -> (Vec<GainRow>, usize) {
    let g = table.root_value() as i64;
    let p_no = no_probabilities(h, state);
    let mut merges = 0;
    let rows = state
        .candidates()
        .map(|u| {
            let (yes, my) = table.calg_yes_counted(h, state, u);
            let (no, mn) = table.calg_no_counted(h, state, u);
            merges += my + mn;
            let pn = p_no[u.index()];
            GainRow::new(u, 1.0 - pn, pn, g - yes as i64, g - no as i64)
        })
        .collect();
    (rows, merges)
}

pub fn kbm_dp_gain_all(h: &Hierarchy, state: &SessionState, table: &DpTable) -> Vec<GainRow> {
    kbm_dp_gain_all_counted(h, state, table).0
}

/// Exact gain row for one candidate.
pub fn kbm_dp_gain_row(h: &Hierarchy, state: &SessionState, table: &DpTable, p_no: &[f64], u: VertexId) -> GainRow {
    let g = table.root_value() as i64;
    let yes = table.calg_yes(h, state, u) as i64;
    let no = table.calg_no(h, state, u) as i64;
    let pn = p_no[u.index()];
    GainRow::new(u, 1.0 - pn, pn, g - yes, g - no)
}

pub fn kbm_dp_next_question(h: &Hierarchy, state: &SessionState) -> Result<VertexId, SessionError> {
    debug_assert_eq!(state.mode(), Mode::Multi);
    if state.budget_remaining() == 0 {
        return Err(SessionError::BudgetExhausted);
    }
    let table = DpTable::build(h, state);
    best_row(h, &kbm_dp_gain_all(h, state, &table)).ok_or(SessionError::EmptyPool)
}
