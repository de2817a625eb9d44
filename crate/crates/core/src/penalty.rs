//! Distance penalties between selections and (potential) targets.
//!
//! Every penalty includes the implicit root fallback: a target no selection
//! reaches is charged its depth, which is its distance from the root.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hierarchy::{Hierarchy, VertexId};

/// Upper bound on subsets the brute-force oracle will enumerate.
pub const ENUMERATION_LIMIT: u64 = 5_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PenaltyError {
    #[error("enumeration of {subsets} subsets exceeds the limit of {limit}")]
    CombinatorialLimit { subsets: u64, limit: u64 },
}

/// At most `capacity` vertices returned as the answer of a session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionSet {
    members: Vec<VertexId>,
    capacity: usize,
}

impl SelectionSet {
    pub fn new(mut members: Vec<VertexId>, capacity: usize) -> Self {
        members.sort_unstable();
        members.dedup();
        assert!(members.len() <= capacity, "selection larger than its capacity");
        SelectionSet { members, capacity }
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// `f⟨v,t⟩`: distance from `v` down to `t`, or the depth of `t` when `v` does
/// not reach it.
pub fn pairwise_penalty(h: &Hierarchy, v: VertexId, t: VertexId) -> u64 {
    h.distance(v, t).unwrap_or_else(|| h.depth(t)) as u64
}

/// Cost of covering one target with the best member of `selection ∪ {root}`.
pub fn cover_cost(h: &Hierarchy, selection: &[VertexId], t: VertexId) -> u64 {
    selection
        .iter()
        .filter_map(|&v| h.distance(v, t))
        .min()
        .unwrap_or(u32::MAX)
        .min(h.depth(t)) as u64
}

/// `f(S, T)`, the summed cover cost over all targets.
pub fn set_penalty(h: &Hierarchy, selection: &[VertexId], targets: &[VertexId]) -> u64 {
    targets.iter().map(|&t| cover_cost(h, selection, t)).sum()
}

/// `g(Y, P, k)` by exhaustive enumeration of all non-empty `S ⊆ Y` with
/// `|S| ≤ k`. Ties go to the lexicographically smallest sorted id sequence.
///
/// Test oracle only; refuses inputs whose enumeration would exceed
/// [`ENUMERATION_LIMIT`].
pub fn brute_force_potential_penalty(
    h: &Hierarchy,
    yes_candidates: &[VertexId],
    potential: &[VertexId],
    k: usize,
) -> Result<(u64, SelectionSet), PenaltyError> {
    let mut pool = yes_candidates.to_vec();
    pool.sort_unstable();
    pool.dedup();
    let m = pool.len();
    let subsets: u64 = (1..=k.min(m)).map(|i| binomial(m as u64, i as u64)).sum();
    if subsets > ENUMERATION_LIMIT {
        return Err(PenaltyError::CombinatorialLimit {
            subsets,
            limit: ENUMERATION_LIMIT,
        });
    }
    if m == 0 {
        return Ok((set_penalty(h, &[], potential), SelectionSet::new(Vec::new(), k)));
    }

    let mut best: Option<(u64, Vec<VertexId>)> = None;
    let mut picked = Vec::with_capacity(k);
    // combinations are generated in lexicographic order within each size, so
    // comparing sequences decides ties across sizes
    for size in 1..=k.min(m) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            picked.clear();
            picked.extend(idx.iter().map(|&i| pool[i]));
            let value = set_penalty(h, &picked, potential);
            let better = match &best {
                None => true,
                Some((bv, bs)) => value < *bv || (value == *bv && picked < *bs),
            };
            if better {
                best = Some((value, picked.clone()));
            }
            if !next_combination(&mut idx, m) {
                break;
            }
        }
    }
    let (value, members) = best.expect("at least one subset");
    Ok((value, SelectionSet::new(members, k)))
}

fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let size = idx.len();
    let mut i = size;
    while i > 0 {
        i -= 1;
        if idx[i] < m - size + i {
            idx[i] += 1;
            for j in i + 1..size {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}
