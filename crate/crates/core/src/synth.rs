//! Synthetic hierarchies and query objects, deterministic per seed.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hierarchy::{Hierarchy, VertexId};
use crate::oracle::TargetSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("tree needs at least one vertex")]
    Empty,
    #[error("max out-degree 0 cannot hold {0} vertices")]
    InfeasibleDegree(usize),
    #[error("cannot place {wanted} independent targets in a tree with {leaves} leaves")]
    InfeasibleTargets { wanted: usize, leaves: usize },
    #[error("empty target count range")]
    EmptyRange,
}

/// Random tree of `n` vertices where each new vertex attaches to a uniformly
/// chosen earlier vertex whose out-degree is still below `max_degree`.
/// Vertex `i` is labelled `v{i}`; `v0` is the root.
pub fn gen_random_tree(n: usize, max_degree: usize, seed: u64) -> Result<Hierarchy, SynthError> {
    if n == 0 {
        return Err(SynthError::Empty);
    }
    if max_degree == 0 && n > 1 {
        return Err(SynthError::InfeasibleDegree(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parents = Vec::with_capacity(n);
    parents.push(None);
    let mut degree = vec![0usize; n];
    let mut open = vec![0usize];
    for i in 1..n {
        let slot = rng.gen_range(0..open.len());
        let p = open[slot];
        parents.push(Some(p));
        degree[p] += 1;
        if degree[p] == max_degree {
            open.swap_remove(slot);
        }
        open.push(i);
    }
    let keys: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    Ok(Hierarchy::from_parents(keys.clone(), keys, parents).expect("generated parents form a tree"))
}

/// One query object: a target count drawn from `count`, then vertices taken in
/// shuffled order whenever they are unrelated to every vertex kept so far.
/// Falls back to shuffled leaves, which are always pairwise independent.
pub fn sample_targets(h: &Hierarchy, count: RangeInclusive<usize>, seed: u64) -> Result<TargetSet, SynthError> {
    let (lo, hi) = (*count.start(), *count.end());
    if lo > hi || hi == 0 {
        return Err(SynthError::EmptyRange);
    }
    let leaves = h.leaves().count();
    let lo = lo.max(1);
    if lo > leaves {
        return Err(SynthError::InfeasibleTargets { wanted: lo, leaves });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wanted = rng.gen_range(lo..=hi.min(leaves));

    let mut order: Vec<VertexId> = h.vertices().collect();
    order.shuffle(&mut rng);
    let mut picked: Vec<VertexId> = Vec::with_capacity(wanted);
    for v in order {
        if picked.iter().all(|&p| !h.is_ancestor(p, v) && !h.is_ancestor(v, p)) {
            picked.push(v);
            if picked.len() == wanted {
                break;
            }
        }
    }
    if picked.len() < wanted {
        let mut leaf_ids: Vec<VertexId> = h.leaves().collect();
        leaf_ids.shuffle(&mut rng);
        leaf_ids.truncate(wanted);
        picked = leaf_ids;
    }
    Ok(TargetSet::new(h, picked).expect("picked vertices are independent"))
}

/// `count` query objects with per-object seeds derived from `seed`.
pub fn sample_objects(
    h: &Hierarchy,
    objects: usize,
    count: RangeInclusive<usize>,
    seed: u64,
) -> Result<Vec<TargetSet>, SynthError> {
    (0..objects as u64)
        .map(|i| sample_targets(h, count.clone(), seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i)))
        .collect()
}

/// Root with `n - 1` leaf children.
pub fn star(n: usize) -> Hierarchy {
    let parents = (0..n).map(|i| if i == 0 { None } else { Some(0) }).collect();
    let keys: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    Hierarchy::from_parents(keys.clone(), keys, parents).expect("star is a tree")
}

/// Path `v0 → v1 → … → v{n-1}`.
pub fn chain(n: usize) -> Hierarchy {
    let parents = (0..n).map(|i| i.checked_sub(1)).collect();
    let keys: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    Hierarchy::from_parents(keys.clone(), keys, parents).expect("chain is a tree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::validate_independence;

    #[test]
    fn single_vertex_tree() {
        let h = gen_random_tree(1, 3, 0).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.height(), 0);
        assert_eq!(gen_random_tree(0, 3, 0).unwrap_err(), SynthError::Empty);
        assert_eq!(gen_random_tree(2, 0, 0).unwrap_err(), SynthError::InfeasibleDegree(2));
    }

    #[test]
    fn deterministic_and_degree_bounded() {
        let a = gen_random_tree(1000, 5, 42).unwrap();
        let b = gen_random_tree(1000, 5, 42).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        assert_ne!(a.content_hash(), gen_random_tree(1000, 5, 43).unwrap().content_hash());
        assert!(a.vertices().all(|v| a.children(v).len() <= 5));
    }

    #[test]
    fn targets_on_special_shapes() {
        let c = chain(6);
        assert_eq!(sample_targets(&c, 1..=1, 3).unwrap().len(), 1);
        assert_eq!(
            sample_targets(&c, 2..=2, 3).unwrap_err(),
            SynthError::InfeasibleTargets { wanted: 2, leaves: 1 }
        );
        let s = star(8);
        let t = sample_targets(&s, 2..=2, 9).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.members().iter().all(|&v| v != s.root()));
    }

    #[test]
    fn sampled_targets_are_independent() {
        for seed in 0..100 {
            let h = gen_random_tree(60, 4, seed).unwrap();
            let t = sample_targets(&h, 1..=5, seed).unwrap();
            assert!((1..=5).contains(&t.len()));
            assert!(validate_independence(&h, t.members()));
        }
    }
}
