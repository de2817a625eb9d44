#![allow(dead_code)]

use kbm_igs::oracle::truthful_answer;
use kbm_igs::synth::{gen_random_tree, sample_targets};
use kbm_igs::{Answer, Hierarchy, Mode, SessionState, TargetSet, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random instance: tree, hidden targets and `k`.
pub struct Instance {
    pub h: Hierarchy,
    pub targets: TargetSet,
    pub k: usize,
}

pub fn instance(seed: u64, max_n: usize, max_k: usize, mode: Mode) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n);
    let degree = rng.gen_range(2..=4);
    let h = gen_random_tree(n, degree, seed).unwrap();
    let leaves = h.leaves().count();
    let count = match mode {
        Mode::Single => 1..=1,
        Mode::Multi => 1..=leaves.min(max_k),
    };
    let targets = sample_targets(&h, count, seed ^ 0xA5A5).unwrap();
    let k = rng.gen_range(1..=max_k.min(n));
    Instance { h, targets, k }
}

/// Every state reached by asking uniformly random candidates with truthful
/// answers until termination, starting state included.
pub fn random_walk(inst: &Instance, mode: Mode, seed: u64) -> Vec<SessionState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = inst.h.len();
    let mut s = SessionState::new(&inst.h, mode, n + 1, inst.k).unwrap();
    let mut out = vec![s.clone()];
    while !s.is_terminated() {
        let cands: Vec<VertexId> = s.candidates().collect();
        let q = cands[rng.gen_range(0..cands.len())];
        let a = if rng.gen_bool(0.15) {
            // occasionally ask along a random answer to cover states a
            // truthful oracle would not reach
            Answer::from_bool(rng.gen_bool(0.5))
        } else {
            truthful_answer(&inst.h, &inst.targets, q)
        };
        s.apply_answer(&inst.h, q, a).unwrap();
        out.push(s.clone());
    }
    out
}

/// The state after answering `q` with `a`, on a copy.
pub fn after(h: &Hierarchy, s: &SessionState, q: VertexId, a: Answer) -> SessionState {
    let mut next = s.clone();
    next.apply_answer(h, q, a).unwrap();
    next
}
