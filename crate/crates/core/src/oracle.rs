//! Answer sources for `reach(q)`.
//!
//! Simulated oracles answer from a hidden [`TargetSet`]. A live human is not an
//! `Oracle` implementation: the [`crate::engine::Searcher`] keeps the asked
//! question pending until a driver (terminal prompt, HTTP handler) submits the
//! answer.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hierarchy::{Hierarchy, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn from_bool(yes: bool) -> Self {
        if yes {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Answer::Yes
    }

    pub fn flipped(self) -> Self {
        Answer::from_bool(!self.is_yes())
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(if self.is_yes() { "Yes" } else { "No" })
    }
}

impl FromStr for Answer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "y" | "yes" | "true" => Ok(Answer::Yes),
            "n" | "no" | "false" => Ok(Answer::No),
            other => Err(format!("expected yes or no, got '{other}'")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TargetError {
    #[error("target set is empty")]
    Empty,
    #[error("targets '{0}' and '{1}' are ancestor-related")]
    Dependent(String, String),
    #[error("unknown target label '{0}'")]
    UnknownLabel(String),
    #[error("invalid target file: {0}")]
    Parse(String),
}

/// Hidden ground truth: non-empty and pairwise non-reachable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSet {
    members: Vec<VertexId>,
}

impl TargetSet {
    pub fn new(h: &Hierarchy, mut members: Vec<VertexId>) -> Result<Self, TargetError> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(TargetError::Empty);
        }
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                if h.is_ancestor(a, b) || h.is_ancestor(b, a) {
                    return Err(TargetError::Dependent(h.key(a).into(), h.key(b).into()));
                }
            }
        }
        Ok(TargetSet { members })
    }

    pub fn from_labels<S: AsRef<str>>(h: &Hierarchy, labels: &[S]) -> Result<Self, TargetError> {
        let ids = labels
            .iter()
            .map(|l| {
                h.lookup(l.as_ref())
                    .ok_or_else(|| TargetError::UnknownLabel(l.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(h, ids)
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Parse a target file: a JSON array holding one array of labels per query object.
pub fn parse_target_file(h: &Hierarchy, text: &str) -> Result<Vec<TargetSet>, TargetError> {
    let raw: Vec<Vec<String>> =
        serde_json::from_str(text).map_err(|e| TargetError::Parse(e.to_string()))?;
    raw.iter().map(|labels| TargetSet::from_labels(h, labels)).collect()
}

pub fn write_target_file(h: &Hierarchy, objects: &[TargetSet]) -> String {
    let raw: Vec<Vec<&str>> = objects
        .iter()
        .map(|t| t.members().iter().map(|&v| h.key(v)).collect())
        .collect();
    serde_json::to_string_pretty(&raw).expect("target file serializes")
}

/// True iff no two distinct members are ancestor-related.
pub fn validate_independence(h: &Hierarchy, members: &[VertexId]) -> bool {
    members.iter().enumerate().all(|(i, &a)| {
        members[i + 1..]
            .iter()
            .all(|&b| a == b || !(h.is_ancestor(a, b) || h.is_ancestor(b, a)))
    })
}

/// Yes iff the subtree of `q` holds a target.
pub fn truthful_answer(h: &Hierarchy, targets: &TargetSet, q: VertexId) -> Answer {
    Answer::from_bool(targets.members().iter().any(|&t| h.is_ancestor(q, t)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyOracleConfig {
    /// Share of query objects flagged difficult.
    pub difficult_fraction: f64,
    /// Chance that one answer about a difficult object is wrong.
    pub wrong_probability: f64,
    pub rng_seed: u64,
}

impl NoisyOracleConfig {
    pub fn new(difficult_fraction: f64, wrong_probability: f64, rng_seed: u64) -> Result<Self, String> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        if !ok(difficult_fraction) || !ok(wrong_probability) {
            return Err(format!(
                "noise probabilities must lie in [0, 1], got {difficult_fraction} and {wrong_probability}"
            ));
        }
        Ok(NoisyOracleConfig {
            difficult_fraction,
            wrong_probability,
            rng_seed,
        })
    }
}

/// Truthful answer, flipped with `cfg.wrong_probability` when the object is
/// difficult. Easy objects never consume randomness.
pub fn noisy_answer<R: Rng>(
    h: &Hierarchy,
    targets: &TargetSet,
    q: VertexId,
    cfg: &NoisyOracleConfig,
    is_difficult: bool,
    rng: &mut R,
) -> Answer {
    let truth = truthful_answer(h, targets, q);
    if is_difficult && rng.gen_bool(cfg.wrong_probability) {
        truth.flipped()
    } else {
        truth
    }
}

pub trait Oracle {
    fn reach(&mut self, h: &Hierarchy, q: VertexId) -> Answer;
}

#[derive(Clone, Debug)]
pub struct TruthfulOracle {
    targets: TargetSet,
}

impl TruthfulOracle {
    pub fn new(targets: TargetSet) -> Self {
        TruthfulOracle { targets }
    }
}

impl Oracle for TruthfulOracle {
    fn reach(&mut self, h: &Hierarchy, q: VertexId) -> Answer {
        truthful_answer(h, &self.targets, q)
    }
}

#[derive(Clone, Debug)]
pub struct NoisyOracle {
    targets: TargetSet,
    cfg: NoisyOracleConfig,
    difficult: bool,
    rng: ChaCha8Rng,
    flips: usize,
}

impl NoisyOracle {
    /// `stream` separates the random streams of different query objects that
    /// share one config seed.
    pub fn new(targets: TargetSet, cfg: NoisyOracleConfig, difficult: bool, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        rng.set_stream(stream);
        NoisyOracle {
            targets,
            cfg,
            difficult,
            rng,
            flips: 0,
        }
    }

    /// Number of answers that differed from the truth so far.
    pub fn flips(&self) -> usize {
        self.flips
    }
}

impl Oracle for NoisyOracle {
    fn reach(&mut self, h: &Hierarchy, q: VertexId) -> Answer {
        let given = noisy_answer(h, &self.targets, q, &self.cfg, self.difficult, &mut self.rng);
        if given != truthful_answer(h, &self.targets, q) {
            self.flips += 1;
        }
        given
    }
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn reach(&mut self, h: &Hierarchy, q: VertexId) -> Answer {
        (**self).reach(h, q)
    }
}
