//! Session driver: picks questions with the chosen strategy and applies
//! answers from either a simulated oracle or an external caller.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bing::{bing_next_question_multi, bing_next_question_single};
use crate::dp::kbm_dp_next_question;
use crate::dp_plus::{kbm_dp_plus_next_question, precompute_first_round, FirstRoundCache, GainBounds};
use crate::error::Error;
use crate::hierarchy::{Hierarchy, VertexId};
use crate::oracle::{Answer, Oracle};
use crate::penalty::SelectionSet;
use crate::session::{Mode, SessionError, SessionState};
use crate::single::stbis_next_question;
use crate::topk::kbm_topk_next_question;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "stbis")]
    Stbis,
    #[serde(rename = "kbm-dp")]
    KbmDp,
    #[serde(rename = "kbm-topk")]
    KbmTopk,
    #[serde(rename = "kbm-dp-plus")]
    KbmDpPlus,
    #[serde(rename = "bing-single")]
    BingSingle,
    #[serde(rename = "bing-multi")]
    BingMulti,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Stbis,
        Algorithm::KbmDp,
        Algorithm::KbmTopk,
        Algorithm::KbmDpPlus,
        Algorithm::BingSingle,
        Algorithm::BingMulti,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Stbis => "stbis",
            Algorithm::KbmDp => "kbm-dp",
            Algorithm::KbmTopk => "kbm-topk",
            Algorithm::KbmDpPlus => "kbm-dp-plus",
            Algorithm::BingSingle => "bing-single",
            Algorithm::BingMulti => "bing-multi",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Algorithm::Stbis | Algorithm::BingSingle => Mode::Single,
            _ => Mode::Multi,
        }
    }

    /// Like `from_str`, but also accepts plain `bing`, which means the
    /// single-target variant for `k = 1` and the multi-target one otherwise.
    pub fn parse_with_k(name: &str, k: usize) -> Result<Self, String> {
        match name.trim().to_ascii_lowercase().as_str() {
            "bing" if k <= 1 => Ok(Algorithm::BingSingle),
            "bing" => Ok(Algorithm::BingMulti),
            other => other.parse(),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s || (s == "kbm-dp+" && *a == Algorithm::KbmDpPlus))
            .ok_or_else(|| {
                format!(
                    "unknown algorithm '{s}' (expected one of stbis, kbm-dp, kbm-topk, kbm-dp-plus, bing, bing-single, bing-multi)"
                )
            })
    }
}

/// Result of a completed session.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub selection: SelectionSet,
    pub questions: Vec<(VertexId, Answer)>,
}

/// One live search. Questions are computed lazily and stay pending until
/// answered, so a human can take any amount of time to reply.
#[derive(Clone, Debug)]
pub struct Searcher {
    h: Arc<Hierarchy>,
    algo: Algorithm,
    state: SessionState,
    pending: Option<VertexId>,
    bounds: Option<GainBounds>,
    evaluations: Vec<usize>,
}

impl Searcher {
    pub fn new(h: Arc<Hierarchy>, algo: Algorithm, budget: usize, k: usize) -> Result<Self, Error> {
        let state = SessionState::new(&h, algo.mode(), budget, k)?;
        let bounds = if algo == Algorithm::KbmDpPlus && !state.is_terminated() {
            Some(GainBounds::from_cache(&precompute_first_round(&h, state.k())?))
        } else {
            None
        };
        Ok(Searcher {
            h,
            algo,
            state,
            pending: None,
            bounds,
            evaluations: Vec::new(),
        })
    }

    /// kBM-DP+ session seeded from a stored first-round cache.
    pub fn with_cache(h: Arc<Hierarchy>, budget: usize, k: usize, cache: &FirstRoundCache) -> Result<Self, Error> {
        cache.check(&h, k)?;
        let state = SessionState::new(&h, Mode::Multi, budget, k)?;
        Ok(Searcher {
            h,
            algo: Algorithm::KbmDpPlus,
            state,
            pending: None,
            bounds: Some(GainBounds::from_cache(cache)),
            evaluations: Vec::new(),
        })
    }

    pub fn hierarchy(&self) -> &Arc<Hierarchy> {
        &self.h
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algo
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    /// Mutable state access, for priors set before the first question.
    pub fn state_mut(&mut self) -> &mut SessionState {
        &mut self.state
    }

    pub fn pending(&self) -> Option<VertexId> {
        self.pending
    }

    pub fn is_done(&self) -> bool {
        self.state.is_terminated()
    }

    /// Exact gain evaluations per round, recorded for kBM-DP+.
    pub fn evaluations(&self) -> &[usize] {
        &self.evaluations
    }

    /// The question to ask now, or `None` once the session is over.
    pub fn next_question(&mut self) -> Result<Option<VertexId>, SessionError> {
        if self.state.is_terminated() {
            return Ok(None);
        }
        if let Some(q) = self.pending {
            return Ok(Some(q));
        }
        let h = &*self.h;
        let q = match self.algo {
            Algorithm::Stbis => stbis_next_question(h, &self.state)?,
            Algorithm::KbmDp => kbm_dp_next_question(h, &self.state)?,
            Algorithm::KbmTopk => kbm_topk_next_question(h, &self.state)?,
            Algorithm::KbmDpPlus => {
                let bounds = self.bounds.as_mut().expect("kBM-DP+ sessions carry bounds");
                let round = kbm_dp_plus_next_question(h, &self.state, bounds)?;
                self.evaluations.push(round.evaluations());
                round.question
            }
            Algorithm::BingSingle => bing_next_question_single(h, &self.state)?,
            Algorithm::BingMulti => bing_next_question_multi(h, &self.state)?,
        };
        self.pending = Some(q);
        Ok(Some(q))
    }

    /// Answer the pending question.
    pub fn answer(&mut self, a: Answer) -> Result<(), SessionError> {
        let q = self.pending.ok_or(SessionError::NoPendingQuestion)?;
        self.state.apply_answer(&self.h, q, a)?;
        self.pending = None;
        Ok(())
    }

    pub fn finalize(&self) -> SelectionSet {
        self.state.finalize_selection(&self.h)
    }

    /// Ask and answer until the session terminates.
    pub fn run_with<O: Oracle>(&mut self, mut oracle: O) -> Result<Outcome, SessionError> {
        let mut questions = Vec::new();
        while let Some(q) = self.next_question()? {
            let a = oracle.reach(&self.h, q);
            self.answer(a)?;
            questions.push((q, a));
        }
        Ok(Outcome {
            selection: self.finalize(),
            questions,
        })
    }
}
