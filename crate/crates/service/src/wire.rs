//! JSON bodies of the HTTP API.

use kbm_igs::{Answer, Hierarchy, VertexId};
use serde::{Deserialize, Serialize};

/// A vertex with its root path labels, for showing context with a question.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexView {
    pub vertex: String,
    pub label: String,
    pub path: Vec<String>,
}

impl VertexView {
    pub fn new(h: &Hierarchy, v: VertexId) -> Self {
        VertexView {
            vertex: h.key(v).to_string(),
            label: h.label(v).to_string(),
            path: h.root_path(v).into_iter().map(|u| h.label(u).to_string()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WireAnswer {
    Yes,
    No,
}

impl From<WireAnswer> for Answer {
    fn from(a: WireAnswer) -> Self {
        match a {
            WireAnswer::Yes => Answer::Yes,
            WireAnswer::No => Answer::No,
        }
    }
}

impl From<Answer> for WireAnswer {
    fn from(a: Answer) -> Self {
        if a.is_yes() {
            WireAnswer::Yes
        } else {
            WireAnswer::No
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HierarchyCreated {
    pub hierarchy_id: String,
    pub vertices: usize,
    pub height: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CreateSession {
    pub hierarchy_id: String,
    pub algo: String,
    pub b: usize,
    #[serde(default = "one")]
    pub k: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubmitAnswer {
    pub answer: WireAnswer,
    pub token: String,
}

/// Reply to session creation and to every answer: either the next question
/// with its token, or the final selections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub session_id: String,
    pub question: Option<VertexView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<String>,
    pub budget_remaining: usize,
    pub terminated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selections: Option<Vec<VertexView>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty_vs_potential: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryItem {
    pub vertex: String,
    pub label: String,
    pub answer: WireAnswer,
}

/// Read-only view of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub session_id: String,
    pub hierarchy_id: String,
    pub algo: String,
    pub b: usize,
    pub k: usize,
    pub created_at: u64,
    pub p_size: usize,
    pub y_labels: Vec<String>,
    pub budget_remaining: usize,
    pub history: Vec<HistoryItem>,
    pub question: Option<VertexView>,
    pub token: Option<String>,
    pub terminated: bool,
    pub selections: Vec<VertexView>,
    pub penalty_vs_potential: u64,
}
