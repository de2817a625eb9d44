//! In-memory sessions with optional JSON-lines persistence.
//!
//! Layout of a persistence directory:
//! `hierarchies/<id>.json` holds every uploaded tree and
//! `sessions/<session_id>.jsonl` holds a header line followed by one line per
//! accepted answer. Reopening the directory replays each log through the
//! engine, which is deterministic, so restored sessions are exact.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use kbm_igs::dp_plus::{precompute_first_round, FirstRoundCache};
use kbm_igs::{set_penalty, Algorithm, Answer, Format, Hierarchy, Searcher, VertexId};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::ApiError;
use crate::wire::{HierarchyCreated, HistoryItem, Snapshot, Step, VertexView};

#[derive(Debug, Serialize, Deserialize)]
struct LogHeader {
    session_id: String,
    hierarchy_id: String,
    algo: Algorithm,
    b: usize,
    k: usize,
    created_at: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct LogStep {
    token: String,
    vertex: String,
    answer: Answer,
}

struct Session {
    id: String,
    hierarchy_id: String,
    algo: Algorithm,
    b: usize,
    k: usize,
    created_at: u64,
    searcher: Searcher,
    /// Reply already given per used token, for idempotent resubmission.
    replies: HashMap<String, (Answer, Step)>,
    log_path: Option<PathBuf>,
}

impl Session {
    /// Tokens name the question by its position, so they survive a restart.
    fn token(&self) -> Option<String> {
        self.searcher
            .pending()
            .map(|_| format!("{}-{}", self.id, self.searcher.state().questions_asked()))
    }

    fn advance(&mut self) -> Result<(), ApiError> {
        self.searcher
            .next_question()
            .map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(())
    }

    fn selections(&self) -> (Vec<VertexId>, u64) {
        let h = self.searcher.hierarchy();
        let mut sel = self.searcher.finalize().members().to_vec();
        if sel.is_empty() {
            sel.push(h.root());
        }
        let penalty = set_penalty(h, &sel, &self.searcher.state().potential_targets());
        (sel, penalty)
    }

    fn step(&self) -> Step {
        let h = self.searcher.hierarchy();
        let state = self.searcher.state();
        let terminated = self.searcher.pending().is_none();
        let (selections, penalty) = if terminated {
            let (sel, pen) = self.selections();
            (Some(sel.into_iter().map(|v| VertexView::new(h, v)).collect()), Some(pen))
        } else {
            (None, None)
        };
        Step {
            session_id: self.id.clone(),
            question: self.searcher.pending().map(|q| VertexView::new(h, q)),
            token: self.token(),
            budget_remaining: state.budget_remaining(),
            terminated,
            selections,
            penalty_vs_potential: penalty,
        }
    }

    fn snapshot(&self) -> Snapshot {
        let h = self.searcher.hierarchy();
        let state = self.searcher.state();
        let (sel, penalty) = self.selections();
        Snapshot {
            session_id: self.id.clone(),
            hierarchy_id: self.hierarchy_id.clone(),
            algo: self.algo.name().to_string(),
            b: self.b,
            k: self.k,
            created_at: self.created_at,
            p_size: state.p_count(),
            y_labels: state.yes_candidates().into_iter().map(|v| h.label(v).to_string()).collect(),
            budget_remaining: state.budget_remaining(),
            history: state
                .log()
                .iter()
                .map(|r| HistoryItem {
                    vertex: h.key(r.question).to_string(),
                    label: h.label(r.question).to_string(),
                    answer: r.answer.into(),
                })
                .collect(),
            question: self.searcher.pending().map(|q| VertexView::new(h, q)),
            token: self.token(),
            terminated: self.searcher.pending().is_none(),
            selections: sel.into_iter().map(|v| VertexView::new(h, v)).collect(),
            penalty_vs_potential: penalty,
        }
    }

    fn submit(&mut self, answer: Answer, token: &str) -> Result<Step, ApiError> {
        if let Some((prior, reply)) = self.replies.get(token) {
            if *prior == answer {
                return Ok(reply.clone());
            }
            return Err(ApiError::conflict(
                "token_used",
                format!("token '{token}' was already answered {prior}"),
            ));
        }
        let Some(current) = self.token() else {
            return Err(ApiError::conflict("session_over", "the session has no pending question"));
        };
        if current != token {
            return Err(ApiError::conflict(
                "stale_token",
                format!("token '{token}' does not match the pending question"),
            ));
        }
        let q = self.searcher.pending().expect("a token implies a pending question");
        if let Some(path) = &self.log_path {
            let line = LogStep {
                token: token.to_string(),
                vertex: self.searcher.hierarchy().key(q).to_string(),
                answer,
            };
            append_line(path, &line)?;
        }
        self.searcher
            .answer(answer)
            .map_err(|e| ApiError::conflict("session_over", e.to_string()))?;
        self.advance()?;
        let reply = self.step();
        self.replies.insert(token.to_string(), (answer, reply.clone()));
        Ok(reply)
    }
}

fn append_line<T: Serialize>(path: &Path, value: &T) -> Result<(), ApiError> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))?;
    let mut line = serde_json::to_string(value).map_err(|e| ApiError::internal(e.to_string()))?;
    line.push('\n');
    file.write_all(line.as_bytes())
        .map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Shared service state. Each session sits behind its own mutex so distinct
/// sessions progress in parallel while one session's answers are serialized.
#[derive(Default)]
pub struct Store {
    hierarchies: RwLock<HashMap<String, Arc<Hierarchy>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    caches: Mutex<HashMap<(String, usize), Arc<FirstRoundCache>>>,
    dir: Option<PathBuf>,
}

impl Store {
    pub fn in_memory() -> Self {
        Store::default()
    }

    /// Persist to `dir`, first restoring whatever it already holds.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ApiError> {
        let dir = dir.into();
        let io = |e: std::io::Error| ApiError::internal(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir.join("hierarchies")).map_err(io)?;
        fs::create_dir_all(dir.join("sessions")).map_err(io)?;
        let store = Store {
            dir: Some(dir.clone()),
            ..Store::default()
        };
        for entry in fs::read_dir(dir.join("hierarchies")).map_err(io)? {
            let path = entry.map_err(io)?.path();
            let h = Hierarchy::load_path(&path).map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))?;
            store.insert_hierarchy(h);
        }
        for entry in fs::read_dir(dir.join("sessions")).map_err(io)? {
            let path = entry.map_err(io)?.path();
            store.restore_session(&path)?;
        }
        Ok(store)
    }

    fn insert_hierarchy(&self, h: Hierarchy) -> (String, Arc<Hierarchy>) {
        let id = h.content_hash()[..16].to_string();
        let mut map = self.hierarchies.write().expect("hierarchy map lock");
        let h = map.entry(id.clone()).or_insert_with(|| Arc::new(h)).clone();
        (id, h)
    }

    /// Register a tree. Identical trees share one id.
    pub fn add_hierarchy(&self, h: Hierarchy) -> Result<HierarchyCreated, ApiError> {
        let (id, h) = self.insert_hierarchy(h);
        if let Some(dir) = &self.dir {
            let path = dir.join("hierarchies").join(format!("{id}.json"));
            if !path.exists() {
                fs::write(&path, h.to_json()).map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))?;
            }
        }
        Ok(HierarchyCreated {
            hierarchy_id: id,
            vertices: h.len(),
            height: h.height(),
        })
    }

    /// Parse an uploaded body as JSON or as an edge list.
    pub fn upload(&self, body: &str, format: Format) -> Result<HierarchyCreated, ApiError> {
        let h = Hierarchy::load(body.as_bytes(), format).map_err(|e| ApiError::bad_request(e.to_string()))?;
        self.add_hierarchy(h)
    }

    fn hierarchy(&self, id: &str) -> Result<Arc<Hierarchy>, ApiError> {
        self.hierarchies
            .read()
            .expect("hierarchy map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("hierarchy", id))
    }

    fn searcher(&self, hid: &str, h: Arc<Hierarchy>, algo: Algorithm, b: usize, k: usize) -> Result<Searcher, ApiError> {
        let invalid = |e: kbm_igs::Error| ApiError::bad_request(e.to_string());
        if algo != Algorithm::KbmDpPlus || k == 0 || b == 0 || k > h.len() {
            return Searcher::new(h, algo, b, k).map_err(invalid);
        }
        let cache = {
            let mut caches = self.caches.lock().expect("cache lock");
            match caches.get(&(hid.to_string(), k)) {
                Some(c) => c.clone(),
                None => {
                    let c = Arc::new(precompute_first_round(&h, k).map_err(|e| ApiError::bad_request(e.to_string()))?);
                    caches.insert((hid.to_string(), k), c.clone());
                    c
                }
            }
        };
        Searcher::with_cache(h, b, k, &cache).map_err(invalid)
    }

    pub fn create_session(&self, hierarchy_id: &str, algo: &str, b: usize, k: usize) -> Result<Step, ApiError> {
        let h = self.hierarchy(hierarchy_id)?;
        let algo = Algorithm::parse_with_k(algo, k).map_err(ApiError::bad_request)?;
        let k = if algo == Algorithm::Stbis || algo == Algorithm::BingSingle { 1 } else { k };
        let searcher = self.searcher(hierarchy_id, h, algo, b, k)?;
        let id = Uuid::new_v4().simple().to_string();
        let log_path = self.dir.as_ref().map(|d| d.join("sessions").join(format!("{id}.jsonl")));
        let mut session = Session {
            id: id.clone(),
            hierarchy_id: hierarchy_id.to_string(),
            algo,
            b,
            k,
            created_at: now(),
            searcher,
            replies: HashMap::new(),
            log_path,
        };
        if let Some(path) = &session.log_path {
            append_line(
                path,
                &LogHeader {
                    session_id: id.clone(),
                    hierarchy_id: hierarchy_id.to_string(),
                    algo,
                    b,
                    k,
                    created_at: session.created_at,
                },
            )?;
        }
        session.advance()?;
        let step = session.step();
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(step)
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    pub fn submit_answer(&self, id: &str, answer: Answer, token: &str) -> Result<Step, ApiError> {
        let session = self.session(id)?;
        let mut guard = session.lock().map_err(|_| ApiError::internal("session lock poisoned"))?;
        guard.submit(answer, token)
    }

    pub fn snapshot(&self, id: &str) -> Result<Snapshot, ApiError> {
        let session = self.session(id)?;
        let guard = session.lock().map_err(|_| ApiError::internal("session lock poisoned"))?;
        Ok(guard.snapshot())
    }

    /// The answered (question, answer) pairs of a session, in order.
    pub fn history(&self, id: &str) -> Result<Vec<(VertexId, Answer)>, ApiError> {
        let session = self.session(id)?;
        let guard = session.lock().map_err(|_| ApiError::internal("session lock poisoned"))?;
        Ok(guard.searcher.state().log().iter().map(|r| (r.question, r.answer)).collect())
    }

    fn restore_session(&self, path: &Path) -> Result<(), ApiError> {
        let bad = |msg: String| ApiError::internal(format!("{}: {msg}", path.display()));
        let text = fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: LogHeader = serde_json::from_str(lines.next().ok_or_else(|| bad("empty log".into()))?)
            .map_err(|e| bad(e.to_string()))?;
        let h = self.hierarchy(&header.hierarchy_id)?;
        let searcher = self.searcher(&header.hierarchy_id, h.clone(), header.algo, header.b, header.k)?;
        let mut session = Session {
            id: header.session_id.clone(),
            hierarchy_id: header.hierarchy_id,
            algo: header.algo,
            b: header.b,
            k: header.k,
            created_at: header.created_at,
            searcher,
            replies: HashMap::new(),
            log_path: Some(path.to_path_buf()),
        };
        session.advance()?;
        for line in lines {
            let step: LogStep = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            let asked = session.searcher.pending().map(|q| h.key(q).to_string());
            if asked.as_deref() != Some(step.vertex.as_str()) {
                return Err(bad(format!("log asks '{}' where the engine asks {asked:?}", step.vertex)));
            }
            session.searcher.answer(step.answer).map_err(|e| bad(e.to_string()))?;
            session.advance()?;
            let reply = session.step();
            session.replies.insert(step.token, (step.answer, reply));
        }
        self.sessions
            .write()
            .expect("session map lock")
            .insert(header.session_id, Arc::new(Mutex::new(session)));
        Ok(())
    }
}
