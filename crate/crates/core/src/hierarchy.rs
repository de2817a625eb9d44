//! Rooted label hierarchy with constant-time reachability tests.
//!
//! Vertices get dense ids in the order they first appear in the input. One
//! pre-order traversal at load time assigns every vertex a half-open interval
//! `[euler_in, euler_out)` covering exactly its subtree, so `u → v` reduces to
//! two integer comparisons.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Dense vertex index in `0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(u32);

impl VertexId {
    pub fn new(index: usize) -> Self {
        VertexId(u32::try_from(index).expect("vertex index exceeds u32"))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("empty input: no vertices")]
    Empty,
    #[error("cycle detected through vertex '{0}'")]
    Cycle(String),
    #[error("multiple roots: '{0}' and '{1}' both have no parent")]
    MultipleRoots(String, String),
    #[error("duplicate parent: '{child}' has parents '{first}' and '{second}'")]
    DuplicateParent {
        child: String,
        first: String,
        second: String,
    },
    #[error("dangling vertex reference '{reference}' from '{from}'")]
    DanglingReference { from: String, reference: String },
    #[error("duplicate vertex id '{0}'")]
    DuplicateVertex(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Input format accepted by [`Hierarchy::load`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// `parent<TAB>child` per line; a line holding a single label declares a vertex.
    EdgeList,
    /// `{"nodes":[{"id":..,"label":..,"parent":..|null}]}`
    Json,
}

impl Format {
    /// Guess the format from a file extension, defaulting to the edge list.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::EdgeList,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonDoc {
    nodes: Vec<JsonNode>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonNode {
    id: String,
    #[serde(default)]
    label: Option<String>,
    parent: Option<String>,
}

/// Immutable rooted tree. Safe to share across threads.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    root: VertexId,
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    depth: Vec<u32>,
    keys: Vec<String>,
    labels: Vec<String>,
    index: HashMap<String, VertexId>,
    euler_in: Vec<u32>,
    euler_out: Vec<u32>,
    preorder: Vec<VertexId>,
    height: u32,
    max_out_degree: usize,
}

impl Hierarchy {
    /// Build from parent pointers. `keys` are the external identifiers used for
    /// lookups; `labels` are display strings.
    pub fn from_parents(
        keys: Vec<String>,
        labels: Vec<String>,
        parents: Vec<Option<usize>>,
    ) -> Result<Self, HierarchyError> {
        let n = keys.len();
        assert_eq!(labels.len(), n);
        assert_eq!(parents.len(), n);
        if n == 0 {
            return Err(HierarchyError::Empty);
        }
        let mut index = HashMap::with_capacity(n);
        for (i, key) in keys.iter().enumerate() {
            if index.insert(key.clone(), VertexId::new(i)).is_some() {
                return Err(HierarchyError::DuplicateVertex(key.clone()));
            }
        }

        let mut root = None;
        let mut children = vec![Vec::new(); n];
        for (v, p) in parents.iter().enumerate() {
            match *p {
                None => match root {
                    None => root = Some(v),
                    Some(r) => {
                        return Err(HierarchyError::MultipleRoots(
                            keys[r].clone(),
                            keys[v].clone(),
                        ))
                    }
                },
                Some(p) if p == v => return Err(HierarchyError::Cycle(keys[v].clone())),
                Some(p) => children[p].push(VertexId::new(v)),
            }
        }
        // every vertex has a parent: the parent graph must contain a cycle
        let Some(root) = root else {
            return Err(HierarchyError::Cycle(keys[0].clone()));
        };

        let mut depth = vec![0u32; n];
        let mut euler_in = vec![0u32; n];
        let mut euler_out = vec![0u32; n];
        let mut preorder = Vec::with_capacity(n);
        let mut stack = vec![VertexId::new(root)];
        while let Some(v) = stack.pop() {
            euler_in[v.index()] = preorder.len() as u32;
            preorder.push(v);
            for &c in children[v.index()].iter().rev() {
                depth[c.index()] = depth[v.index()] + 1;
                stack.push(c);
            }
        }
        if preorder.len() != n {
            let unreached = (0..n)
                .find(|&v| v != root && euler_in[v] == 0)
                .expect("some vertex is unreachable");
            return Err(HierarchyError::Cycle(keys[unreached].clone()));
        }
        // subtree sizes accumulate bottom-up over the reversed pre-order
        let mut size = vec![1u32; n];
        for &v in preorder.iter().rev() {
            if let Some(p) = parents[v.index()] {
                size[p] += size[v.index()];
            }
        }
        for v in 0..n {
            euler_out[v] = euler_in[v] + size[v];
        }

        let height = depth.iter().copied().max().unwrap_or(0);
        let max_out_degree = children.iter().map(Vec::len).max().unwrap_or(0).max(1);
        Ok(Hierarchy {
            root: VertexId::new(root),
            parent: parents.into_iter().map(|p| p.map(VertexId::new)).collect(),
            children,
            depth,
            keys,
            labels,
            index,
            euler_in,
            euler_out,
            preorder,
            height,
            max_out_degree,
        })
    }

    pub fn load<R: Read>(mut source: R, format: Format) -> Result<Self, HierarchyError> {
        let mut text = String::new();
        source.read_to_string(&mut text)?;
        match format {
            Format::EdgeList => Self::from_edge_list(&text),
            Format::Json => Self::from_json(&text),
        }
    }

    pub fn load_path(path: impl AsRef<std::path::Path>) -> Result<Self, HierarchyError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::load(file, Format::from_path(path))
    }

    pub fn from_edge_list(text: &str) -> Result<Self, HierarchyError> {
        let mut keys: Vec<String> = Vec::new();
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut parents: Vec<Option<usize>> = Vec::new();
        let mut intern = |name: &str, keys: &mut Vec<String>, parents: &mut Vec<Option<usize>>| {
            *ids.entry(name.to_string()).or_insert_with(|| {
                keys.push(name.to_string());
                parents.push(None);
                keys.len() - 1
            })
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                [single] => {
                    intern(single.trim(), &mut keys, &mut parents);
                }
                [p, c] => {
                    let (p, c) = (p.trim(), c.trim());
                    if p.is_empty() || c.is_empty() {
                        return Err(HierarchyError::Syntax {
                            line: lineno + 1,
                            message: "empty label".into(),
                        });
                    }
                    let pi = intern(p, &mut keys, &mut parents);
                    let ci = intern(c, &mut keys, &mut parents);
                    if let Some(prev) = parents[ci] {
                        return Err(HierarchyError::DuplicateParent {
                            child: keys[ci].clone(),
                            first: keys[prev].clone(),
                            second: keys[pi].clone(),
                        });
                    }
                    parents[ci] = Some(pi);
                }
                _ => {
                    return Err(HierarchyError::Syntax {
                        line: lineno + 1,
                        message: format!("expected 'parent<TAB>child', got {} fields", fields.len()),
                    })
                }
            }
        }
        let labels = keys.clone();
        Self::from_parents(keys, labels, parents)
    }

    pub fn from_json(text: &str) -> Result<Self, HierarchyError> {
        let doc: JsonDoc = serde_json::from_str(text)?;
        let mut ids: HashMap<&str, usize> = HashMap::new();
        for (i, node) in doc.nodes.iter().enumerate() {
            if ids.insert(node.id.as_str(), i).is_some() {
                return Err(HierarchyError::DuplicateVertex(node.id.clone()));
            }
        }
        let mut parents = Vec::with_capacity(doc.nodes.len());
        for node in &doc.nodes {
            let parent = match &node.parent {
                None => None,
                Some(p) => Some(*ids.get(p.as_str()).ok_or_else(|| {
                    HierarchyError::DanglingReference {
                        from: node.id.clone(),
                        reference: p.clone(),
                    }
                })?),
            };
            parents.push(parent);
        }
        let labels = doc
            .nodes
            .iter()
            .map(|n| n.label.clone().unwrap_or_else(|| n.id.clone()))
            .collect();
        let keys = doc.nodes.into_iter().map(|n| n.id).collect();
        Self::from_parents(keys, labels, parents)
    }

    /// Edge-list serialization; vertices are emitted in id order so reloading
    /// reproduces the same ids.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.keys[self.root.index()]);
        out.push('\n');
        for v in self.vertices() {
            if let Some(p) = self.parent(v) {
                out.push_str(&self.keys[p.index()]);
                out.push('\t');
                out.push_str(&self.keys[v.index()]);
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = JsonDoc {
            nodes: self
                .vertices()
                .map(|v| JsonNode {
                    id: self.keys[v.index()].clone(),
                    label: Some(self.labels[v.index()].clone()),
                    parent: self.parent(v).map(|p| self.keys[p.index()].clone()),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("hierarchy serializes")
    }

    /// SHA-256 over the parent structure and keys, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for v in self.vertices() {
            hasher.update(self.keys[v.index()].as_bytes());
            hasher.update([0u8]);
            match self.parent(v) {
                Some(p) => hasher.update((p.0 + 1).to_le_bytes()),
                None => hasher.update(0u32.to_le_bytes()),
            }
        }
        hex::encode(hasher.finalize())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    #[inline]
    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = VertexId> + '_ {
        (0..self.len()).map(VertexId::new)
    }

    #[inline]
    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v.index()]
    }

    #[inline]
    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v.index()]
    }

    #[inline]
    pub fn depth(&self, v: VertexId) -> u32 {
        self.depth[v.index()]
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn max_out_degree(&self) -> usize {
        self.max_out_degree
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.index()]
    }

    pub fn key(&self, v: VertexId) -> &str {
        &self.keys[v.index()]
    }

    /// Look up a vertex by key, falling back to its display label.
    pub fn lookup(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied().or_else(|| {
            self.labels
                .iter()
                .position(|l| l == name)
                .map(VertexId::new)
        })
    }

    pub fn euler_in(&self, v: VertexId) -> u32 {
        self.euler_in[v.index()]
    }

    pub fn euler_out(&self, v: VertexId) -> u32 {
        self.euler_out[v.index()]
    }

    /// Vertices in pre-order; every subtree is a contiguous slice.
    pub fn preorder(&self) -> &[VertexId] {
        &self.preorder
    }

    /// `u → v`: true iff `u` lies on the root path of `v` (including `u == v`).
    #[inline]
    pub fn is_ancestor(&self, u: VertexId, v: VertexId) -> bool {
        let (ui, vi) = (u.index(), v.index());
        self.euler_in[ui] <= self.euler_in[vi] && self.euler_in[vi] < self.euler_out[ui]
    }

    /// Hop count from `u` down to `v`, or `None` when `u` does not reach `v`.
    #[inline]
    pub fn distance(&self, u: VertexId, v: VertexId) -> Option<u32> {
        self.is_ancestor(u, v)
            .then(|| self.depth[v.index()] - self.depth[u.index()])
    }

    /// All of `des(v)`, `v` first, in pre-order.
    pub fn subtree_vertices(&self, v: VertexId) -> &[VertexId] {
        &self.preorder[self.euler_in[v.index()] as usize..self.euler_out[v.index()] as usize]
    }

    pub fn subtree_size(&self, v: VertexId) -> usize {
        (self.euler_out[v.index()] - self.euler_in[v.index()]) as usize
    }

    /// `anc(v)` ordered from the root down to `v`.
    pub fn root_path(&self, v: VertexId) -> Vec<VertexId> {
        let mut path = Vec::with_capacity(self.depth(v) as usize + 1);
        path.extend(self.ancestors(v));
        path.reverse();
        path
    }

    /// Walks from `v` up to the root, `v` first.
    pub fn ancestors(&self, v: VertexId) -> Ancestors<'_> {
        Ancestors {
            h: self,
            next: Some(v),
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(|&v| self.children(v).is_empty())
    }
}

pub struct Ancestors<'a> {
    h: &'a Hierarchy,
    next: Option<VertexId>,
}

impl Iterator for Ancestors<'_> {
    type Item = VertexId;

    fn next(&mut self) -> Option<VertexId> {
        let cur = self.next?;
        self.next = self.h.parent(cur);
        Some(cur)
    }
}
