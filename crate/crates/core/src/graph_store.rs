//! Heterogeneous knowledge graph over user interactions.
//!
//! Three node types (interaction, concept, category) and three edge kinds.
//! Interaction↔Category and Interaction↔Concept edges are created on ingest;
//! Concept↔Concept edges are a derived layer installed afterwards with
//! [`KnowledgeGraph::set_concept_edges`].
//!
//! The graph is mutated through `&mut self` during ingestion only. Retrieval
//! borrows it immutably, so the borrow checker enforces the freeze point.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concept_extract::{extract_concepts, Lexicon};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("user_id must not be empty")]
    EmptyUserId,
    #[error("category must not be empty")]
    EmptyCategory,
    #[error("timestamp must be non-negative, got {0}")]
    NegativeTimestamp(i64),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid {kind:?} edge {src} -> {dst}: {reason}")]
    InvalidEdge {
        kind: EdgeKind,
        src: String,
        dst: String,
        reason: String,
    },
    #[error("i/o failure on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt snapshot at `{path}`: {reason}")]
    CorruptSnapshot { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    InteractionCategory,
    InteractionConcept,
    ConceptConcept,
}

/// Raw interaction as handed to [`KnowledgeGraph::add_interaction`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionInput {
    pub user_id: String,
    pub title: String,
    pub text: String,
    pub category: String,
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionNode {
    pub category: String,
    pub id: String,
    pub text: String,
    pub timestamp: i64,
    pub title: String,
    pub user_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptNode {
    pub doc_count: u64,
    pub id: String,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryNode {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub dst: String,
    pub kind: EdgeKind,
    pub src: String,
    pub weight: f64,
}

impl Edge {
    /// Builds a Concept↔Concept edge in canonical (`src < dst`) order.
    pub fn concept_pair(a: &str, b: &str, weight: f64) -> Edge {
        let (src, dst) = if a <= b { (a, b) } else { (b, a) };
        Edge {
            kind: EdgeKind::ConceptConcept,
            src: src.to_string(),
            dst: dst.to_string(),
            weight,
        }
    }
}

pub fn interaction_id(user_id: &str, seq: u64) -> String {
    format!("i:{user_id}:{seq}")
}

pub fn concept_id(surface: &str) -> String {
    format!("c:{surface}")
}

pub fn category_id(name: &str) -> String {
    format!("k:{name}")
}

type EdgeKey = (EdgeKind, String, String);
type Adjacency = BTreeMap<String, BTreeMap<EdgeKind, BTreeMap<String, f64>>>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeGraph {
    interactions: BTreeMap<String, InteractionNode>,
    concepts: BTreeMap<String, ConceptNode>,
    categories: BTreeMap<String, CategoryNode>,
    edges: BTreeMap<EdgeKey, f64>,
    adjacency: Adjacency,
    user_seq: BTreeMap<String, u64>,
    // user -> interaction ids
    by_user: BTreeMap<String, BTreeSet<String>>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Ingests one interaction: creates the node, links its category and
    /// every extracted concept. Returns the new interaction id.
    pub fn add_interaction(
        &mut self,
        record: &InteractionInput,
        lexicon: Option<&Lexicon>,
    ) -> Result<String, GraphError> {
        if record.user_id.is_empty() {
            return Err(GraphError::EmptyUserId);
        }
        let category = record.category.trim().to_lowercase();
        if category.is_empty() {
            return Err(GraphError::EmptyCategory);
        }
        if record.timestamp < 0 {
            return Err(GraphError::NegativeTimestamp(record.timestamp));
        }

        let seq = self.user_seq.entry(record.user_id.clone()).or_insert(0);
        *seq += 1;
        let id = interaction_id(&record.user_id, *seq);

        self.interactions.insert(
            id.clone(),
            InteractionNode {
                id: id.clone(),
                user_id: record.user_id.clone(),
                title: record.title.clone(),
                text: record.text.clone(),
                category: category.clone(),
                timestamp: record.timestamp,
            },
        );
        self.by_user
            .entry(record.user_id.clone())
            .or_default()
            .insert(id.clone());

        let cat_id = category_id(&category);
        self.categories
            .entry(cat_id.clone())
            .or_insert_with(|| CategoryNode {
                id: cat_id.clone(),
                name: category,
            });
        self.link(EdgeKind::InteractionCategory, &id, &cat_id, 1.0);

        let source = if record.title.is_empty() {
            record.text.clone()
        } else {
            format!("{}. {}", record.title, record.text)
        };
        for surface in extract_concepts(&source, lexicon) {
            let cid = concept_id(&surface);
            let node = self.concepts.entry(cid.clone()).or_insert_with(|| ConceptNode {
                id: cid.clone(),
                surface,
                doc_count: 0,
            });
            node.doc_count += 1;
            self.link(EdgeKind::InteractionConcept, &id, &cid, 1.0);
        }
        Ok(id)
    }

    fn link(&mut self, kind: EdgeKind, src: &str, dst: &str, weight: f64) {
        self.edges
            .insert((kind, src.to_string(), dst.to_string()), weight);
        for (a, b) in [(src, dst), (dst, src)] {
            self.adjacency
                .entry(a.to_string())
                .or_default()
                .entry(kind)
                .or_default()
                .insert(b.to_string(), weight);
        }
    }

    /// Replaces the derived Concept↔Concept layer.
    pub fn set_concept_edges(&mut self, edges: &[Edge]) -> Result<(), GraphError> {
        for e in edges {
            let reason = if e.kind != EdgeKind::ConceptConcept {
                Some("not a concept-concept edge")
            } else if e.src >= e.dst {
                Some("endpoints not in canonical order")
            } else if !self.concepts.contains_key(&e.src) || !self.concepts.contains_key(&e.dst) {
                Some("endpoint is not a concept node")
            } else if !(e.weight.is_finite() && e.weight >= 0.0) {
                Some("weight must be finite and non-negative")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(GraphError::InvalidEdge {
                    kind: e.kind,
                    src: e.src.clone(),
                    dst: e.dst.clone(),
                    reason: reason.to_string(),
                });
            }
        }
        self.edges.retain(|(kind, _, _), _| *kind != EdgeKind::ConceptConcept);
        for per_node in self.adjacency.values_mut() {
            per_node.remove(&EdgeKind::ConceptConcept);
        }
        self.adjacency.retain(|_, per_node| !per_node.is_empty());
        for e in edges {
            self.link(EdgeKind::ConceptConcept, &e.src, &e.dst, e.weight);
        }
        Ok(())
    }

    /// The user's interactions ordered by (timestamp, id). Unknown users
    /// have an empty history.
    pub fn get_user_history(&self, user_id: &str) -> Vec<&InteractionNode> {
        let mut out: Vec<&InteractionNode> = self
            .by_user
            .get(user_id)
            .into_iter()
            .flatten()
            .filter_map(|id| self.interactions.get(id))
            .collect();
        out.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
        out
    }

    pub fn all_interaction_ids(&self) -> Vec<String> {
        self.interactions.keys().cloned().collect()
    }

    pub fn user_ids(&self) -> impl Iterator<Item = &str> {
        self.by_user.keys().map(String::as_str)
    }

    /// Neighbors over one edge kind, sorted by (weight desc, id asc).
    pub fn neighbors(&self, node_id: &str, kind: EdgeKind) -> Result<Vec<(String, f64)>, GraphError> {
        if !self.contains_node(node_id) {
            return Err(GraphError::UnknownNode(node_id.to_string()));
        }
        let mut out: Vec<(String, f64)> = self
            .adjacency
            .get(node_id)
            .and_then(|m| m.get(&kind))
            .map(|m| m.iter().map(|(k, w)| (k.clone(), *w)).collect())
            .unwrap_or_default();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }

    pub(crate) fn neighbor_ids(&self, node_id: &str, kind: EdgeKind) -> impl Iterator<Item = &str> {
        self.adjacency
            .get(node_id)
            .and_then(|m| m.get(&kind))
            .into_iter()
            .flat_map(|m| m.keys().map(String::as_str))
    }

    pub fn contains_node(&self, node_id: &str) -> bool {
        self.interactions.contains_key(node_id)
            || self.concepts.contains_key(node_id)
            || self.categories.contains_key(node_id)
    }

    pub fn interaction(&self, id: &str) -> Option<&InteractionNode> {
        self.interactions.get(id)
    }

    pub fn interactions(&self) -> impl Iterator<Item = &InteractionNode> {
        self.interactions.values()
    }

    pub fn concept(&self, id: &str) -> Option<&ConceptNode> {
        self.concepts.get(id)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &ConceptNode> {
        self.concepts.values()
    }

    pub fn categories(&self) -> impl Iterator<Item = &CategoryNode> {
        self.categories.values()
    }

    /// All edges, ordered by (kind, src, dst).
    pub fn edges(&self) -> Vec<Edge> {
        self.edges
            .iter()
            .map(|((kind, src, dst), w)| Edge {
                kind: *kind,
                src: src.clone(),
                dst: dst.clone(),
                weight: *w,
            })
            .collect()
    }

    pub fn edges_of_kind(&self, kind: EdgeKind) -> Vec<Edge> {
        self.edges()
            .into_iter()
            .filter(|e| e.kind == kind)
            .collect()
    }

    pub fn user_seq(&self, user_id: &str) -> u64 {
        self.user_seq.get(user_id).copied().unwrap_or(0)
    }

    pub fn interaction_count(&self) -> usize {
        self.interactions.len()
    }

    pub fn save_snapshot(&self, path: &Path) -> Result<(), GraphError> {
        let doc = SnapshotDoc {
            version: SNAPSHOT_VERSION,
            interactions: self.interactions.values().cloned().collect(),
            concepts: self.concepts.values().cloned().collect(),
            categories: self.categories.values().cloned().collect(),
            edges: self.edges(),
            user_seq: self.user_seq.clone(),
        };
        // Value maps are BTreeMaps, so keys come out sorted at every level.
        let value = serde_json::to_value(&doc).expect("snapshot is always representable as JSON");
        let mut text = serde_json::to_string_pretty(&value).expect("serializing a Value cannot fail");
        text.push('\n');
        fs::write(path, text).map_err(|source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load_snapshot(path: &Path) -> Result<KnowledgeGraph, GraphError> {
        let bytes = fs::read(path).map_err(|source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_snapshot_bytes(&bytes)
    }

    pub fn from_snapshot_bytes(bytes: &[u8]) -> Result<KnowledgeGraph, GraphError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let doc: SnapshotDoc = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            GraphError::CorruptSnapshot {
                path,
                reason: e.into_inner().to_string(),
            }
        })?;
        doc.into_graph()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotDoc {
    categories: Vec<CategoryNode>,
    concepts: Vec<ConceptNode>,
    edges: Vec<Edge>,
    interactions: Vec<InteractionNode>,
    user_seq: BTreeMap<String, u64>,
    version: u32,
}

fn corrupt(path: impl Into<String>, reason: impl Into<String>) -> GraphError {
    GraphError::CorruptSnapshot {
        path: path.into(),
        reason: reason.into(),
    }
}

impl SnapshotDoc {
    fn into_graph(self) -> Result<KnowledgeGraph, GraphError> {
        if self.version != SNAPSHOT_VERSION {
            return Err(corrupt(
                "version",
                format!("unsupported version {}, expected {SNAPSHOT_VERSION}", self.version),
            ));
        }
        let mut g = KnowledgeGraph::new();

        for (i, node) in self.categories.into_iter().enumerate() {
            if node.name.is_empty() || node.id != category_id(&node.name) {
                return Err(corrupt(format!("categories[{i}]"), "malformed category node"));
            }
            if g.categories.insert(node.id.clone(), node).is_some() {
                return Err(corrupt(format!("categories[{i}].id"), "duplicate id"));
            }
        }
        for (i, node) in self.concepts.into_iter().enumerate() {
            if node.surface.is_empty() || node.id != concept_id(&node.surface) {
                return Err(corrupt(format!("concepts[{i}]"), "malformed concept node"));
            }
            if g.concepts.insert(node.id.clone(), node).is_some() {
                return Err(corrupt(format!("concepts[{i}].id"), "duplicate id"));
            }
        }
        for (i, node) in self.interactions.into_iter().enumerate() {
            if node.user_id.is_empty() || node.category.is_empty() || node.timestamp < 0 {
                return Err(corrupt(format!("interactions[{i}]"), "malformed interaction node"));
            }
            g.by_user
                .entry(node.user_id.clone())
                .or_default()
                .insert(node.id.clone());
            if g.interactions.insert(node.id.clone(), node).is_some() {
                return Err(corrupt(format!("interactions[{i}].id"), "duplicate id"));
            }
        }

        let mut concept_degree: BTreeMap<String, u64> = BTreeMap::new();
        for (i, e) in self.edges.into_iter().enumerate() {
            let at = |field: &str| format!("edges[{i}].{field}");
            let (src_ok, dst_ok) = match e.kind {
                EdgeKind::InteractionCategory => (
                    g.interactions.contains_key(&e.src),
                    g.categories.contains_key(&e.dst),
                ),
                EdgeKind::InteractionConcept => (
                    g.interactions.contains_key(&e.src),
                    g.concepts.contains_key(&e.dst),
                ),
                EdgeKind::ConceptConcept => (
                    g.concepts.contains_key(&e.src),
                    g.concepts.contains_key(&e.dst),
                ),
            };
            if !src_ok {
                return Err(corrupt(at("src"), format!("no compatible node `{}`", e.src)));
            }
            if !dst_ok {
                return Err(corrupt(at("dst"), format!("no compatible node `{}`", e.dst)));
            }
            if e.kind == EdgeKind::ConceptConcept && e.src >= e.dst {
                return Err(corrupt(at("src"), "concept edge not in canonical order"));
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(corrupt(at("weight"), "weight must be finite and non-negative"));
            }
            if g.edges.contains_key(&(e.kind, e.src.clone(), e.dst.clone())) {
                return Err(corrupt(format!("edges[{i}]"), "duplicate edge"));
            }
            if e.kind == EdgeKind::InteractionConcept {
                *concept_degree.entry(e.dst.clone()).or_default() += 1;
            }
            g.link(e.kind, &e.src, &e.dst, e.weight);
        }

        for (id, node) in &g.interactions {
            let cats = g.neighbor_ids(id, EdgeKind::InteractionCategory).count();
            if cats != 1 {
                return Err(corrupt(
                    "edges",
                    format!("interaction `{id}` has {cats} category edges, expected 1"),
                ));
            }
            if g.neighbor_ids(id, EdgeKind::InteractionCategory).next() != Some(&category_id(&node.category)) {
                return Err(corrupt("edges", format!("interaction `{id}` linked to wrong category")));
            }
        }
        for (i, (id, node)) in g.concepts.iter().enumerate() {
            let degree = concept_degree.get(id).copied().unwrap_or(0);
            if node.doc_count != degree {
                return Err(corrupt(
                    format!("concepts[{i}].doc_count"),
                    format!("doc_count {} disagrees with {degree} linked interactions", node.doc_count),
                ));
            }
        }
        for (user, ids) in &g.by_user {
            let seq = self.user_seq.get(user).copied().unwrap_or(0);
            if (ids.len() as u64) > seq {
                return Err(corrupt(
                    format!("user_seq.{user}"),
                    format!("counter {seq} below {} stored interactions", ids.len()),
                ));
            }
        }
        g.user_seq = self.user_seq;
        Ok(g)
    }
}
