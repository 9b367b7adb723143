//! Dual-source retrieval: the querying user's own history plus the rest of
//! the community, bundled with category preferences and related concepts
//! into a [`SemanticContext`].

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::graph_store::{EdgeKind, InteractionNode, KnowledgeGraph};
use crate::tfidf_index::{tokenize, top_k_with, Candidate, ScoredInteraction, TfIdfIndex, TfIdfVector};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("user `{0}` has no interaction history")]
    EmptyHistory(String),
    #[error("query user_id must not be empty")]
    EmptyUserId,
    #[error("query text must not be empty")]
    EmptyQueryText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Classification,
    Rating,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub user_id: String,
    pub text: String,
    pub task: TaskKind,
    pub candidate_labels: Option<Vec<String>>,
}

impl Query {
    pub fn new(
        user_id: impl Into<String>,
        text: impl Into<String>,
        task: TaskKind,
    ) -> Result<Self, ContextError> {
        let user_id = user_id.into();
        let text = text.into();
        if user_id.is_empty() {
            return Err(ContextError::EmptyUserId);
        }
        if text.trim().is_empty() {
            return Err(ContextError::EmptyQueryText);
        }
        Ok(Query {
            user_id,
            text,
            task,
            candidate_labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.candidate_labels = Some(labels);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RetrievalConfig {
    pub k_user: usize,
    pub k_global: usize,
    pub m_concepts: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            k_user: 5,
            k_global: 5,
            m_concepts: 10,
        }
    }
}

/// Normalized category frequencies over a user's history, sorted by
/// (probability desc, label asc).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryPreference {
    pub distribution: Vec<CategoryShare>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryShare {
    pub label: String,
    pub probability: f64,
}

impl CategoryPreference {
    pub fn probability(&self, label: &str) -> Option<f64> {
        self.distribution
            .iter()
            .find(|s| s.label == label)
            .map(|s| s.probability)
    }
}

/// A retrieval hit with the interaction fields the prompt needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextHit {
    #[serde(flatten)]
    pub scored: ScoredInteraction,
    pub category: String,
    pub text: String,
    pub title: String,
}

impl ContextHit {
    pub fn id(&self) -> &str {
        &self.scored.interaction_id
    }

    pub fn score(&self) -> f64 {
        self.scored.score
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SemanticContext {
    pub user_hits: Vec<ContextHit>,
    pub global_hits: Vec<ContextHit>,
    /// `None` when the user has no history.
    pub category_prefs: Option<CategoryPreference>,
    pub concepts: Vec<String>,
}

impl SemanticContext {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Serializes with sorted keys at every level.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("context is plain data")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredConcept {
    pub surface: String,
    pub score: usize,
}

/// Read-only retrieval over a frozen graph.
pub struct ContextEngine<'g> {
    graph: &'g KnowledgeGraph,
    index: TfIdfIndex,
    exec: Execution,
}

/// Text indexed for an interaction.
pub fn document_text(node: &InteractionNode) -> String {
    if node.title.is_empty() {
        node.text.clone()
    } else {
        format!("{}\n{}", node.title, node.text)
    }
}

impl<'g> ContextEngine<'g> {
    pub fn new(graph: &'g KnowledgeGraph) -> Self {
        Self::with_execution(graph, Execution::default())
    }

    pub fn with_execution(graph: &'g KnowledgeGraph, exec: Execution) -> Self {
        let docs: Vec<(String, String)> = graph
            .interactions()
            .map(|n| (n.id.clone(), document_text(n)))
            .collect();
        let index = TfIdfIndex::build_with(&docs, exec).expect("interaction ids are unique");
        ContextEngine { graph, index, exec }
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        self.graph
    }

    pub fn index(&self) -> &TfIdfIndex {
        &self.index
    }

    pub fn query_vector(&self, q: &Query) -> TfIdfVector {
        self.index.vectorize(&q.text)
    }

    fn candidate(&self, node: &'g InteractionNode) -> Candidate<'_> {
        Candidate {
            id: &node.id,
            vector: self.index.vector(&node.id).expect("every interaction is indexed"),
            timestamp: node.timestamp,
        }
    }

    /// Top `k_user` hits over the user's own history.
    pub fn retrieve_user(&self, user_id: &str, q: &Query, cfg: &RetrievalConfig) -> Vec<ScoredInteraction> {
        let candidates: Vec<Candidate> = self
            .graph
            .get_user_history(user_id)
            .into_iter()
            .map(|n| self.candidate(n))
            .collect();
        top_k_with(&self.query_vector(q), &candidates, cfg.k_user, self.exec)
    }

    /// Top `k_global` hits over every interaction not owned by the user.
    pub fn retrieve_global(&self, user_id: &str, q: &Query, cfg: &RetrievalConfig) -> Vec<ScoredInteraction> {
        let candidates: Vec<Candidate> = self
            .graph
            .interactions()
            .filter(|n| n.user_id != user_id)
            .map(|n| self.candidate(n))
            .collect();
        top_k_with(&self.query_vector(q), &candidates, cfg.k_global, self.exec)
    }

    pub fn category_preferences(&self, user_id: &str) -> Result<CategoryPreference, ContextError> {
        let history = self.graph.get_user_history(user_id);
        if history.is_empty() {
            return Err(ContextError::EmptyHistory(user_id.to_string()));
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for node in &history {
            *counts.entry(node.category.as_str()).or_default() += 1;
        }
        let total = history.len() as f64;
        let mut distribution: Vec<CategoryShare> = counts
            .into_iter()
            .map(|(label, n)| CategoryShare {
                label: label.to_string(),
                probability: n as f64 / total,
            })
            .collect();
        distribution.sort_by(|a, b| {
            b.probability
                .total_cmp(&a.probability)
                .then_with(|| a.label.cmp(&b.label))
        });
        Ok(CategoryPreference { distribution })
    }

    /// Concepts linked to any hit, scored by the number of distinct hits
    /// linking them plus one when a concept token occurs in the query.
    pub fn relevant_concepts_scored(
        &self,
        q: &Query,
        hits: &[ScoredInteraction],
        cfg: &RetrievalConfig,
    ) -> Vec<ScoredConcept> {
        let hit_ids: BTreeSet<&str> = hits.iter().map(|h| h.interaction_id.as_str()).collect();
        let mut linked: BTreeMap<&str, usize> = BTreeMap::new();
        for id in hit_ids {
            for cid in self.graph.neighbor_ids(id, EdgeKind::InteractionConcept) {
                *linked.entry(cid).or_default() += 1;
            }
        }
        let query_tokens: BTreeSet<String> = tokenize(&q.text).into_iter().collect();
        let mut scored: Vec<ScoredConcept> = linked
            .into_iter()
            .filter_map(|(cid, n)| {
                let concept = self.graph.concept(cid)?;
                let bonus = tokenize(&concept.surface)
                    .iter()
                    .any(|t| query_tokens.contains(t));
                Some(ScoredConcept {
                    surface: concept.surface.clone(),
                    score: n + usize::from(bonus),
                })
            })
            .collect();
        scored.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.surface.cmp(&b.surface)));
        scored.truncate(cfg.m_concepts);
        scored
    }

    pub fn relevant_concepts(&self, q: &Query, hits: &[ScoredInteraction], cfg: &RetrievalConfig) -> Vec<String> {
        self.relevant_concepts_scored(q, hits, cfg)
            .into_iter()
            .map(|c| c.surface)
            .collect()
    }

    pub fn get_semantic_context(&self, user_id: &str, q: &Query, cfg: &RetrievalConfig) -> SemanticContext {
        let user = self.retrieve_user(user_id, q, cfg);
        let global = self.retrieve_global(user_id, q, cfg);
        let all_hits: Vec<ScoredInteraction> = user.iter().chain(&global).cloned().collect();
        let concepts = self.relevant_concepts(q, &all_hits, cfg);
        SemanticContext {
            user_hits: self.resolve(user),
            global_hits: self.resolve(global),
            category_prefs: self.category_preferences(user_id).ok(),
            concepts,
        }
    }

    fn resolve(&self, hits: Vec<ScoredInteraction>) -> Vec<ContextHit> {
        hits.into_iter()
            .map(|scored| {
                let node = self
                    .graph
                    .interaction(&scored.interaction_id)
                    .expect("hits come from the graph");
                ContextHit {
                    category: node.category.clone(),
                    text: node.text.clone(),
                    title: node.title.clone(),
                    scored,
                }
            })
            .collect()
    }
}
