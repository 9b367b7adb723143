//! Tokenization, TF-IDF vectors, cosine similarity and top-k selection.
//!
//! Weighting is raw term frequency times smoothed idf,
//! `idf(t) = ln((1 + N) / (1 + df(t))) + 1`, followed by L2 normalization.
//! Unseen query terms get `df = 0`, so every weight is positive.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::stopwords::is_stopword;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TfIdfError {
    #[error("duplicate document id `{0}`")]
    DuplicateDocId(String),
}

/// Lowercases, splits on every non-alphanumeric character, and drops
/// one-character tokens and stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| t.chars().count() >= 2 && !is_stopword(t))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    doc_total: usize,
    doc_freq: BTreeMap<String, usize>,
}

impl CorpusStats {
    pub fn doc_total(&self) -> usize {
        self.doc_total
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    /// Vocabulary in ascending order.
    pub fn vocab(&self) -> impl Iterator<Item = &str> {
        self.doc_freq.keys().map(String::as_str)
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.doc_total as f64;
        ((1.0 + n) / (1.0 + self.doc_freq(term) as f64)).ln() + 1.0
    }
}

/// Sparse, L2-normalized term weights sorted by term.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TfIdfVector {
    weights: Vec<(String, f64)>,
}

impl TfIdfVector {
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, term: &str) -> f64 {
        self.weights
            .binary_search_by(|(t, _)| t.as_str().cmp(term))
            .map(|i| self.weights[i].1)
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(t, w)| (t.as_str(), *w))
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    fn from_tokens(tokens: &[String], stats: &CorpusStats) -> Self {
        let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t.as_str()).or_default() += 1;
        }
        let mut weights: Vec<(String, f64)> = tf
            .into_iter()
            .map(|(t, count)| (t.to_string(), count as f64 * stats.idf(t)))
            .collect();
        let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut weights {
                *w /= norm;
            }
        }
        TfIdfVector { weights }
    }
}

/// Corpus statistics plus one vector per indexed document, in input order.
#[derive(Debug, Clone)]
pub struct TfIdfIndex {
    stats: CorpusStats,
    ids: Vec<String>,
    positions: BTreeMap<String, usize>,
    vectors: Vec<TfIdfVector>,
}

impl TfIdfIndex {
    pub fn build<S: AsRef<str> + Sync>(documents: &[(S, S)]) -> Result<Self, TfIdfError> {
        Self::build_with(documents, Execution::default())
    }

    pub fn build_with<S: AsRef<str> + Sync>(
        documents: &[(S, S)],
        exec: Execution,
    ) -> Result<Self, TfIdfError> {
        let mut seen = BTreeSet::new();
        for (id, _) in documents {
            if !seen.insert(id.as_ref()) {
                return Err(TfIdfError::DuplicateDocId(id.as_ref().to_string()));
            }
        }

        let tokens: Vec<Vec<String>> = exec.map(documents, |(_, text)| tokenize(text.as_ref()));
        let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
        for doc in &tokens {
            let unique: BTreeSet<&String> = doc.iter().collect();
            for t in unique {
                *doc_freq.entry(t.clone()).or_default() += 1;
            }
        }
        let stats = CorpusStats {
            doc_total: documents.len(),
            doc_freq,
        };
        let vectors = exec.map(&tokens, |doc| TfIdfVector::from_tokens(doc, &stats));
        let ids: Vec<String> = documents.iter().map(|(id, _)| id.as_ref().to_string()).collect();
        let positions = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(TfIdfIndex {
            stats,
            ids,
            positions,
            vectors,
        })
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn vector(&self, doc_id: &str) -> Option<&TfIdfVector> {
        self.positions.get(doc_id).map(|&i| &self.vectors[i])
    }

    /// Documents and vectors in build order.
    pub fn documents(&self) -> impl Iterator<Item = (&str, &TfIdfVector)> {
        self.ids.iter().map(String::as_str).zip(self.vectors.iter())
    }

    pub fn vectorize(&self, text: &str) -> TfIdfVector {
        vectorize(text, &self.stats)
    }
}

pub fn vectorize(text: &str, stats: &CorpusStats) -> TfIdfVector {
    TfIdfVector::from_tokens(&tokenize(text), stats)
}

/// Dot product of two normalized vectors, clamped to `[0, 1]`.
/// Terms are visited in sorted order, so the result is exactly symmetric.
pub fn cosine(a: &TfIdfVector, b: &TfIdfVector) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut dot = 0.0;
    while i < a.weights.len() && j < b.weights.len() {
        match a.weights[i].0.cmp(&b.weights[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                dot += a.weights[i].1 * b.weights[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    dot.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredInteraction {
    pub interaction_id: String,
    pub score: f64,
    pub timestamp: i64,
}

/// One retrieval candidate.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub id: &'a str,
    pub vector: &'a TfIdfVector,
    pub timestamp: i64,
}

/// Ranking order: score desc, then timestamp desc (newer first), then id asc.
pub fn rank_order(a: &ScoredInteraction, b: &ScoredInteraction) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| b.timestamp.cmp(&a.timestamp))
        .then_with(|| a.interaction_id.cmp(&b.interaction_id))
}

/// The `k` best candidates by [`rank_order`]. Zero-score candidates are
/// eligible.
pub fn top_k(query: &TfIdfVector, candidates: &[Candidate<'_>], k: usize) -> Vec<ScoredInteraction> {
    top_k_with(query, candidates, k, Execution::default())
}

pub fn top_k_with(
    query: &TfIdfVector,
    candidates: &[Candidate<'_>],
    k: usize,
    exec: Execution,
) -> Vec<ScoredInteraction> {
    if k == 0 || candidates.is_empty() {
        return Vec::new();
    }
    let mut scored = exec.map(candidates, |c| ScoredInteraction {
        interaction_id: c.id.to_string(),
        score: cosine(query, c.vector),
        timestamp: c.timestamp,
    });
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, rank_order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(rank_order);
    scored
}
