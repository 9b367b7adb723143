//! Brute-force reference implementations used only by tests.
//!
//! Written from the ranking and weighting rules directly: score every
//! candidate, sort the whole pool, truncate. Terms are kept in `BTreeMap`s so
//! sums run in ascending term order. Random corpora come from a seeded
//! ChaCha stream so failures reproduce from the seed alone.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use personarag::stopwords::STOPWORDS;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Weights = BTreeMap<String, f64>;

pub fn tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in lower.chars().chain(std::iter::once(' ')) {
        if ch.is_alphanumeric() {
            cur.push(ch);
        } else if !cur.is_empty() {
            if cur.chars().count() >= 2 && !STOPWORDS.contains(&cur.as_str()) {
                out.push(cur.clone());
            }
            cur.clear();
        }
    }
    out
}

pub struct Corpus {
    pub n: usize,
    pub df: BTreeMap<String, usize>,
}

impl Corpus {
    pub fn new<'a>(docs: impl IntoIterator<Item = &'a str>) -> Self {
        let mut n = 0;
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for d in docs {
            n += 1;
            let uniq: BTreeSet<String> = tokens(d).into_iter().collect();
            for t in uniq {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        Corpus { n, df }
    }

    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df.get(term).copied().unwrap_or(0) as f64;
        ((1.0 + self.n as f64) / (1.0 + df)).ln() + 1.0
    }

    pub fn weights(&self, text: &str) -> Weights {
        let mut tf: BTreeMap<String, f64> = BTreeMap::new();
        for t in tokens(text) {
            *tf.entry(t).or_insert(0.0) += 1.0;
        }
        let raw: Weights = tf.into_iter().map(|(t, c)| {
            let w = c * self.idf(&t);
            (t, w)
        }).collect();
        let norm = raw.values().map(|w| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            return raw;
        }
        raw.into_iter().map(|(t, w)| (t, w / norm)).collect()
    }
}

pub fn cosine(a: &Weights, b: &Weights) -> f64 {
    let mut dot = 0.0;
    for (t, wa) in a {
        if let Some(wb) = b.get(t) {
            dot += wa * wb;
        }
    }
    dot.clamp(0.0, 1.0)
}

#[derive(Debug, Clone)]
pub struct Doc {
    pub id: String,
    pub user: String,
    pub text: String,
    pub timestamp: i64,
}

/// Scores every doc accepted by `keep`, sorts by (score desc, timestamp
/// desc, id asc), keeps the first `k` ids.
/// `vectors[i]` holds the weights of `docs[i]`.
pub fn rank(
    corpus: &Corpus,
    docs: &[Doc],
    vectors: &[Weights],
    query: &str,
    k: usize,
    keep: impl Fn(&Doc) -> bool,
) -> Vec<String> {
    let q = corpus.weights(query);
    let mut scored: Vec<(f64, i64, &str)> = docs
        .iter()
        .zip(vectors)
        .filter(|(d, _)| keep(d))
        .map(|(d, v)| (cosine(&q, v), d.timestamp, d.id.as_str()))
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(b.1.cmp(&a.1))
            .then(a.2.cmp(b.2))
    });
    scored.into_iter().take(k).map(|(_, _, id)| id.to_string()).collect()
}

pub const VOCAB: [&str; 30] = [
    "apple", "banana", "cherry", "delta", "echo", "falcon", "garden", "harbor", "island", "jungle",
    "kettle", "lemon", "meadow", "nectar", "orbit", "pepper", "quartz", "river", "saddle", "timber",
    "umbra", "valley", "walnut", "xenon", "yarrow", "zephyr", "amber", "basil", "cedar", "dune",
];

pub struct RandomCorpus {
    pub docs: Vec<Doc>,
    pub categories: Vec<String>,
    pub queries: Vec<String>,
}

/// Up to 50 docs over at most 30 terms, a handful of users, coarse
/// timestamps so ties occur.
pub fn random_corpus(seed: u64) -> RandomCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = rng.random_range(1..=VOCAB.len());
    let n_docs = rng.random_range(1..=50);
    let n_users = rng.random_range(1..=6);
    let mut seq: BTreeMap<String, u64> = BTreeMap::new();
    let mut docs = Vec::new();
    let mut categories = Vec::new();
    let words = |rng: &mut ChaCha8Rng, lo: usize, hi: usize| -> String {
        let n = rng.random_range(lo..=hi);
        (0..n).map(|_| VOCAB[rng.random_range(0..vocab)]).collect::<Vec<_>>().join(" ")
    };
    for _ in 0..n_docs {
        let user = format!("u{}", rng.random_range(0..n_users));
        let s = seq.entry(user.clone()).or_insert(0);
        *s += 1;
        let text = words(&mut rng, 1, 8);
        let timestamp = rng.random_range(0..6);
        docs.push(Doc {
            id: format!("i:{user}:{s}"),
            user,
            text,
            timestamp,
        });
        categories.push(["politics", "sports", "women"][rng.random_range(0..3)].to_string());
    }
    let queries = (0..3).map(|_| words(&mut rng, 1, 5)).collect();
    RandomCorpus { docs, categories, queries }
}

impl RandomCorpus {
    pub fn graph(&self) -> personarag::KnowledgeGraph {
        let mut g = personarag::KnowledgeGraph::new();
        for (d, c) in self.docs.iter().zip(&self.categories) {
            let id = g
                .add_interaction(
                    &personarag::InteractionInput {
                        user_id: d.user.clone(),
                        title: String::new(),
                        text: d.text.clone(),
                        category: c.clone(),
                        timestamp: d.timestamp,
                    },
                    None,
                )
                .expect("valid record");
            assert_eq!(id, d.id);
        }
        g
    }

    pub fn oracle(&self) -> Corpus {
        Corpus::new(self.docs.iter().map(|d| d.text.as_str()))
    }

    pub fn oracle_vectors(&self, corpus: &Corpus) -> Vec<Weights> {
        self.docs.iter().map(|d| corpus.weights(&d.text)).collect()
    }

    pub fn users(&self) -> BTreeSet<String> {
        self.docs.iter().map(|d| d.user.clone()).collect()
    }
}
