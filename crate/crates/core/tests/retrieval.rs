mod support;

use personarag::context_engine::{ContextEngine, Query, RetrievalConfig, TaskKind};
use personarag::exec::Execution;
use personarag::tfidf_index::{cosine, top_k, Candidate, TfIdfIndex};
use proptest::prelude::*;
use support::oracle::{self, random_corpus};

fn ids(hits: &[personarag::tfidf_index::ScoredInteraction]) -> Vec<String> {
    hits.iter().map(|h| h.interaction_id.clone()).collect()
}

#[test]
fn retrieval_matches_brute_force() {
    for seed in 0..250u64 {
        let corpus = random_corpus(seed);
        let graph = corpus.graph();
        let oracle_stats = corpus.oracle();
        let vectors = corpus.oracle_vectors(&oracle_stats);
        for exec in [Execution::Sequential, Execution::Parallel] {
            let engine = ContextEngine::with_execution(&graph, exec);
            for (qi, text) in corpus.queries.iter().enumerate() {
                let k = (seed as usize * 7 + qi * 3) % 11;
                let cfg = RetrievalConfig { k_user: k, k_global: k, m_concepts: 10 };
                for user in corpus.users().iter().map(String::as_str).chain(["nobody"]) {
                    let q = Query::new(user, text.clone(), TaskKind::Classification).unwrap();
                    let want_user = oracle::rank(&oracle_stats, &corpus.docs, &vectors, text, k, |d| d.user == user);
                    let want_global = oracle::rank(&oracle_stats, &corpus.docs, &vectors, text, k, |d| d.user != user);
                    assert_eq!(ids(&engine.retrieve_user(user, &q, &cfg)), want_user, "seed {seed} user {user}");
                    assert_eq!(ids(&engine.retrieve_global(user, &q, &cfg)), want_global, "seed {seed} user {user}");
                }
            }
        }
    }
}

#[test]
fn weights_match_oracle() {
    for seed in 0..100u64 {
        let corpus = random_corpus(seed);
        let docs: Vec<(String, String)> = corpus.docs.iter().map(|d| (d.id.clone(), d.text.clone())).collect();
        let index = TfIdfIndex::build(&docs).unwrap();
        let stats = corpus.oracle();
        for d in &corpus.docs {
            let got = index.vector(&d.id).unwrap();
            let want = stats.weights(&d.text);
            assert_eq!(got.len(), want.len());
            for (t, w) in &want {
                assert!((got.weight(t) - w).abs() <= 1e-12, "seed {seed} {t}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn vectors_are_unit_length(seed in any::<u64>()) {
        let corpus = random_corpus(seed);
        let docs: Vec<(String, String)> = corpus.docs.iter().map(|d| (d.id.clone(), d.text.clone())).collect();
        let index = TfIdfIndex::build(&docs).unwrap();
        for (_, v) in index.documents() {
            prop_assert!(!v.is_empty());
            prop_assert!((v.norm() - 1.0).abs() <= 1e-12);
        }
        for q in &corpus.queries {
            let v = index.vectorize(q);
            prop_assert!((v.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn cosine_is_symmetric(seed in any::<u64>()) {
        let corpus = random_corpus(seed);
        let docs: Vec<(String, String)> = corpus.docs.iter().map(|d| (d.id.clone(), d.text.clone())).collect();
        let index = TfIdfIndex::build(&docs).unwrap();
        let vectors: Vec<_> = index.documents().map(|(_, v)| v).collect();
        for a in &vectors {
            for b in &vectors {
                let (ab, ba) = (cosine(a, b), cosine(b, a));
                prop_assert_eq!(ab.to_bits(), ba.to_bits());
                prop_assert!((0.0..=1.0).contains(&ab));
            }
        }
    }

    #[test]
    fn top_k_prefixes_grow(seed in any::<u64>(), qi in 0usize..3) {
        let corpus = random_corpus(seed);
        let docs: Vec<(String, String)> = corpus.docs.iter().map(|d| (d.id.clone(), d.text.clone())).collect();
        let index = TfIdfIndex::build(&docs).unwrap();
        let candidates: Vec<Candidate> = corpus
            .docs
            .iter()
            .map(|d| Candidate { id: &d.id, vector: index.vector(&d.id).unwrap(), timestamp: d.timestamp })
            .collect();
        let q = index.vectorize(&corpus.queries[qi]);
        let mut prev = Vec::new();
        for k in 0..=candidates.len() + 1 {
            let cur = ids(&top_k(&q, &candidates, k));
            prop_assert_eq!(cur.len(), k.min(candidates.len()));
            prop_assert_eq!(&cur[..prev.len()], &prev[..]);
            prev = cur;
        }
    }
}
