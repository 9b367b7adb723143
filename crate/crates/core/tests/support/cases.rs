//! Hand-built contexts shared by the golden-prompt and case-study tests.

#![allow(dead_code)]

use personarag::context_engine::{CategoryPreference, CategoryShare, ContextHit, Query, SemanticContext, TaskKind};
use personarag::graph_store::{InteractionInput, KnowledgeGraph};
use personarag::tfidf_index::ScoredInteraction;

pub const LONG_TEXT: &str = "Thousands of students who survived the Parkland shooting led a march through the capital, \
calling on lawmakers to pass stricter background checks and to stop taking money from gun lobby groups before the \
midterm elections in November.";

pub fn hit(id: &str, score: f64, category: &str, title: &str, text: &str) -> ContextHit {
    ContextHit {
        scored: ScoredInteraction {
            interaction_id: id.into(),
            score,
            timestamp: 0,
        },
        category: category.into(),
        title: title.into(),
        text: text.into(),
    }
}

fn shares(items: &[(&str, f64)]) -> Option<CategoryPreference> {
    Some(CategoryPreference {
        distribution: items
            .iter()
            .map(|(l, p)| CategoryShare { label: l.to_string(), probability: *p })
            .collect(),
    })
}

pub struct GoldenCase {
    pub name: &'static str,
    pub query: Query,
    pub context: SemanticContext,
    pub labels: Vec<String>,
}

pub fn golden_cases() -> Vec<GoldenCase> {
    vec![
        GoldenCase {
            name: "empty_context",
            query: Query::new("u1", "Which category does this article belong to? article: Senators vote today", TaskKind::Classification).unwrap(),
            context: SemanticContext::empty(),
            labels: vec!["sports".into(), "politics".into()],
        },
        GoldenCase {
            name: "classification",
            query: Query::new(
                "u1",
                "Which category does this article belong to? article: Parkland students plan a march on Washington",
                TaskKind::Classification,
            )
            .unwrap(),
            context: SemanticContext {
                user_hits: vec![
                    hit("i:u1:3", 0.742, "women", "Teen Vogue essay", "A Parkland survivor writes about gun laws for Teen Vogue."),
                    hit("i:u1:1", 0.31, "women", "", "Mothers organize\n  a weekend rally."),
                ],
                global_hits: vec![
                    hit("i:u2:4", 0.8126, "politics", "March On Washington", LONG_TEXT),
                    hit("i:u3:2", 0.5, "politics", "Senate vote", "Lawmakers met."),
                ],
                category_prefs: shares(&[("women", 0.75), ("politics", 0.25)]),
                concepts: vec!["Parkland".into(), "Teen Vogue".into(), "March On Washington".into()],
            },
            labels: vec!["women".into(), "politics".into(), "sports".into()],
        },
        GoldenCase {
            name: "rating",
            query: Query::new("r1", "Blender arrived quickly and works well", TaskKind::Rating).unwrap(),
            context: SemanticContext {
                user_hits: vec![hit("i:r1:2", 0.9, "5", "Great blender", "Crushes ice easily.")],
                global_hits: vec![hit("i:r2:1", 0.456789, "2", "", "Motor died after a week.")],
                category_prefs: shares(&[("4", 0.5), ("5", 0.5)]),
                concepts: vec![],
            },
            labels: vec![],
        },
    ]
}

fn add(g: &mut KnowledgeGraph, user: &str, text: &str, category: &str, ts: i64) {
    g.add_interaction(
        &InteractionInput {
            user_id: user.into(),
            title: String::new(),
            text: text.into(),
            category: category.into(),
            timestamp: ts,
        },
        None,
    )
    .unwrap();
}

/// A user whose history is entirely "women", asking about an article whose
/// closest matches in other users' histories are all "politics".
pub fn corrective_signal_graph() -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    add(&mut g, "alice", "essay on mothers balancing careers and childcare", "women", 1);
    add(&mut g, "alice", "female founders share leadership advice", "women", 2);
    add(&mut g, "alice", "survivor stories and the movement for equal pay", "women", 3);
    add(&mut g, "bob", "students march on the capitol demanding gun legislation from senators", "politics", 4);
    add(&mut g, "bob", "senators debate gun legislation after student protests", "politics", 5);
    add(&mut g, "carol", "capitol protest by students pressures congress on gun bill", "politics", 6);
    add(&mut g, "dave", "gun legislation vote scheduled in senate", "politics", 7);
    add(&mut g, "erin", "weekend recipes for busy parents", "food & drink", 8);
    g
}

pub const CORRECTIVE_QUERY: &str = "article: Students march to the capitol to demand senators pass gun legislation";
