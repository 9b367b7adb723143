//! Concept extraction, concept co-occurrence edges, and concept communities.
//!
//! Extraction is pattern based: maximal runs of capitalized tokens become
//! concepts, plus any entry of an optional domain lexicon found in the text.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::graph_store::{Edge, EdgeKind, KnowledgeGraph};
use crate::stopwords::is_stopword;

/// Longest concept, in tokens. Longer capitalized runs are split.
pub const MAX_CONCEPT_TOKENS: usize = 4;
pub const DEFAULT_MIN_COUNT: u64 = 2;
pub const MAX_SWEEPS: usize = 20;

#[derive(Debug, Error)]
pub enum ConceptError {
    #[error("edge {src} -> {dst} references a node outside the concept set")]
    DanglingEdge { src: String, dst: String },
    #[error("cannot read lexicon {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Domain keyword list. Matching is case-insensitive on word boundaries;
/// hits are reported in the lexicon's own casing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: Vec<String>,
}

impl Lexicon {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let entries = entries
            .into_iter()
            .map(Into::into)
            .map(|s: String| s.trim().to_string())
            .filter(|s| !s.is_empty() && seen.insert(s.to_lowercase()))
            .collect();
        Lexicon { entries }
    }

    /// One keyword per line; blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> Result<Self, ConceptError> {
        let text = fs::read_to_string(path).map_err(|source| ConceptError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::parse(&text))
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }
}

struct RunToken<'a> {
    word: &'a str,
    offset: usize,
    sentence_initial: bool,
}

/// Extracts concept surfaces from `text` in order of first appearance,
/// deduplicated case-insensitively. A lexicon hit wins over a pattern
/// concept with the same lowercase form.
pub fn extract_concepts(text: &str, lexicon: Option<&Lexicon>) -> Vec<String> {
    // (byte offset in text, surface, from lexicon)
    let mut found: Vec<(usize, String, bool)> = Vec::new();

    let mut run: Vec<RunToken> = Vec::new();
    let mut sentence_start = true;
    for (offset, raw) in split_whitespace_indices(text) {
        let Some((lead, core, trail)) = split_punct(raw) else {
            flush_run(&mut run, &mut found);
            if raw.contains(['.', '!', '?']) {
                sentence_start = true;
            }
            continue;
        };
        if !lead.is_empty() {
            flush_run(&mut run, &mut found);
        }
        if core.chars().next().is_some_and(char::is_uppercase) {
            run.push(RunToken {
                word: core,
                offset: offset + lead.len(),
                sentence_initial: sentence_start,
            });
        } else {
            flush_run(&mut run, &mut found);
        }
        if !trail.is_empty() {
            flush_run(&mut run, &mut found);
        }
        sentence_start = trail.contains(['.', '!', '?']);
    }
    flush_run(&mut run, &mut found);

    if let Some(lexicon) = lexicon {
        let (lower, offsets) = lowercase_with_offsets(text);
        for entry in lexicon.entries() {
            if let Some(pos) = find_word(&lower, &entry.to_lowercase()) {
                found.push((offsets[pos], entry.clone(), true));
            }
        }
    }

    let lexicon_keys: BTreeSet<String> = found
        .iter()
        .filter(|(_, _, lex)| *lex)
        .map(|(_, s, _)| s.to_lowercase())
        .collect();
    found.retain(|(_, s, lex)| *lex || !lexicon_keys.contains(&s.to_lowercase()));
    found.sort_by_key(|(pos, _, lex)| (*pos, *lex));

    let mut seen = BTreeSet::new();
    found
        .into_iter()
        .filter(|(_, s, _)| seen.insert(s.to_lowercase()))
        .map(|(_, s, _)| s)
        .collect()
}

fn flush_run(run: &mut Vec<RunToken>, found: &mut Vec<(usize, String, bool)>) {
    if run.is_empty() {
        return;
    }
    let mut tokens: &[RunToken] = run;
    if tokens[0].sentence_initial && is_stopword(&tokens[0].word.to_lowercase()) {
        tokens = &tokens[1..];
    }
    for chunk in tokens.chunks(MAX_CONCEPT_TOKENS) {
        let surface = chunk.iter().map(|t| t.word).collect::<Vec<_>>().join(" ");
        if surface.chars().count() >= 2 {
            found.push((chunk[0].offset, surface, false));
        }
    }
    run.clear();
}

fn split_whitespace_indices(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split(char::is_whitespace)
        .filter(|s| !s.is_empty())
        .map(move |s| (s.as_ptr() as usize - text.as_ptr() as usize, s))
}

/// Splits a raw token into (leading punctuation, core, trailing punctuation).
/// `None` when the token has no alphanumeric character.
fn split_punct(raw: &str) -> Option<(&str, &str, &str)> {
    let start = raw.find(char::is_alphanumeric)?;
    let end = raw
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_alphanumeric())
        .map(|(i, c)| i + c.len_utf8())?;
    Some((&raw[..start], &raw[start..end], &raw[end..]))
}

/// Lowercases `text`, returning a map from byte offsets in the lowered
/// string back to byte offsets in the original.
fn lowercase_with_offsets(text: &str) -> (String, Vec<usize>) {
    let mut lower = String::with_capacity(text.len());
    let mut offsets = Vec::with_capacity(text.len() + 1);
    for (i, c) in text.char_indices() {
        for lc in c.to_lowercase() {
            for _ in 0..lc.len_utf8() {
                offsets.push(i);
            }
            lower.push(lc);
        }
    }
    offsets.push(text.len());
    (lower, offsets)
}

fn find_word(haystack: &str, needle: &str) -> Option<usize> {
    if needle.is_empty() {
        return None;
    }
    let mut from = 0;
    while let Some(rel) = haystack[from..].find(needle) {
        let start = from + rel;
        let end = start + needle.len();
        let before_ok = haystack[..start]
            .chars()
            .next_back()
            .is_none_or(|c| !c.is_alphanumeric());
        let after_ok = haystack[end..]
            .chars()
            .next()
            .is_none_or(|c| !c.is_alphanumeric());
        if before_ok && after_ok {
            return Some(start);
        }
        from = start + haystack[start..].chars().next().map_or(1, char::len_utf8);
    }
    None
}

/// Derives Concept↔Concept edges from a frozen graph.
///
/// The weight of a pair is the number of interactions linked to both. A pair
/// becomes an edge when its weight reaches `min_count`, or when it co-occurs
/// at least once and both concepts share the same dominant category (the
/// most frequent category over their linked interactions, ties to the
/// smallest label).
pub fn build_cooccurrence_edges(graph: &KnowledgeGraph, min_count: u64) -> Vec<Edge> {
    build_cooccurrence_edges_with(graph, min_count, Execution::default())
}

pub fn build_cooccurrence_edges_with(
    graph: &KnowledgeGraph,
    min_count: u64,
    exec: Execution,
) -> Vec<Edge> {
    let interactions: Vec<_> = graph.interactions().collect();
    let pair_counts = exec.fold_reduce(
        &interactions,
        BTreeMap::<(&str, &str), u64>::new,
        |mut acc, node| {
            let concepts: Vec<&str> = graph
                .neighbor_ids(&node.id, EdgeKind::InteractionConcept)
                .collect();
            for (i, a) in concepts.iter().enumerate() {
                for b in &concepts[i + 1..] {
                    *acc.entry((*a, *b)).or_default() += 1;
                }
            }
            acc
        },
        merge_counts,
    );

    let dominant = dominant_categories(graph);
    let mut edges: Vec<Edge> = pair_counts
        .into_iter()
        .filter(|((a, b), count)| {
            *count >= min_count || (*count >= 1 && dominant.get(a) == dominant.get(b))
        })
        .map(|((a, b), count)| Edge::concept_pair(a, b, count as f64))
        .collect();
    edges.sort_by(|x, y| {
        y.weight
            .total_cmp(&x.weight)
            .then_with(|| x.src.cmp(&y.src))
            .then_with(|| x.dst.cmp(&y.dst))
    });
    edges
}

fn merge_counts<'a>(
    mut a: BTreeMap<(&'a str, &'a str), u64>,
    b: BTreeMap<(&'a str, &'a str), u64>,
) -> BTreeMap<(&'a str, &'a str), u64> {
    if a.len() < b.len() {
        return merge_counts(b, a);
    }
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

fn dominant_categories(graph: &KnowledgeGraph) -> BTreeMap<&str, &str> {
    graph
        .concepts()
        .filter_map(|concept| {
            let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
            for iid in graph.neighbor_ids(&concept.id, EdgeKind::InteractionConcept) {
                if let Some(node) = graph.interaction(iid) {
                    *counts.entry(node.category.as_str()).or_default() += 1;
                }
            }
            // max_by keeps the last maximum; iterate in reverse so ties go to the smallest label
            counts
                .into_iter()
                .rev()
                .max_by_key(|(_, n)| *n)
                .map(|(cat, _)| (concept.id.as_str(), cat))
        })
        .collect()
}

/// Disjoint communities over the concept graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConceptPartition {
    pub communities: Vec<BTreeSet<String>>,
    pub assignment: BTreeMap<String, usize>,
}

impl ConceptPartition {
    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("partition is plain data")
    }
}

/// Deterministic label propagation.
///
/// Every node starts with its own id as label. Nodes are visited in id order
/// and adopt, in place, the most frequent label among their neighbors (ties
/// to the smallest label). Sweeps stop at a fixed point or after
/// [`MAX_SWEEPS`]. Communities are numbered by their smallest member id.
pub fn detect_communities(
    concept_edges: &[Edge],
    concept_ids: &BTreeSet<String>,
) -> Result<ConceptPartition, ConceptError> {
    let ids: Vec<&str> = concept_ids.iter().map(String::as_str).collect();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();

    let mut neighbors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ids.len()];
    for e in concept_edges {
        let (Some(&s), Some(&d)) = (index.get(e.src.as_str()), index.get(e.dst.as_str())) else {
            return Err(ConceptError::DanglingEdge {
                src: e.src.clone(),
                dst: e.dst.clone(),
            });
        };
        if s != d {
            neighbors[s].insert(d);
            neighbors[d].insert(s);
        }
    }

    // labels are indices into `ids`; smaller index == lexicographically smaller id
    let mut labels: Vec<usize> = (0..ids.len()).collect();
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for node in 0..ids.len() {
            if neighbors[node].is_empty() {
                continue;
            }
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for &n in &neighbors[node] {
                *counts.entry(labels[n]).or_default() += 1;
            }
            let best = counts
                .into_iter()
                .rev()
                .max_by_key(|(_, c)| *c)
                .map(|(label, _)| label)
                .expect("non-empty neighborhood");
            if best != labels[node] {
                labels[node] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (node, label) in labels.iter().enumerate() {
        groups.entry(*label).or_default().insert(ids[node].to_string());
    }
    let mut communities: Vec<BTreeSet<String>> = groups.into_values().collect();
    communities.sort_by(|a, b| a.first().cmp(&b.first()));
    let assignment = communities
        .iter()
        .enumerate()
        .flat_map(|(i, set)| set.iter().map(move |id| (id.clone(), i)))
        .collect();
    Ok(ConceptPartition {
        communities,
        assignment,
    })
}

/// Communities over every concept node of the graph, using its installed
/// Concept↔Concept edges.
pub fn graph_communities(graph: &KnowledgeGraph) -> Result<ConceptPartition, ConceptError> {
    let ids: BTreeSet<String> = graph.concepts().map(|c| c.id.clone()).collect();
    detect_communities(&graph.edges_of_kind(EdgeKind::ConceptConcept), &ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_store::InteractionInput;

    fn ex(text: &str) -> Vec<String> {
        extract_concepts(text, None)
    }

    #[test]
    fn capitalized_runs() {
        assert_eq!(ex("Parkland survivor wrote for Teen Vogue"), ["Parkland", "Teen Vogue"]);
        assert_eq!(ex("The March On Washington"), ["March On Washington"]);
        assert!(ex("").is_empty());
        assert!(ex("all lowercase words here").is_empty());
    }

    #[test]
    fn lexicon_hits_use_lexicon_casing() {
        let lex = Lexicon::new(["gun law"]);
        assert_eq!(extract_concepts("new gun law reform", Some(&lex)), ["gun law"]);
        let lex = Lexicon::new(["Gun Law"]);
        assert_eq!(extract_concepts("new GUN LAW reform", Some(&lex)), ["Gun Law"]);
        // word boundaries
        assert!(extract_concepts("shotgun lawyer", Some(&Lexicon::new(["gun law"]))).is_empty());
    }

    #[test]
    fn lexicon_wins_case_insensitive_collision() {
        let lex = Lexicon::new(["teen vogue"]);
        assert_eq!(
            extract_concepts("Essay in Teen Vogue", Some(&lex)),
            ["Essay", "teen vogue"]
        );
    }

    #[test]
    fn sentence_boundaries_and_punctuation() {
        // "The" after a period is sentence-initial; mid-sentence it stays
        assert_eq!(ex("Hello there. The Atlantic wrote"), ["Hello", "Atlantic"]);
        assert_eq!(ex("he read The Atlantic daily"), ["The Atlantic"]);
        // punctuation ends a run
        assert_eq!(ex("Paris, France"), ["Paris", "France"]);
        assert_eq!(ex("(New York) Times"), ["New York", "Times"]);
    }

    #[test]
    fn long_runs_split_and_short_dropped() {
        assert_eq!(
            ex("Teen Survivors Of Florida Shooting To March On Washington"),
            ["Teen Survivors Of Florida", "Shooting To March On", "Washington"]
        );
        assert!(ex("a I x").is_empty());
        assert_eq!(ex("say A B"), ["A B"]);
    }

    #[test]
    fn duplicates_keep_first() {
        assert_eq!(ex("Obama met Biden. Obama left"), ["Obama", "Biden"]);
    }

    #[test]
    fn lexicon_file_format() {
        let lex = Lexicon::parse("# domain terms\ngun law\n\n  youth activism \n# end\nGun Law\n");
        assert_eq!(lex.entries(), ["gun law", "youth activism"]);
    }

    fn graph_from(items: &[(&str, &str)]) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for (i, (category, text)) in items.iter().enumerate() {
            g.add_interaction(
                &InteractionInput {
                    user_id: "u".into(),
                    title: String::new(),
                    text: text.to_string(),
                    category: category.to_string(),
                    timestamp: i as i64,
                },
                None,
            )
            .unwrap();
        }
        g
    }

    #[test]
    fn cooccurrence_threshold() {
        let g = graph_from(&[("x", "Alpha met Beta"), ("y", "Alpha met Beta")]);
        let edges = build_cooccurrence_edges(&g, 2);
        assert_eq!(edges, vec![Edge::concept_pair("c:Alpha", "c:Beta", 2.0)]);
    }

    #[test]
    fn cooccurrence_different_dominant_categories() {
        // Alpha is mostly politics, Gamma mostly sports; they meet once.
        let g = graph_from(&[
            ("politics", "Alpha spoke"),
            ("politics", "Alpha voted"),
            ("sports", "Gamma scored"),
            ("sports", "Gamma won"),
            ("sports", "Alpha watched Gamma"),
        ]);
        assert!(build_cooccurrence_edges(&g, 2).is_empty());
        assert_eq!(
            build_cooccurrence_edges(&g, 1),
            vec![Edge::concept_pair("c:Alpha", "c:Gamma", 1.0)]
        );
    }

    #[test]
    fn cooccurrence_shared_dominant_category() {
        let g = graph_from(&[("politics", "Alpha spoke"), ("politics", "Alpha met Gamma")]);
        assert_eq!(
            build_cooccurrence_edges(&g, 2),
            vec![Edge::concept_pair("c:Alpha", "c:Gamma", 1.0)]
        );
    }

    #[test]
    fn cooccurrence_sorted_by_weight() {
        let g = graph_from(&[
            ("a", "Alpha Beta. Cat"),
            ("a", "Beta. Cat"),
            ("a", "Dog. Alpha Beta"),
            ("a", "Beta and Cat"),
        ]);
        let edges = build_cooccurrence_edges(&g, 2);
        let triples: Vec<_> = edges
            .iter()
            .map(|e| (e.src.as_str(), e.dst.as_str(), e.weight))
            .collect();
        assert_eq!(
            triples,
            [
                ("c:Beta", "c:Cat", 2.0),
                ("c:Alpha Beta", "c:Cat", 1.0),
                ("c:Alpha Beta", "c:Dog", 1.0),
            ]
        );
    }

    fn ids(list: &[&str]) -> BTreeSet<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn set(list: &[&str]) -> BTreeSet<String> {
        ids(list)
    }

    #[test]
    fn two_disjoint_triangles() {
        let edges = [
            Edge::concept_pair("A", "B", 1.0),
            Edge::concept_pair("B", "C", 1.0),
            Edge::concept_pair("A", "C", 1.0),
            Edge::concept_pair("D", "E", 1.0),
            Edge::concept_pair("E", "F", 1.0),
            Edge::concept_pair("D", "F", 1.0),
        ];
        let p = detect_communities(&edges, &ids(&["A", "B", "C", "D", "E", "F"])).unwrap();
        assert_eq!(p.communities, vec![set(&["A", "B", "C"]), set(&["D", "E", "F"])]);
        assert_eq!(p.assignment["E"], 1);
    }

    #[test]
    fn singleton() {
        let p = detect_communities(&[], &ids(&["X"])).unwrap();
        assert_eq!(p.communities, vec![set(&["X"])]);
        assert!(detect_communities(&[], &BTreeSet::new()).unwrap().is_empty());
    }

    #[test]
    fn path_collapses_to_one_community() {
        // Hand-run: sweep 1 sets A..E to label B (ties resolve to B each
        // time); sweep 2 changes nothing.
        let edges = [
            Edge::concept_pair("A", "B", 1.0),
            Edge::concept_pair("B", "C", 1.0),
            Edge::concept_pair("C", "D", 1.0),
            Edge::concept_pair("D", "E", 1.0),
        ];
        let p = detect_communities(&edges, &ids(&["A", "B", "C", "D", "E"])).unwrap();
        assert_eq!(p.communities, vec![set(&["A", "B", "C", "D", "E"])]);
    }

    #[test]
    fn dangling_edge() {
        let edges = [Edge::concept_pair("A", "Z", 1.0)];
        assert!(matches!(
            detect_communities(&edges, &ids(&["A"])),
            Err(ConceptError::DanglingEdge { .. })
        ));
    }
}
