//! Personalized prompt rendering.
//!
//! The prompt is assembled from five fixed sections: base (task, labels and
//! content), the user's own hits, community hits, preferences plus concepts,
//! and the answer instruction. Hit lines carry their score and label in a
//! fixed shape so that a reader without the context (the mock backend) can
//! recover them.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::context_engine::{ContextHit, Query, SemanticContext, TaskKind};

pub const ARTICLE_MARKER: &str = "article: ";
pub const MAX_TEXT_CHARS: usize = 200;
pub const NONE_MARKER: &str = "(none)";

pub const USER_HEADER: &str = "## Your past interactions (most relevant first):";
pub const COMMUNITY_HEADER: &str = "## Similar interactions from the community:";
pub const PREFERENCES_HEADER: &str = "## Your category preferences:";
pub const CONCEPTS_HEADER: &str = "## Related concepts:";
pub const CLASSIFICATION_ANSWER: &str = "Answer with a single category name.";
pub const RATING_ANSWER: &str = "Answer with a single integer rating 1-5.";
pub const CATEGORIES_PREFIX: &str = "Available categories: ";

const CLASSIFICATION_TASK: &str =
    "Classify the content into exactly one of the available categories for this user.";
const RATING_TASK: &str = "Predict the rating this user would give the content, from 1 to 5.";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("classification prompts need at least one label")]
    MissingLabels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PromptSection {
    Base,
    UserInteractions,
    CommunityInteractions,
    PreferencesAndConcepts,
    AnswerInstruction,
}

impl PromptSection {
    pub const ORDER: [PromptSection; 5] = [
        PromptSection::Base,
        PromptSection::UserInteractions,
        PromptSection::CommunityInteractions,
        PromptSection::PreferencesAndConcepts,
        PromptSection::AnswerInstruction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptSection::Base => "base",
            PromptSection::UserInteractions => "user_interactions",
            PromptSection::CommunityInteractions => "community_interactions",
            PromptSection::PreferencesAndConcepts => "preferences_and_concepts",
            PromptSection::AnswerInstruction => "answer_instruction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub text: String,
    pub sections: Vec<(PromptSection, String)>,
}

impl Prompt {
    pub fn section(&self, which: PromptSection) -> Option<&str> {
        self.sections
            .iter()
            .find(|(s, _)| *s == which)
            .map(|(_, body)| body.as_str())
    }
}

/// Task content of a query: the text after the first `article: ` marker
/// (case-insensitive), or the whole text, trimmed either way.
pub fn extract_task_content(q: &Query) -> String {
    content_of(&q.text)
}

fn content_of(text: &str) -> String {
    // ASCII lowercasing keeps byte offsets aligned with the original
    let lowered = text.to_ascii_lowercase();
    match lowered.find(ARTICLE_MARKER) {
        Some(pos) => text[pos + ARTICLE_MARKER.len()..].trim().to_string(),
        None => text.trim().to_string(),
    }
}

pub fn build_prompt(q: &Query, ctx: &SemanticContext, categories: &[String]) -> Result<Prompt, PromptError> {
    let labels: BTreeSet<&str> = categories.iter().map(String::as_str).collect();
    if q.task == TaskKind::Classification && labels.is_empty() {
        return Err(PromptError::MissingLabels);
    }

    let mut base = String::new();
    match q.task {
        TaskKind::Classification => {
            let _ = writeln!(base, "Task: {CLASSIFICATION_TASK}");
            let list: Vec<&str> = labels.into_iter().collect();
            let _ = writeln!(base, "{CATEGORIES_PREFIX}{}", list.join(", "));
        }
        TaskKind::Rating => {
            let _ = writeln!(base, "Task: {RATING_TASK}");
        }
    }
    let _ = write!(base, "\nContent:\n{}\n\n", extract_task_content(q));

    let user = hit_section(USER_HEADER, &ctx.user_hits, q.task);
    let community = hit_section(COMMUNITY_HEADER, &ctx.global_hits, q.task);

    let mut prefs = format!("{PREFERENCES_HEADER}\n");
    match &ctx.category_prefs {
        Some(p) if !p.distribution.is_empty() => {
            for share in &p.distribution {
                let _ = writeln!(prefs, "- {}: {:.2}", share.label, share.probability);
            }
        }
        _ => prefs.push_str("(none)\n"),
    }
    let _ = writeln!(prefs, "{CONCEPTS_HEADER}");
    if ctx.concepts.is_empty() {
        prefs.push_str("(none)\n");
    } else {
        let _ = writeln!(prefs, "- {}", ctx.concepts.join(", "));
    }

    let answer = match q.task {
        TaskKind::Classification => format!("{CLASSIFICATION_ANSWER}\n"),
        TaskKind::Rating => format!("{RATING_ANSWER}\n"),
    };

    let sections = vec![
        (PromptSection::Base, base),
        (PromptSection::UserInteractions, user),
        (PromptSection::CommunityInteractions, community),
        (PromptSection::PreferencesAndConcepts, prefs),
        (PromptSection::AnswerInstruction, answer),
    ];
    let text = sections.iter().map(|(_, body)| body.as_str()).collect();
    Ok(Prompt { text, sections })
}

fn hit_section(header: &str, hits: &[ContextHit], task: TaskKind) -> String {
    let mut out = format!("{header}\n");
    if hits.is_empty() {
        out.push_str("(none)\n");
    }
    for hit in hits {
        out.push_str(&hit_line(hit, task));
        out.push('\n');
    }
    out
}

/// `- [score=0.742] (category: politics) Title: text`
pub fn hit_line(hit: &ContextHit, task: TaskKind) -> String {
    let label_kind = match task {
        TaskKind::Classification => "category",
        TaskKind::Rating => "rating",
    };
    let title = single_line(&hit.title);
    let text = truncate_chars(&single_line(&hit.text), MAX_TEXT_CHARS);
    let body = if title.is_empty() {
        text
    } else {
        format!("{title}: {text}")
    };
    format!(
        "- [score={:.3}] ({label_kind}: {}) {body}",
        hit.score(),
        single_line(&hit.category)
    )
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn truncate_chars(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((cut, _)) => format!("{}…", &s[..cut]),
        None => s.to_string(),
    }
}
