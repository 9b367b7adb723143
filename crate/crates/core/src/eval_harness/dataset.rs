//! JSONL dataset records.
//!
//! One object per line:
//! `{"user_id":"u1","title":"...","text":"...","gold":"politics","timestamp":1700000000,"split":"history"}`.
//! Rating datasets carry an integer `gold`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gold {
    Rating(i64),
    Label(String),
}

impl fmt::Display for Gold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gold::Rating(r) => write!(f, "{r}"),
            Gold::Label(l) => f.write_str(l),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    History,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub user_id: String,
    #[serde(default)]
    pub title: String,
    pub text: String,
    pub gold: Gold,
    pub timestamp: i64,
    pub split: Split,
}

pub fn parse_dataset(text: &str) -> Result<Vec<DatasetRecord>, EvalError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| EvalError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_dataset(path: &Path) -> Result<Vec<DatasetRecord>, EvalError> {
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(&text)
}

/// The `n` users with the most history records, ties by user id.
pub fn select_eval_users(records: &[DatasetRecord], n: usize) -> Vec<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        let c = counts.entry(r.user_id.as_str()).or_default();
        if r.split == Split::History {
            *c += 1;
        }
    }
    let mut users: Vec<(&str, usize)> = counts.into_iter().collect();
    users.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    users.into_iter().take(n).map(|(u, _)| u.to_string()).collect()
}
