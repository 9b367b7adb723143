//! Optional TOML configuration file.
//!
//! Every field is optional; anything set here is overridden by the matching
//! environment variable or command-line flag.

use std::path::{Path, PathBuf};

use anyhow::Context as _;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub min_count: Option<u64>,
    #[serde(default)]
    pub retrieval: RetrievalSection,
    #[serde(default)]
    pub llm: LlmSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalSection {
    pub k_user: Option<usize>,
    pub k_global: Option<usize>,
    pub m_concepts: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmSection {
    pub backend: Option<String>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_key_env: Option<String>,
    pub max_in_flight: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: FileConfig = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        // relative paths in the file are resolved against its directory
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: Option<PathBuf>| p.map(|p| if p.is_relative() { base.join(p) } else { p });
        Ok(FileConfig {
            data: rebase(cfg.data),
            snapshot: rebase(cfg.snapshot),
            lexicon: rebase(cfg.lexicon),
            ..cfg
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_rebases_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("personarag.toml");
        std::fs::write(
            &path,
            "data = \"news.jsonl\"\nmin_count = 3\n[retrieval]\nk_global = 0\n[llm]\nbackend = \"mock\"\n",
        )
        .unwrap();
        let cfg = FileConfig::load(&path).unwrap();
        assert_eq!(cfg.data, Some(dir.path().join("news.jsonl")));
        assert_eq!(cfg.min_count, Some(3));
        assert_eq!(cfg.retrieval.k_global, Some(0));
        assert_eq!(cfg.llm.backend.as_deref(), Some("mock"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "k_users = 3\n").unwrap();
        assert!(FileConfig::load(&path).is_err());
    }
}
