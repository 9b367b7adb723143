//! Persona-driven retrieval over a heterogeneous interaction graph.
//!
//! Interactions, the concepts mentioned in them and their categories form a
//! graph. A TF-IDF index over interaction text retrieves a user's own
//! relevant history plus similar interactions from other users, and the
//! result is rendered into a prompt for a completion backend.

pub mod concept_extract;
pub mod context_engine;
pub mod eval_harness;
pub mod exec;
pub mod graph_store;
pub mod llm_gateway;
pub mod prompt_builder;
pub mod stopwords;
pub mod tfidf_index;

pub use concept_extract::{extract_concepts, Lexicon};
pub use context_engine::{ContextEngine, Query, RetrievalConfig, SemanticContext, TaskKind};
pub use exec::Execution;
pub use graph_store::{EdgeKind, GraphError, InteractionInput, KnowledgeGraph};
pub use llm_gateway::{BackendKind, CompletionRequest, Gateway, LlmError};
pub use prompt_builder::{build_prompt, Prompt};
pub use tfidf_index::{TfIdfIndex, TfIdfVector};
