//! Core library for feature-based related-work generation: paper ingestion,
//! citation-network feature extraction, prompt assembly under a variant
//! matrix, cited-text-span retrieval, and deterministic evaluation metrics.
//!
//! The pipeline orchestration and CLI live in the companion `relgen-cli`
//! crate; everything here is plain library code with no I/O beyond the
//! feature cache and the (optional) remote chat-completion transport.

pub mod backend;
pub mod cts;
pub mod graph;
pub mod hash;
pub mod ingest;
pub mod metrics;
pub mod prompt;

pub use backend::{BackendClient, BackendError, BackendProfile, ChatRequest, ChatResponse};
pub use cts::{CtsCandidate, CtsQuery, CtsSelection};
pub use graph::{CitationNetwork, EdgeRelation, EnrichedUsage, FacetedSummary, NodeFeature};
pub use ingest::{BibEntry, CitationMention, CitationSpan, PaperRecord, SectionBlock, TaicBundle};
pub use metrics::{CorrelationResult, Fragment, RougeScore, StyleLabel};
pub use prompt::{GenerationUnit, PromptBundle, VariantId, VariantSpec};
