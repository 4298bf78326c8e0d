//! Deterministic evaluation kernels: ROUGE-1/2/L, extractive-fragment
//! coverage/density, Kendall's tau with tie correction, and writing-style
//! distributions over labeled sentences.
//!
//! All functions here are pure. The tokenization rule is shared across
//! ROUGE, fragments, and CTS scoring so the scores compose.

mod fragments;
mod kendall;
pub mod report;
mod rouge;
mod style;

pub use fragments::{coverage_density, extractive_fragments, Fragment};
pub use kendall::{kendall_tau, CorrelationResult};
pub use report::{ExtractivenessRow, MetricsReport, RougeRow, StyleSummary};
pub use rouge::{rouge_l, rouge_n, tokenize_for_metrics, RougeScore};
pub use style::{
    classify_citation_usage_heuristic, heuristic_citation_labels, style_distribution,
    CitationType, DiscourseRole, StyleDistribution, StyleLabel,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("series length mismatch: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("series too short for correlation: {0} < 2")]
    SeriesTooShort(usize),
    #[error("series contains a non-finite value")]
    NonFiniteValue,
    #[error("generated token sequence is empty")]
    EmptyGenerated,
    #[error("no style labels given")]
    EmptyLabels,
}
