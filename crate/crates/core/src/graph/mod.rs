//! The local citation network: per-paper faceted summaries (nodes),
//! pairwise relationship texts (directed edges), and per-cited-paper
//! enriched intent/usage summaries, all derived through the chat backend
//! and memoized in the on-disk feature cache.

mod build;
mod cache;
mod faceted;

pub use build::{bib_id_linking, build_network, NetworkBuilder};
pub use cache::{CachedValue, FeatureCache, FeatureCacheKey};
pub use faceted::{parse_faceted_output, FacetedSummary};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::BackendError;
use crate::ingest::{CitationSpan, IngestError};

/// Which content a node contributes to a generation prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeMode {
    Faceted,
    Abstract,
}

/// One paper in the network. Degraded nodes stand in for cited papers whose
/// records could not be retrieved; they carry bibliography metadata only
/// and are excluded from relation and usage derivation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub paper_id: String,
    pub title: String,
    pub first_author: String,
    pub year: Option<i32>,
    #[serde(default)]
    pub abstract_text: String,
    #[serde(default)]
    pub faceted: Option<FacetedSummary>,
    #[serde(default)]
    pub degraded: bool,
}

impl NetworkNode {
    /// The node feature under `mode`; errors on degraded nodes and on
    /// abstract mode without an abstract.
    pub fn feature(&self, mode: NodeMode) -> Result<NodeFeature, GraphError> {
        let content = match mode {
            NodeMode::Faceted => NodeContent::Faceted(
                self.faceted
                    .clone()
                    .ok_or_else(|| GraphError::MissingNodeContent {
                        paper_id: self.paper_id.clone(),
                        mode,
                    })?,
            ),
            NodeMode::Abstract => {
                if self.abstract_text.is_empty() {
                    return Err(GraphError::MissingNodeContent {
                        paper_id: self.paper_id.clone(),
                        mode,
                    });
                }
                NodeContent::Abstract(self.abstract_text.clone())
            }
        };
        Ok(NodeFeature {
            paper_id: self.paper_id.clone(),
            title: self.title.clone(),
            first_author: self.first_author.clone(),
            year: self.year,
            content,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeContent {
    Faceted(FacetedSummary),
    Abstract(String),
}

/// A node feature as consumed by prompt rendering: paper metadata plus
/// either the faceted summary or the raw abstract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFeature {
    pub paper_id: String,
    pub title: String,
    pub first_author: String,
    pub year: Option<i32>,
    pub content: NodeContent,
}

impl NodeFeature {
    pub fn mode(&self) -> NodeMode {
        match self.content {
            NodeContent::Faceted(_) => NodeMode::Faceted,
            NodeContent::Abstract(_) => NodeMode::Abstract,
        }
    }

    /// The content block as it appears in prompts: the canonical faceted
    /// block, or the abstract text.
    pub fn content_block(&self) -> String {
        match &self.content {
            NodeContent::Faceted(f) => f.canonical_block(),
            NodeContent::Abstract(a) => a.clone(),
        }
    }

    /// "{year}" with a stable placeholder for undated papers.
    pub fn year_label(&self) -> String {
        self.year.map_or_else(|| "n.d.".to_owned(), |y| y.to_string())
    }

    /// "{author} et al. {year}".
    pub fn short_label(&self) -> String {
        format!("{} et al. {}", self.first_author, self.year_label())
    }

    /// "{title} by {author} et al. {year}".
    pub fn full_label(&self) -> String {
        format!("{} by {}", self.title, self.short_label())
    }
}

/// Directed relationship: `from_id` cites `to_id`, summarized in one short
/// natural-language description with the supporting citation spans kept
/// for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRelation {
    pub from_id: String,
    pub to_id: String,
    pub relation_text: String,
    pub marker: String,
    pub supporting_spans: Vec<CitationSpan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UsageClass {
    Dominant,
    Reference,
}

/// Discursive summary of all edges incident to a cited paper: what it is
/// known for, what it is cited for, and its majority usage class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedUsage {
    pub paper_id: String,
    pub known_for: String,
    pub cited_for: String,
    pub usage_class: UsageClass,
    /// True when the class came from the keyword fallback rather than a
    /// literal "dominant"/"reference" token in the completion.
    #[serde(default)]
    pub class_from_fallback: bool,
    /// The raw completion, kept verbatim for prompt rendering.
    pub raw_text: String,
}

/// Local citation network centered on the target paper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationNetwork {
    pub target_id: String,
    pub nodes: BTreeMap<String, NetworkNode>,
    pub edges: Vec<EdgeRelation>,
    pub usages: BTreeMap<String, EnrichedUsage>,
}

impl CitationNetwork {
    pub fn node(&self, paper_id: &str) -> Option<&NetworkNode> {
        self.nodes.get(paper_id)
    }

    /// Incoming edges of `paper_id`, ordered by citing paper id.
    pub fn incident_edges(&self, paper_id: &str) -> Vec<&EdgeRelation> {
        self.edges.iter().filter(|e| e.to_id == paper_id).collect()
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cited record list is empty")]
    EmptyCitedList,
    #[error("duplicate paper_id `{0}` across records")]
    DuplicatePaperId(String),
    #[error("node `{paper_id}` has no {mode:?} content")]
    MissingNodeContent { paper_id: String, mode: NodeMode },
    #[error("no citation spans given for edge {from_id} -> {to_id}")]
    EmptySpans { from_id: String, to_id: String },
    #[error("span host `{got}` does not match citing paper `{expected}`")]
    WrongSpanHost { expected: String, got: String },
    #[error("no incident edges for usage of `{0}`")]
    EmptyIncidentEdges(String),
    #[error("incident edge targets `{got}`, expected `{expected}`")]
    MismatchedIncidentEdge { expected: String, got: String },
    #[error("{operation} completion failed to parse ({reason}); raw: {raw:?}")]
    ParseFailure { operation: String, reason: String, raw: String },
    #[error("backend call failed for cache key {key_digest}: {source}")]
    Backend {
        key_digest: String,
        #[source]
        source: BackendError,
    },
    #[error("feature cache I/O at {path}: {source}")]
    Cache {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Prompt(#[from] crate::prompt::PromptError),
}
