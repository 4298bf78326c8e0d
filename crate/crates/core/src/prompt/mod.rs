//! Prompt templates, the A-H feature-variant matrix, and token-budgeted
//! chunk planning. Rendering is pure and byte-deterministic; golden-file
//! tests pin the exact template text.

mod chunk;
mod render;
mod variant;

pub use chunk::{
    assign_main_ideas, parse_plan_file, plan_chunks, ChunkPaper, GenerationUnit, LayoutGroup,
    MainIdeaPlan, PlanSource, PlanUnit,
};
pub use render::{
    render_faceted_prompt, render_generation_prompt, render_main_idea_prompt,
    render_paper_block, render_relation_prompt, render_usage_prompt, FeatureDigest, FeatureKind,
    GenerationContext, PromptBundle, UsageGroup,
};
pub use variant::{variant_features, VariantId, VariantSpec};

use thiserror::Error;

/// Bumping this invalidates every feature cache entry.
pub const TEMPLATE_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("record `{0}` has an empty abstract")]
    EmptyAbstract(String),
    #[error("no gold related-work text available; supply a human plan instead")]
    MissingGoldText,
    #[error("no citation spans to enumerate")]
    NoSpans,
    #[error("no per-citing groups to enumerate")]
    NoGroups,
    #[error("node `{0}` does not carry a faceted summary")]
    NotFaceted(String),
    #[error("unknown variant id `{0}`")]
    UnknownVariant(String),
    #[error("paper `{paper_id}` is missing required feature {feature}")]
    MissingFeature { paper_id: String, feature: &'static str },
    #[error("unit {unit_index} estimates {estimated} tokens over budget {budget}; re-chunk with more units")]
    OverBudget { unit_index: usize, estimated: usize, budget: usize },
    #[error("feature block of `{paper_id}` alone estimates {tokens} tokens against budget {budget}")]
    PaperBlockOverBudget { paper_id: String, tokens: usize, budget: usize },
    #[error("budget {budget} does not exceed fixed overhead {overhead}")]
    BudgetTooSmall { budget: usize, overhead: usize },
    #[error("gold layout does not cover the cited list (missing: {missing:?}, extra: {extra:?})")]
    LayoutMismatch { missing: Vec<String>, extra: Vec<String> },
    #[error("unit cites `{0}` which is not in the network")]
    UnknownPaper(String),
}
