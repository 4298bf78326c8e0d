//! Cited-text-span retrieval: ROUGE-ranked sentences from cited-paper
//! full texts, queried with candidate citation spans extracted from a
//! generated draft, plus assembly of the CTS-augmented regeneration
//! bundle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::estimate_tokens;
use crate::ingest::{extract_citation_spans, BibEntry, PaperRecord};
use crate::metrics::{rouge_n, tokenize_for_metrics};
use crate::prompt::{
    render_generation_prompt, variant_features, GenerationContext, GenerationUnit, PromptBundle,
    PromptError, VariantId,
};

/// Hard cap on retrieved sentences per cited paper.
pub const K_CAP_LIMIT: usize = 10;

#[derive(Debug, Error)]
pub enum CtsError {
    #[error("cited record `{0}` has no body sentences")]
    NoBodySentences(String),
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
}

/// Retrieval request for one cited paper. `k_cap` is clamped to
/// [`K_CAP_LIMIT`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtsQuery {
    pub cited_id: String,
    /// Candidate citation span(s) from the draft, concatenated.
    pub query_span: String,
    pub k_cap: usize,
    pub token_budget_for_cts: usize,
    /// Skip the cited paper's own related-work-like sections, so retrieval
    /// does not surface its citations of third papers.
    pub exclude_related_work: bool,
}

impl CtsQuery {
    pub fn new(cited_id: impl Into<String>, query_span: impl Into<String>) -> Self {
        Self {
            cited_id: cited_id.into(),
            query_span: query_span.into(),
            k_cap: K_CAP_LIMIT,
            token_budget_for_cts: 600,
            exclude_related_work: true,
        }
    }

    pub fn with_k_cap(mut self, k_cap: usize) -> Self {
        self.k_cap = k_cap.clamp(1, K_CAP_LIMIT);
        self
    }

    pub fn with_token_budget(mut self, budget: usize) -> Self {
        self.token_budget_for_cts = budget;
        self
    }
}

/// One scored body sentence. `score` is the mean of ROUGE-1 and ROUGE-2
/// recall of the sentence against the query span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtsCandidate {
    pub sentence: String,
    pub section_heading: String,
    pub position: usize,
    pub score: f64,
}

/// The retrieved top-k sentences, sorted by score descending with ties by
/// document position ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtsSelection {
    pub cited_id: String,
    pub chosen: Vec<CtsCandidate>,
    pub k_effective: usize,
}

/// Candidate citation spans per cited id, extracted from the draft with
/// the same marker detection and span-expansion rules as ingestion. Ids
/// never mentioned map to empty lists, feeding the dropped-citation lint.
pub fn extract_query_spans(
    draft: &str,
    bibliography: &[BibEntry],
) -> BTreeMap<String, Vec<String>> {
    let host = PaperRecord {
        paper_id: "draft".to_owned(),
        title: String::new(),
        abstract_text: String::new(),
        authors: vec![],
        year: None,
        sections: vec![crate::ingest::SectionBlock {
            heading: "draft".to_owned(),
            body: draft.to_owned(),
            index: Some(0),
        }],
        bibliography: bibliography.to_vec(),
    };
    let mut spans_by_id = BTreeMap::new();
    for entry in bibliography {
        let spans = extract_citation_spans(&host, &entry.bib_id)
            .map(|spans| spans.iter().map(|s| s.text()).collect())
            .unwrap_or_default();
        spans_by_id.insert(entry.bib_id.clone(), spans);
    }
    spans_by_id
}

/// Mean of ROUGE-1 and ROUGE-2 recall of `sentence` against `query` (the
/// query span is the reference). Empty queries score 0 by convention.
pub fn score_candidate(query: &str, sentence: &str) -> f64 {
    let reference = tokenize_for_metrics(query);
    let candidate = tokenize_for_metrics(sentence);
    let r1 = rouge_n(&candidate, &reference, 1).recall;
    let r2 = rouge_n(&candidate, &reference, 2).recall;
    (r1 + r2) / 2.0
}

/// Scores every body sentence of the cited record and keeps the top-k,
/// trimming from the bottom until the token budget is satisfied.
pub fn retrieve_cts(query: &CtsQuery, cited_record: &PaperRecord) -> Result<CtsSelection, CtsError> {
    let mut candidates = Vec::new();
    let mut position = 0;
    for section in &cited_record.sections {
        let skip = query.exclude_related_work && is_related_work_heading(&section.heading);
        for sentence in crate::ingest::segment_sentences(&section.body) {
            if skip {
                position += 1;
                continue;
            }
            candidates.push(CtsCandidate {
                score: score_candidate(&query.query_span, &sentence.text),
                sentence: sentence.text,
                section_heading: section.heading.clone(),
                position,
            });
            position += 1;
        }
    }
    if candidates.is_empty() {
        return Err(CtsError::NoBodySentences(cited_record.paper_id.clone()));
    }
    let chosen = select_top(candidates, query.k_cap, query.token_budget_for_cts);
    Ok(CtsSelection {
        cited_id: query.cited_id.clone(),
        k_effective: chosen.len(),
        chosen,
    })
}

/// Total-order selection: score descending, position ascending, capped at
/// `k_cap` (never above [`K_CAP_LIMIT`]), then trimmed from the bottom to
/// fit the token budget. Invariant to the input order of candidates.
pub fn select_top(
    mut candidates: Vec<CtsCandidate>,
    k_cap: usize,
    token_budget: usize,
) -> Vec<CtsCandidate> {
    candidates.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.position.cmp(&b.position))
    });
    candidates.truncate(k_cap.min(K_CAP_LIMIT));
    let rendered_tokens = |c: &CtsCandidate| {
        estimate_tokens(&format!("[{}] {}", c.section_heading, c.sentence))
    };
    let mut total: usize = candidates.iter().map(rendered_tokens).sum();
    while total > token_budget && !candidates.is_empty() {
        let dropped = candidates.pop().expect("non-empty");
        total -= rendered_tokens(&dropped);
    }
    candidates
}

fn is_related_work_heading(heading: &str) -> bool {
    let normalized = heading.to_lowercase();
    normalized.contains("related work") || normalized.contains("literature review")
}

/// Renders the variant-H bundle for a unit: identical to the variant-A
/// bundle except for the per-paper "Potentially useful sentences" blocks.
/// Papers without selections get no CTS block.
pub fn augment_with_cts(
    ctx: &GenerationContext<'_>,
    unit: &GenerationUnit,
    selections: &BTreeMap<String, CtsSelection>,
) -> Result<PromptBundle, PromptError> {
    let variant = variant_features(VariantId::H);
    render_generation_prompt(&variant, ctx, unit, Some(selections))
}
