//! Paper-facing parsing layer: parsed-record loading, TAIC extraction,
//! citation-marker detection, citation-span extraction, and sentence
//! segmentation.
//!
//! Everything here is pure and stateless. Offsets are byte offsets into
//! the decoded UTF-8 text.

mod mentions;
mod record;
mod sentences;
mod spans;
mod taic;

pub use mentions::{detect_citation_mentions, CitationMention, CitationStyle};
pub use record::{load_paper_record, BibEntry, PaperRecord, SectionBlock};
pub use sentences::{segment_sentences, segment_sentences_with, Sentence, DEFAULT_ABBREVIATIONS};
pub use spans::{extract_citation_spans, CitationSpan, CONTINUATION_CUES, MAX_SPAN_SENTENCES};
pub use taic::{extract_taic, TaicBundle, TaicExtraction};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("record is not valid UTF-8: {0}")]
    Utf8(#[from] std::str::Utf8Error),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("duplicate bib_id `{0}` in bibliography")]
    DuplicateBibId(String),
    #[error("sections[{position}] has index {index}, not strictly increasing")]
    SectionOrder { position: usize, index: usize },
    #[error("unknown bib_id `{0}`")]
    UnknownBibId(String),
}
