use serde::{Deserialize, Serialize};

use super::{detect_citation_mentions, segment_sentences, IngestError, PaperRecord};

/// Sentence cues that continue a citation span into the next sentence.
pub const CONTINUATION_CUES: &[&str] = &["Their", "They", "This approach"];

/// Hard cap on span length, bounding error propagation of the heuristic.
pub const MAX_SPAN_SENTENCES: usize = 3;

/// A contiguous run of sentences explaining one citation of `bib_id`
/// inside `host_paper_id`. `position` is the document-wide ordinal of the
/// first sentence, strictly increasing across the spans of one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationSpan {
    pub bib_id: String,
    pub host_paper_id: String,
    pub sentences: Vec<String>,
    pub position: usize,
}

impl CitationSpan {
    /// The span flattened to one fragment of text.
    pub fn text(&self) -> String {
        self.sentences.join(" ")
    }
}

/// Collects sentence-aligned citation spans for `bib_id` across all body
/// sections: a span starts at a sentence mentioning the entry and extends
/// forward while the next sentence opens with a continuation cue, up to
/// [`MAX_SPAN_SENTENCES`].
pub fn extract_citation_spans(
    record: &PaperRecord,
    bib_id: &str,
) -> Result<Vec<CitationSpan>, IngestError> {
    if record.bib_entry(bib_id).is_none() {
        return Err(IngestError::UnknownBibId(bib_id.to_owned()));
    }

    let mut spans = Vec::new();
    let mut global_ordinal = 0;
    for section in &record.sections {
        let sentences = segment_sentences(&section.body);
        let mentions = detect_citation_mentions(&section.body, &record.bibliography);
        let mentioned: Vec<bool> = sentences
            .iter()
            .map(|s| {
                mentions.iter().any(|m| {
                    m.bib_id.as_deref() == Some(bib_id) && m.start >= s.start && m.start < s.end
                })
            })
            .collect();

        let mut i = 0;
        while i < sentences.len() {
            if !mentioned[i] {
                i += 1;
                continue;
            }
            let mut len = 1;
            while len < MAX_SPAN_SENTENCES
                && i + len < sentences.len()
                && starts_with_cue(&sentences[i + len].text)
            {
                len += 1;
            }
            spans.push(CitationSpan {
                bib_id: bib_id.to_owned(),
                host_paper_id: record.paper_id.clone(),
                sentences: sentences[i..i + len].iter().map(|s| s.text.clone()).collect(),
                position: global_ordinal + i,
            });
            i += len; // sentences inside the span never seed a new one
        }
        global_ordinal += sentences.len();
    }
    Ok(spans)
}

fn starts_with_cue(sentence: &str) -> bool {
    let s = sentence.trim_start();
    CONTINUATION_CUES.iter().any(|cue| {
        s.starts_with(cue)
            && s[cue.len()..]
                .chars()
                .next()
                .is_none_or(|c| !c.is_alphanumeric())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_paper_record, BibEntry, SectionBlock};

    fn record_with_body(body: &str) -> PaperRecord {
        PaperRecord {
            paper_id: "host".into(),
            title: "T".into(),
            abstract_text: "A".into(),
            authors: vec![],
            year: Some(2023),
            sections: vec![SectionBlock {
                heading: "1 Introduction".into(),
                body: body.into(),
                index: Some(0),
            }],
            bibliography: vec![BibEntry {
                bib_id: "smith".into(),
                title: "Prior work".into(),
                first_author: "Smith".into(),
                year: Some(2020),
            }],
        }
    }

    #[test]
    fn single_sentence_span() {
        let r = record_with_body("Smith et al. (2020) proposed X. Unrelated text follows.");
        let spans = extract_citation_spans(&r, "smith").unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].sentences.len(), 1);
        assert_eq!(spans[0].position, 0);
    }

    #[test]
    fn anaphora_continuation_joins_two_sentences() {
        let r = record_with_body(
            "We build on Smith et al. (2020). Their method aligns sentences. Unrelated text.",
        );
        let spans = extract_citation_spans(&r, "smith").unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].sentences.len(), 2);
        assert!(spans[0].sentences[1].starts_with("Their"));
    }

    #[test]
    fn span_length_is_capped() {
        let r = record_with_body(
            "Smith et al. (2020) proposed X. They refined it. Their code is public. They scaled it.",
        );
        let spans = extract_citation_spans(&r, "smith").unwrap();
        assert_eq!(spans[0].sentences.len(), MAX_SPAN_SENTENCES);
    }

    #[test]
    fn never_cited_entry_yields_empty_list() {
        let r = record_with_body("Nothing cites anything here.");
        assert!(extract_citation_spans(&r, "smith").unwrap().is_empty());
    }

    #[test]
    fn unknown_bib_id_is_an_error() {
        let r = record_with_body("text");
        assert!(matches!(
            extract_citation_spans(&r, "nope").unwrap_err(),
            IngestError::UnknownBibId(_)
        ));
    }

    #[test]
    fn positions_strictly_increase_across_sections() {
        let raw = br#"{"paper_id":"host","title":"T","abstract":"A",
            "sections":[
              {"heading":"1 Intro","body":"Smith et al. (2020) did X. Filler sentence here."},
              {"heading":"2 Method","body":"More filler. We extend Smith et al. (2020) directly."}],
            "bibliography":[{"bib_id":"smith","title":"P","first_author":"Smith","year":2020}]}"#;
        let r = load_paper_record(raw).unwrap();
        let spans = extract_citation_spans(&r, "smith").unwrap();
        assert_eq!(spans.len(), 2);
        assert!(spans[0].position < spans[1].position);
        assert_eq!(spans[1].position, 3);
    }
}
