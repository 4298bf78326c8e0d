use serde::{Deserialize, Serialize};

use super::PaperRecord;

/// Title, abstract, introduction, conclusion — the skim-level context of a
/// paper. Introduction and conclusion may be empty, with a warning recorded
/// by the extraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaicBundle {
    pub title: String,
    pub abstract_text: String,
    pub introduction: String,
    pub conclusion: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaicExtraction {
    pub bundle: TaicBundle,
    pub warnings: Vec<String>,
}

const INTRO_KEYWORDS: &[&str] = &["introduction", "intro"];
const CONCLUSION_KEYWORDS: &[&str] = &["conclusion", "conclusions", "discussion and conclusion"];

/// Extracts the TAIC bundle. Introduction is the concatenation of every
/// section whose normalized heading matches the intro rule; conclusion
/// likewise. Missing sections produce empty fields plus a warning.
pub fn extract_taic(record: &PaperRecord) -> TaicExtraction {
    let mut intro_parts = Vec::new();
    let mut conclusion_parts = Vec::new();
    for section in &record.sections {
        let normalized = normalize_heading(&section.heading);
        if section.body.is_empty() {
            continue;
        }
        if matches_keyword(&normalized, INTRO_KEYWORDS) {
            intro_parts.push(section.body.as_str());
        } else if matches_keyword(&normalized, CONCLUSION_KEYWORDS) {
            conclusion_parts.push(section.body.as_str());
        }
    }

    let mut warnings = Vec::new();
    if intro_parts.is_empty() {
        warnings.push(format!("{}: no introduction-like section found", record.paper_id));
    }
    if conclusion_parts.is_empty() {
        warnings.push(format!("{}: no conclusion-like section found", record.paper_id));
    }

    TaicExtraction {
        bundle: TaicBundle {
            title: record.title.clone(),
            abstract_text: record.abstract_text.clone(),
            introduction: intro_parts.join("\n\n"),
            conclusion: conclusion_parts.join("\n\n"),
        },
        warnings,
    }
}

/// Case-fold, strip leading numbering and punctuation, collapse whitespace.
fn normalize_heading(heading: &str) -> String {
    let lower = heading.to_lowercase();
    let stripped = lower
        .trim_start_matches(|c: char| c.is_ascii_digit() || c.is_ascii_punctuation() || c.is_whitespace());
    let without_tail = stripped.trim_end_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace());
    without_tail.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Prefix match with a word boundary after the keyword, so "intro and
/// motivation" matches but "introspection methods" does not.
fn matches_keyword(normalized: &str, keywords: &[&str]) -> bool {
    keywords.iter().any(|kw| {
        normalized.starts_with(kw)
            && normalized[kw.len()..]
                .chars()
                .next()
                .is_none_or(|c| !c.is_alphanumeric())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SectionBlock;

    fn record(sections: &[(&str, &str)]) -> PaperRecord {
        PaperRecord {
            paper_id: "p".into(),
            title: "T".into(),
            abstract_text: "A".into(),
            authors: vec![],
            year: None,
            sections: sections
                .iter()
                .enumerate()
                .map(|(i, (heading, body))| SectionBlock {
                    heading: (*heading).to_owned(),
                    body: (*body).to_owned(),
                    index: Some(i),
                })
                .collect(),
            bibliography: vec![],
        }
    }

    #[test]
    fn numbered_headings_match_directly() {
        let r = record(&[
            ("1 Introduction", "intro body"),
            ("2 Method", "method body"),
            ("7 Conclusion", "conclusion body"),
        ]);
        let out = extract_taic(&r);
        assert_eq!(out.bundle.introduction, "intro body");
        assert_eq!(out.bundle.conclusion, "conclusion body");
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn prefix_rule_matches_compound_headings() {
        let r = record(&[("Intro and Motivation", "the intro")]);
        let out = extract_taic(&r);
        assert_eq!(out.bundle.introduction, "the intro");
    }

    #[test]
    fn missing_conclusion_is_empty_with_warning() {
        let r = record(&[("1 Introduction", "x")]);
        let out = extract_taic(&r);
        assert_eq!(out.bundle.conclusion, "");
        assert_eq!(out.warnings.len(), 1);
        assert!(out.warnings[0].contains("conclusion"));
    }

    #[test]
    fn introspection_does_not_match_intro() {
        let r = record(&[("Introspection Methods", "x")]);
        let out = extract_taic(&r);
        assert_eq!(out.bundle.introduction, "");
    }

    #[test]
    fn discussion_and_conclusion_matches() {
        let r = record(&[("5. Discussion and Conclusion", "wrap-up")]);
        let out = extract_taic(&r);
        assert_eq!(out.bundle.conclusion, "wrap-up");
    }

    #[test]
    fn multiple_intro_sections_concatenate_in_order() {
        let r = record(&[("Introduction", "one"), ("Intro continued", "two")]);
        let out = extract_taic(&r);
        assert_eq!(out.bundle.introduction, "one\n\ntwo");
    }
}
