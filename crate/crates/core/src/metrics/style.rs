use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::ingest::CitationMention;

/// Sentence-level discourse roles of the writing-style analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiscourseRole {
    Transition,
    #[serde(rename = "Single-Sum")]
    SingleSum,
    Narrative,
    Reflection,
    #[serde(rename = "Multi-Sum")]
    MultiSum,
}

impl DiscourseRole {
    pub const ALL: [DiscourseRole; 5] = [
        DiscourseRole::Transition,
        DiscourseRole::SingleSum,
        DiscourseRole::Narrative,
        DiscourseRole::Reflection,
        DiscourseRole::MultiSum,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CitationType {
    Dominant,
    Reference,
}

/// An externally supplied (or heuristically derived) label for one
/// sentence: its discourse role and the type of each citation instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleLabel {
    pub sentence_index: usize,
    pub discourse_role: DiscourseRole,
    #[serde(default)]
    pub citation_types: Vec<CitationType>,
}

/// Percentages over sentences (per role) and citation instances (per type).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleDistribution {
    pub role_percent: BTreeMap<DiscourseRole, f64>,
    pub dominant_percent: f64,
    pub reference_percent: f64,
    pub sentence_count: usize,
    pub citation_count: usize,
}

/// Per-role percentage over sentences and dominant/reference percentage
/// over citation instances. Percentages sum to 100 up to rounding.
pub fn style_distribution(labels: &[StyleLabel]) -> Result<StyleDistribution, MetricsError> {
    if labels.is_empty() {
        return Err(MetricsError::EmptyLabels);
    }
    let sentence_count = labels.len();
    let mut role_percent = BTreeMap::new();
    for role in DiscourseRole::ALL {
        let hits = labels.iter().filter(|l| l.discourse_role == role).count();
        role_percent.insert(role, 100.0 * hits as f64 / sentence_count as f64);
    }
    let citation_count: usize = labels.iter().map(|l| l.citation_types.len()).sum();
    let dominant: usize = labels
        .iter()
        .flat_map(|l| &l.citation_types)
        .filter(|t| **t == CitationType::Dominant)
        .count();
    let (dominant_percent, reference_percent) = if citation_count == 0 {
        (0.0, 0.0)
    } else {
        let d = 100.0 * dominant as f64 / citation_count as f64;
        (d, 100.0 - d)
    };
    Ok(StyleDistribution {
        role_percent,
        dominant_percent,
        reference_percent,
        sentence_count,
        citation_count,
    })
}

// Words that typically realize a finite verb right after a subject marker.
const VERB_LIST: &[&str] = &[
    "is", "are", "was", "were", "has", "have", "had", "can", "could", "may", "show", "shows",
    "propose", "proposes", "present", "presents", "introduce", "introduces", "use", "uses",
    "develop", "develops", "demonstrate", "demonstrates", "find", "finds", "found", "extend",
    "extends", "build", "builds", "built", "apply", "applies", "report", "reports", "argue",
    "argues", "study", "studies", "explore", "explores", "investigate", "investigates",
    "train", "trains", "provide", "provides", "describe", "describes", "focus", "focuses",
    "leverage", "leverages", "combine", "combines", "frame", "frames", "address", "addresses",
];

/// Heuristic stand-in for a trained citation-type tagger. A marker acting
/// as the sentence subject (start of the clause, followed by a finite
/// verb) is dominant; parenthetical and trailing bracket-only markers are
/// reference.
pub fn classify_citation_usage_heuristic(
    sentence: &str,
    mentions: &[CitationMention],
) -> Vec<CitationType> {
    mentions
        .iter()
        .map(|m| classify_one(sentence, m))
        .collect()
}

fn classify_one(sentence: &str, mention: &CitationMention) -> CitationType {
    if inside_parentheses(sentence, mention.start) {
        return CitationType::Reference;
    }
    let before = &sentence[..mention.start.min(sentence.len())];
    let clause_start = !before.contains([';', ':']);
    let prefix_words = before
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .count();
    if clause_start && prefix_words <= 3 && followed_by_finite_verb(sentence, mention.end) {
        return CitationType::Dominant;
    }
    CitationType::Reference
}

fn inside_parentheses(sentence: &str, offset: usize) -> bool {
    let mut depth = 0i32;
    for ch in sentence[..offset.min(sentence.len())].chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
    }
    depth > 0
}

fn followed_by_finite_verb(sentence: &str, end: usize) -> bool {
    sentence[end.min(sentence.len())..]
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .take(3)
        .any(|word| {
            let w = word.to_lowercase();
            VERB_LIST.contains(&w.as_str()) || (w.len() > 3 && w.ends_with("ed"))
        })
}

/// Labels a whole text with the heuristic tagger: citation types only, one
/// label per sentence. Discourse roles need the trained tagger and are not
/// guessed; [`DiscourseRole::SingleSum`] is used as a placeholder role for
/// sentences carrying citations and `Narrative` otherwise, and callers that
/// care about roles should supply external labels instead.
pub fn heuristic_citation_labels(
    sentences: &[crate::ingest::Sentence],
    mentions: &[CitationMention],
) -> Vec<StyleLabel> {
    sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let local: Vec<CitationMention> = mentions
                .iter()
                .filter(|m| m.start >= s.start && m.start < s.end)
                .map(|m| CitationMention {
                    bib_id: m.bib_id.clone(),
                    surface: m.surface.clone(),
                    start: m.start - s.start,
                    end: m.end - s.start,
                    style: m.style,
                })
                .collect();
            let citation_types = classify_citation_usage_heuristic(&s.text, &local);
            StyleLabel {
                sentence_index: i,
                discourse_role: if citation_types.is_empty() {
                    DiscourseRole::Narrative
                } else {
                    DiscourseRole::SingleSum
                },
                citation_types,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::detect_citation_mentions;
    use crate::ingest::BibEntry;

    fn bib() -> Vec<BibEntry> {
        vec![
            BibEntry {
                bib_id: "luu".into(),
                title: "Explaining".into(),
                first_author: "Luu".into(),
                year: Some(2021),
            },
            BibEntry {
                bib_id: "radford".into(),
                title: "GPT-2".into(),
                first_author: "Radford".into(),
                year: Some(2019),
            },
            BibEntry {
                bib_id: "smith".into(),
                title: "S".into(),
                first_author: "Smith".into(),
                year: Some(2020),
            },
        ]
    }

    #[test]
    fn worked_example_dominant_then_reference() {
        let sentence = "Luu et al. (2021) fine-tuned GPT-2 (Radford et al., 2019) to predict citation sentences.";
        let mentions = detect_citation_mentions(sentence, &bib());
        assert_eq!(mentions.len(), 2);
        let classes = classify_citation_usage_heuristic(sentence, &mentions);
        assert_eq!(classes, vec![CitationType::Dominant, CitationType::Reference]);
    }

    #[test]
    fn numeric_subject_is_dominant() {
        let sentence = "[3] proposed X.";
        let bibliography = vec![
            BibEntry { bib_id: "1".into(), title: "a".into(), first_author: "A".into(), year: None },
            BibEntry { bib_id: "2".into(), title: "b".into(), first_author: "B".into(), year: None },
            BibEntry { bib_id: "3".into(), title: "c".into(), first_author: "C".into(), year: None },
        ];
        let mentions = detect_citation_mentions(sentence, &bibliography);
        let classes = classify_citation_usage_heuristic(sentence, &mentions);
        assert_eq!(classes, vec![CitationType::Dominant]);
    }

    #[test]
    fn parenthetical_is_reference() {
        let sentence = "This mirrors earlier findings, as in prior work (Smith, 2020).";
        let mentions = detect_citation_mentions(sentence, &bib());
        let classes = classify_citation_usage_heuristic(sentence, &mentions);
        assert_eq!(classes, vec![CitationType::Reference]);
    }

    #[test]
    fn distribution_arithmetic() {
        let labels = vec![
            StyleLabel { sentence_index: 0, discourse_role: DiscourseRole::Transition, citation_types: vec![CitationType::Dominant] },
            StyleLabel { sentence_index: 1, discourse_role: DiscourseRole::SingleSum, citation_types: vec![CitationType::Reference] },
            StyleLabel { sentence_index: 2, discourse_role: DiscourseRole::SingleSum, citation_types: vec![CitationType::Reference] },
            StyleLabel { sentence_index: 3, discourse_role: DiscourseRole::Reflection, citation_types: vec![CitationType::Reference] },
        ];
        let d = style_distribution(&labels).unwrap();
        assert_eq!(d.role_percent[&DiscourseRole::Transition], 25.0);
        assert_eq!(d.role_percent[&DiscourseRole::SingleSum], 50.0);
        assert_eq!(d.role_percent[&DiscourseRole::Reflection], 25.0);
        assert_eq!(d.role_percent[&DiscourseRole::Narrative], 0.0);
        assert_eq!(d.dominant_percent, 25.0);
        assert_eq!(d.reference_percent, 75.0);
        let total: f64 = d.role_percent.values().sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn single_role_is_one_hundred_percent() {
        let labels = vec![StyleLabel {
            sentence_index: 0,
            discourse_role: DiscourseRole::Narrative,
            citation_types: vec![],
        }];
        let d = style_distribution(&labels).unwrap();
        assert_eq!(d.role_percent[&DiscourseRole::Narrative], 100.0);
        assert_eq!(d.citation_count, 0);
    }

    #[test]
    fn empty_labels_error() {
        assert!(style_distribution(&[]).is_err());
    }
}
