use serde::{Deserialize, Serialize};

use super::GraphError;

/// Five-facet structured summary serving as a citation-network node
/// feature: objective, method, findings, contribution, keywords.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetedSummary {
    pub objective: String,
    pub method: String,
    pub findings: String,
    pub contribution: String,
    pub keywords: Vec<String>,
}

impl FacetedSummary {
    /// The block exactly as it appears inside prompts. Parsing this back
    /// with [`parse_faceted_output`] returns an equal value.
    pub fn canonical_block(&self) -> String {
        format!(
            "Objective: {}\nMethod: {}\nFindings: {}\nContribution: {}\nKeywords: {}",
            self.objective,
            self.method,
            self.findings,
            self.contribution,
            self.keywords.join("; ")
        )
    }
}

const FACET_LABELS: [(&str, &[&str]); 5] = [
    ("objective", &["objective", "objectives"]),
    ("method", &["method", "methods"]),
    ("findings", &["findings", "finding"]),
    ("contribution", &["contribution", "contributions"]),
    ("keywords", &["keywords", "keyword"]),
];

/// Labeled-line parse of a faceted-summary completion. Tolerant to extra
/// whitespace, blank lines, and label reordering; labels match
/// case-insensitively; keywords split on ";" with the trailing period
/// stripped. Missing labels are an error listing every absent one.
pub fn parse_faceted_output(completion: &str) -> Result<FacetedSummary, GraphError> {
    let mut values: [Option<String>; 5] = Default::default();
    let mut current: Option<usize> = None;

    for line in completion.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some((slot, value)) = match_label(trimmed) {
            values[slot] = Some(value.to_owned());
            current = Some(slot);
        } else if let Some(slot) = current {
            // continuation of the previous facet
            let entry = values[slot].get_or_insert_with(String::new);
            if !entry.is_empty() {
                entry.push('\n');
            }
            entry.push_str(trimmed);
        }
    }

    let missing: Vec<&str> = FACET_LABELS
        .iter()
        .zip(&values)
        .filter(|(_, v)| v.as_deref().is_none_or(str::is_empty))
        .map(|((name, _), _)| *name)
        .collect();
    if !missing.is_empty() {
        return Err(GraphError::ParseFailure {
            operation: "faceted_summary".into(),
            reason: format!("missing labels: {}", missing.join(", ")),
            raw: completion.to_owned(),
        });
    }

    let [objective, method, findings, contribution, keywords_line] =
        values.map(Option::unwrap);
    let keywords: Vec<String> = keywords_line
        .trim_end()
        .trim_end_matches('.')
        .split(';')
        .map(str::trim)
        .filter(|k| !k.is_empty())
        .map(str::to_owned)
        .collect();
    if keywords.is_empty() {
        return Err(GraphError::ParseFailure {
            operation: "faceted_summary".into(),
            reason: "keywords list is empty".into(),
            raw: completion.to_owned(),
        });
    }

    Ok(FacetedSummary { objective, method, findings, contribution, keywords })
}

fn match_label(line: &str) -> Option<(usize, &str)> {
    let colon = line.find(':')?;
    let (label, rest) = line.split_at(colon);
    let label = label.trim().to_lowercase();
    for (slot, (_, aliases)) in FACET_LABELS.iter().enumerate() {
        if aliases.contains(&label.as_str()) {
            return Some((slot, rest[1..].trim()));
        }
    }
    None
}
