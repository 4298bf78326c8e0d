use serde::{Deserialize, Serialize};

use super::IngestError;

/// One parsed paper, the consumed output of an external PDF-to-JSON step.
/// The schema is a declared subset of the doc2json/S2ORC shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub sections: Vec<SectionBlock>,
    #[serde(default)]
    pub bibliography: Vec<BibEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionBlock {
    pub heading: String,
    #[serde(default)]
    pub body: String,
    /// Ordinal within the record; assigned from position when absent.
    #[serde(default)]
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BibEntry {
    pub bib_id: String,
    pub title: String,
    /// Last name of the first author, as it appears in citation markers.
    pub first_author: String,
    #[serde(default)]
    pub year: Option<i32>,
}

impl PaperRecord {
    pub fn bib_entry(&self, bib_id: &str) -> Option<&BibEntry> {
        self.bibliography.iter().find(|b| b.bib_id == bib_id)
    }
}

/// Parses and validates one record file. Unknown JSON fields are ignored;
/// schema violations name the offending path.
pub fn load_paper_record(bytes: &[u8]) -> Result<PaperRecord, IngestError> {
    let text = std::str::from_utf8(bytes)?;
    let mut de = serde_json::Deserializer::from_str(text);
    let mut record: PaperRecord = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        IngestError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        }
    })?;

    if record.paper_id.is_empty() {
        return Err(IngestError::Schema {
            path: "paper_id".into(),
            message: "must be non-empty".into(),
        });
    }

    // Explicit section indices must be strictly increasing; gaps are fine.
    let mut prev: Option<usize> = None;
    for (pos, section) in record.sections.iter_mut().enumerate() {
        let effective = section
            .index
            .unwrap_or_else(|| prev.map_or(0, |p| p + 1));
        if let Some(p) = prev {
            if effective <= p {
                return Err(IngestError::SectionOrder { position: pos, index: effective });
            }
        }
        section.index = Some(effective);
        prev = Some(effective);
    }

    let mut seen = std::collections::HashSet::new();
    for entry in &record.bibliography {
        if !seen.insert(entry.bib_id.as_str()) {
            return Err(IngestError::DuplicateBibId(entry.bib_id.clone()));
        }
    }

    Ok(record)
}
