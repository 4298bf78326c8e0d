use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::BibEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CitationStyle {
    AuthorYear,
    Numeric,
}

/// A citation marker located in host text. `start`/`end` are byte offsets
/// and `surface` always equals the host text sliced by them. `bib_id` is
/// `None` for markers that resolve to no bibliography entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationMention {
    pub bib_id: Option<String>,
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub style: CitationStyle,
}

// LastName( et al.)?,? (year) with optional parentheses and suffix letter.
fn author_year_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"\b(\p{Lu}[\p{L}'’\-]+)(\s+et\s+al\.?)?,?\s+\(?((?:19|20)\d{2})[a-z]?\)?",
        )
        .unwrap()
    })
}

// Bracketed numeric group with comma lists and an optional dash range.
fn numeric_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[\d+(?:,\s*\d+)*(?:\s*[–-]\s*\d+)?\]").unwrap())
}

// Capitalized function words that start sentences and precede years but
// can never be author last names.
const NOT_A_NAME: &[&str] = &[
    "In", "On", "By", "At", "To", "Of", "For", "From", "Since", "As", "And", "Or", "But",
    "The", "An", "With", "During", "Until", "While", "Before", "After", "Around", "About",
    "Between", "Table", "Figure", "Section", "Appendix", "Equation",
];

/// Finds author-year and numeric citation markers, resolves them against
/// the bibliography, and returns them sorted by start offset. Overlapping
/// matches are resolved longest-match-first. Markers that resolve to no
/// entry come back with `bib_id: None`.
pub fn detect_citation_mentions(text: &str, bibliography: &[BibEntry]) -> Vec<CitationMention> {
    // Each candidate is one text interval carrying one or more mentions
    // (numeric groups expand to one mention per listed entry).
    let mut candidates: Vec<(usize, usize, Vec<CitationMention>)> = Vec::new();

    for caps in author_year_re().captures_iter(text) {
        let whole = caps.get(0).unwrap();
        let last_name = caps.get(1).unwrap().as_str();
        if NOT_A_NAME.contains(&last_name) {
            continue;
        }
        let year: i32 = caps.get(3).unwrap().as_str().parse().unwrap();
        let bib_id = resolve_author_year(bibliography, last_name, year);
        candidates.push((
            whole.start(),
            whole.end(),
            vec![CitationMention {
                bib_id,
                surface: whole.as_str().to_owned(),
                start: whole.start(),
                end: whole.end(),
                style: CitationStyle::AuthorYear,
            }],
        ));
    }

    for m in numeric_re().find_iter(text) {
        let numbers = expand_numeric_group(m.as_str());
        let mentions = numbers
            .into_iter()
            .map(|k| CitationMention {
                bib_id: resolve_numeric(bibliography, k),
                surface: m.as_str().to_owned(),
                start: m.start(),
                end: m.end(),
                style: CitationStyle::Numeric,
            })
            .collect();
        candidates.push((m.start(), m.end(), mentions));
    }

    // Longest match first, then earliest; drop whatever overlaps a winner.
    candidates.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)));
    let mut taken: Vec<(usize, usize)> = Vec::new();
    let mut mentions = Vec::new();
    for (start, end, group) in candidates {
        if taken.iter().any(|&(s, e)| start < e && s < end) {
            continue;
        }
        taken.push((start, end));
        mentions.extend(group);
    }
    mentions.sort_by_key(|m| (m.start, m.bib_id.clone()));
    mentions
}

fn resolve_author_year(bibliography: &[BibEntry], last_name: &str, year: i32) -> Option<String> {
    let name_matches = |e: &&BibEntry| e.first_author.eq_ignore_ascii_case(last_name);
    bibliography
        .iter()
        .find(|e| name_matches(e) && e.year == Some(year))
        .or_else(|| bibliography.iter().find(|e| name_matches(e) && e.year.is_none()))
        .map(|e| e.bib_id.clone())
}

/// Numeric markers are matched by literal bib_id first, falling back to
/// the 1-based bibliography position.
fn resolve_numeric(bibliography: &[BibEntry], number: u32) -> Option<String> {
    let literal = number.to_string();
    if let Some(e) = bibliography.iter().find(|e| e.bib_id == literal) {
        return Some(e.bib_id.clone());
    }
    bibliography
        .get((number as usize).checked_sub(1)?)
        .map(|e| e.bib_id.clone())
}

fn expand_numeric_group(surface: &str) -> Vec<u32> {
    let inner = surface.trim_start_matches('[').trim_end_matches(']');
    let mut numbers = Vec::new();
    for piece in inner.split(',') {
        let piece = piece.trim();
        if let Some((lo, hi)) = piece.split_once(['–', '-']) {
            if let (Ok(lo), Ok(hi)) = (lo.trim().parse::<u32>(), hi.trim().parse::<u32>()) {
                if lo <= hi && hi - lo <= 100 {
                    numbers.extend(lo..=hi);
                }
            }
        } else if let Ok(k) = piece.parse::<u32>() {
            numbers.push(k);
        }
    }
    numbers
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bib(entries: &[(&str, &str, i32)]) -> Vec<BibEntry> {
        entries
            .iter()
            .map(|(id, author, year)| BibEntry {
                bib_id: (*id).to_owned(),
                title: format!("title of {id}"),
                first_author: (*author).to_owned(),
                year: Some(*year),
            })
            .collect()
    }

    #[test]
    fn canonical_author_year_resolves() {
        let b = bib(&[("smith", "Smith", 2023)]);
        let text = "as shown by Smith et al. (2023)";
        let m = detect_citation_mentions(text, &b);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].bib_id.as_deref(), Some("smith"));
        assert_eq!(m[0].style, CitationStyle::AuthorYear);
        assert_eq!(&text[m[0].start..m[0].end], m[0].surface);
        assert_eq!(m[0].surface, "Smith et al. (2023)");
    }

    #[test]
    fn bracket_group_expands_to_two_mentions() {
        let b = bib(&[("1", "A", 2001), ("2", "B", 2002), ("3", "C", 2003)]);
        let m = detect_citation_mentions("prior work [1, 3]", &b);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].bib_id.as_deref(), Some("1"));
        assert_eq!(m[1].bib_id.as_deref(), Some("3"));
        assert!(m.iter().all(|x| x.surface == "[1, 3]"));
    }

    #[test]
    fn figure_reference_is_not_a_citation() {
        let b = bib(&[("x", "X", 2020)]);
        assert!(detect_citation_mentions("(see Figure 3)", &b).is_empty());
    }

    #[test]
    fn numeric_range_expands() {
        let b = bib(&[("1", "A", 2001), ("2", "B", 2002), ("3", "C", 2003)]);
        let m = detect_citation_mentions("see [1-3]", &b);
        let ids: Vec<_> = m.iter().filter_map(|x| x.bib_id.as_deref()).collect();
        assert_eq!(ids, vec!["1", "2", "3"]);
    }

    #[test]
    fn numeric_falls_back_to_position() {
        let b = bib(&[("alpha", "A", 2001), ("beta", "B", 2002)]);
        let m = detect_citation_mentions("see [2]", &b);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].bib_id.as_deref(), Some("beta"));
    }

    #[test]
    fn parenthesized_list_splits_on_semicolons() {
        let b = bib(&[("s", "Smith", 2020), ("j", "Jones", 2021)]);
        let m = detect_citation_mentions("methods (Smith, 2020; Jones et al., 2021).", &b);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].bib_id.as_deref(), Some("s"));
        assert_eq!(m[1].bib_id.as_deref(), Some("j"));
    }

    #[test]
    fn unresolved_marker_keeps_unresolved_sentinel() {
        let b = bib(&[("s", "Smith", 2020)]);
        let m = detect_citation_mentions("per Unknownson (1999).", &b);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].bib_id, None);
    }

    #[test]
    fn mentions_are_sorted_and_slice_exact() {
        let b = bib(&[("s", "Smith", 2020), ("1", "A", 2001)]);
        let text = "First [1] then Smith (2020) again [1].";
        let m = detect_citation_mentions(text, &b);
        assert!(m.windows(2).all(|w| w[0].start <= w[1].start));
        for x in &m {
            assert_eq!(&text[x.start..x.end], x.surface);
        }
    }

    #[test]
    fn year_disambiguates_same_author() {
        let b = bib(&[("s20", "Smith", 2020), ("s21", "Smith", 2021)]);
        let m = detect_citation_mentions("Smith et al. (2021) extended this.", &b);
        assert_eq!(m[0].bib_id.as_deref(), Some("s21"));
    }
}
