/// One segmented sentence; `text` equals the host text sliced by
/// `[start, end)` (byte offsets).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Fixed guard list for the rule-based splitter.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &["et al.", "e.g.", "i.e.", "Fig.", "Eq.", "vs."];

/// Rule-based segmentation: split after `.`, `?`, or `!` followed by
/// whitespace and an uppercase letter, unless the terminal closes a listed
/// abbreviation. Deterministic by construction.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    segment_sentences_with(text, DEFAULT_ABBREVIATIONS)
}

pub fn segment_sentences_with(text: &str, abbreviations: &[&str]) -> Vec<Sentence> {
    let mut sentences = Vec::new();
    let mut sentence_start: Option<usize> = None;

    let mut chars = text.char_indices().peekable();
    while let Some((i, ch)) = chars.next() {
        if sentence_start.is_none() && !ch.is_whitespace() {
            sentence_start = Some(i);
        }
        if !matches!(ch, '.' | '?' | '!') {
            continue;
        }
        let terminal_end = i + ch.len_utf8();
        if !splits_here(text, terminal_end, abbreviations) {
            continue;
        }
        if let Some(start) = sentence_start.take() {
            sentences.push(Sentence {
                text: text[start..terminal_end].to_owned(),
                start,
                end: terminal_end,
            });
        }
    }

    if let Some(start) = sentence_start {
        let end = start + text[start..].trim_end().len();
        if end > start {
            sentences.push(Sentence { text: text[start..end].to_owned(), start, end });
        }
    }
    sentences
}

/// Boundary test at the byte just past a terminal: requires whitespace then
/// an uppercase letter, and rejects terminals that complete an abbreviation
/// starting at a word boundary.
fn splits_here(text: &str, terminal_end: usize, abbreviations: &[&str]) -> bool {
    let rest = &text[terminal_end..];
    let trimmed = rest.trim_start();
    if trimmed.len() == rest.len() {
        return false; // no whitespace after the terminal
    }
    match trimmed.chars().next() {
        Some(c) if c.is_uppercase() => {}
        _ => return false,
    }
    let head = &text[..terminal_end];
    !abbreviations.iter().any(|abbr| {
        head.ends_with(abbr) && {
            let abbr_start = head.len() - abbr.len();
            abbr_start == 0
                || head[..abbr_start]
                    .chars()
                    .next_back()
                    .is_some_and(|c| !c.is_alphanumeric())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_split() {
        let s = segment_sentences("One. Two.");
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].text, "One.");
        assert_eq!(s[1].text, "Two.");
        assert_eq!((s[1].start, s[1].end), (5, 9));
    }

    #[test]
    fn empty_input_yields_nothing() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences("   \n ").is_empty());
    }

    #[test]
    fn listed_abbreviation_suppresses_the_split() {
        let s = segment_sentences_with("A. B.", &["A."]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].text, "A. B.");
    }

    #[test]
    fn default_abbreviations_hold_sentences_together() {
        let s = segment_sentences("We follow Smith et al. Their work uses Eq. Three as a basis.");
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn abbreviation_needs_a_word_boundary() {
        // "DNA." ends with "A." but is a full word, so the split stands.
        let s = segment_sentences_with("We sequence DNA. Results follow.", &["A."]);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        let s = segment_sentences("This uses v1.2 of the tool. see below.");
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn offsets_slice_back_to_the_text() {
        let text = "  First point! Second point? Third.";
        for sent in segment_sentences(text) {
            assert_eq!(&text[sent.start..sent.end], sent.text);
        }
    }

    #[test]
    fn offsets_partition_without_overlap() {
        let text = "Alpha beta. Gamma delta! Epsilon? Zeta eta.";
        let sents = segment_sentences(text);
        assert_eq!(sents.len(), 4);
        for pair in sents.windows(2) {
            assert!(pair[0].end <= pair[1].start);
        }
        assert!(sents.iter().all(|s| !s.text.is_empty()));
    }
}
