use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// A maximal greedily-matched token run shared between a source text and
/// the generated text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub tokens: Vec<String>,
    pub source_start: usize,
    pub gen_start: usize,
}

impl Fragment {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Greedy left-to-right scan of the generated sequence: at each position
/// take the longest match occurring anywhere in the source (earliest source
/// occurrence on ties), advance by the match length, else by one. Matches
/// of length >= 1 become fragments.
pub fn extractive_fragments(source: &[String], generated: &[String]) -> Vec<Fragment> {
    let mut starts: HashMap<&str, Vec<usize>> = HashMap::new();
    for (j, tok) in source.iter().enumerate() {
        starts.entry(tok).or_default().push(j);
    }

    let mut fragments = Vec::new();
    let mut i = 0;
    while i < generated.len() {
        let mut best_len = 0;
        let mut best_src = 0;
        if let Some(positions) = starts.get(generated[i].as_str()) {
            for &j in positions {
                let mut len = 0;
                while i + len < generated.len()
                    && j + len < source.len()
                    && generated[i + len] == source[j + len]
                {
                    len += 1;
                }
                // strict > keeps the earliest source occurrence on ties
                if len > best_len {
                    best_len = len;
                    best_src = j;
                }
            }
        }
        if best_len >= 1 {
            fragments.push(Fragment {
                tokens: generated[i..i + best_len].to_vec(),
                source_start: best_src,
                gen_start: i,
            });
            i += best_len;
        } else {
            i += 1;
        }
    }
    fragments
}

/// Newsroom-style extractiveness: coverage = sum |f| / |S|,
/// density = sum |f|^2 / |S| over the generated length |S|.
pub fn coverage_density(
    fragments: &[Fragment],
    generated_len: usize,
) -> Result<(f64, f64), MetricsError> {
    if generated_len == 0 {
        return Err(MetricsError::EmptyGenerated);
    }
    let total: usize = fragments.iter().map(Fragment::len).sum();
    let squared: usize = fragments.iter().map(|f| f.len() * f.len()).sum();
    Ok((
        total as f64 / generated_len as f64,
        squared as f64 / generated_len as f64,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tokenize_for_metrics;

    fn toks(s: &str) -> Vec<String> {
        tokenize_for_metrics(s)
    }

    #[test]
    fn full_copy_is_one_fragment() {
        let src = toks("a b c d e f");
        let frags = extractive_fragments(&src, &src);
        assert_eq!(frags.len(), 1);
        assert_eq!(frags[0].len(), 6);
        assert_eq!(frags[0].source_start, 0);
        assert_eq!(frags[0].gen_start, 0);
        let (cov, den) = coverage_density(&frags, 6).unwrap();
        assert_eq!(cov, 1.0);
        assert_eq!(den, 6.0);
    }

    #[test]
    fn greedy_scan_by_hand() {
        let src = toks("a b c d e");
        let gen = toks("a b x d e");
        let frags = extractive_fragments(&src, &gen);
        assert_eq!(frags.len(), 2);
        assert_eq!(frags[0].tokens, toks("a b"));
        assert_eq!(frags[1].tokens, toks("d e"));
        assert_eq!(frags[1].source_start, 3);
        assert_eq!(frags[1].gen_start, 3);
        let (cov, den) = coverage_density(&frags, 5).unwrap();
        assert!((cov - 0.8).abs() < 1e-12);
        assert!((den - 1.6).abs() < 1e-12);
    }

    #[test]
    fn no_shared_tokens_yields_nothing() {
        let frags = extractive_fragments(&toks("a b"), &toks("x y"));
        assert!(frags.is_empty());
        assert_eq!(coverage_density(&frags, 2).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn tie_break_picks_earliest_source_occurrence() {
        // "a b" occurs at source positions 0 and 3; the fragment must point at 0.
        let src = toks("a b z a b");
        let gen = toks("a b");
        let frags = extractive_fragments(&src, &gen);
        assert_eq!(frags.len(), 1);
        assert_eq!(frags[0].source_start, 0);
    }

    #[test]
    fn empty_generated_is_an_error() {
        assert!(coverage_density(&[], 0).is_err());
    }

    #[test]
    fn fragments_are_verifiable_and_non_overlapping() {
        let src = toks("p q r s p q t");
        let gen = toks("p q t r s p q");
        let frags = extractive_fragments(&src, &gen);
        let mut last_end = 0;
        for f in &frags {
            assert!(f.gen_start >= last_end, "fragments overlap in generated");
            last_end = f.gen_start + f.len();
            assert_eq!(&gen[f.gen_start..f.gen_start + f.len()], f.tokens.as_slice());
            assert_eq!(
                &src[f.source_start..f.source_start + f.len()],
                f.tokens.as_slice()
            );
        }
    }
}
