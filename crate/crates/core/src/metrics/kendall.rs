use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Result of a tie-corrected Kendall rank correlation.
///
/// `tau` is `None` when the tie-corrected denominator vanishes (for example
/// an all-tied series), which is flagged rather than treated as a crash.
/// Tie fields count tied *pairs*, not tied observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub tau: Option<f64>,
    pub n: usize,
    pub tied_x: usize,
    pub tied_y: usize,
}

/// Kendall's tau-b: (C - D) / sqrt((N - Tx)(N - Ty)) with N = n(n-1)/2.
///
/// Discordant pairs are counted by merge-sorting the y-sequence after an
/// (x, y) sort, so the whole computation is O(n log n).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<CorrelationResult, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch { x: x.len(), y: y.len() });
    }
    let n = x.len();
    if n < 2 {
        return Err(MetricsError::SeriesTooShort(n));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFiniteValue);
    }

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // Tied pairs in x, and jointly tied pairs, from runs of the x-sorted order.
    let mut tied_x = 0usize;
    let mut tied_xy = 0usize;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        tied_x += pair_count(j - i);
        let mut k = i;
        while k < j {
            let mut m = k + 1;
            while m < j && pairs[m].1 == pairs[k].1 {
                m += 1;
            }
            tied_xy += pair_count(m - k);
            k = m;
        }
        i = j;
    }

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let discordant = sort_counting_inversions(&mut ys);

    let mut tied_y = 0usize;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        tied_y += pair_count(j - i);
        i = j;
    }

    let total = pair_count(n);
    let c_minus_d =
        (total as f64) - (tied_x as f64) - (tied_y as f64) + (tied_xy as f64)
            - 2.0 * (discordant as f64);
    let denom = ((total - tied_x) as f64) * ((total - tied_y) as f64);
    let tau = if denom == 0.0 {
        None
    } else {
        Some((c_minus_d / denom.sqrt()).clamp(-1.0, 1.0))
    };
    Ok(CorrelationResult { tau, n, tied_x, tied_y })
}

fn pair_count(run: usize) -> usize {
    run * run.saturating_sub(1) / 2
}

/// Merge sort counting strict inversions (right element < left element).
/// Equal elements take the left side and count nothing, so jointly tied
/// and y-tied pairs never register as discordant.
fn sort_counting_inversions(values: &mut [f64]) -> usize {
    let n = values.len();
    let mut buffer = values.to_vec();
    let mut inversions = 0usize;
    let mut width = 1;
    while width < n {
        for start in (0..n).step_by(2 * width) {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut l, mut r, mut out) = (start, mid, start);
            while l < mid || r < end {
                if l < mid && (r >= end || values[r] >= values[l]) {
                    buffer[out] = values[l];
                    l += 1;
                } else {
                    buffer[out] = values[r];
                    inversions += mid - l;
                    r += 1;
                }
                out += 1;
            }
        }
        values.copy_from_slice(&buffer);
        width *= 2;
    }
    inversions
}
