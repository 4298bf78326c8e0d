//! Aggregated evaluation results, serializable as JSON and as flat CSV
//! with one row per variant and metric.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CorrelationResult, RougeScore, StyleDistribution};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeRow {
    pub rouge_1: RougeScore,
    pub rouge_2: RougeScore,
    pub rouge_l: RougeScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractivenessRow {
    pub coverage: f64,
    pub density: f64,
    /// Generated token count the row was computed over.
    pub generated_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleSummary {
    pub distribution: StyleDistribution,
    /// True when citation types came from the heuristic stand-in rather
    /// than externally supplied labels.
    pub heuristic: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    /// ROUGE against the gold text, keyed by variant id.
    pub rouge: BTreeMap<String, RougeRow>,
    /// Coverage/density per variant, keyed by feature name.
    pub extractiveness: BTreeMap<String, BTreeMap<String, ExtractivenessRow>>,
    pub style: BTreeMap<String, StyleSummary>,
    pub tau: Option<CorrelationResult>,
    pub warnings: Vec<String>,
}

impl MetricsReport {
    /// Flat rows `(variant, metric, value)` for CSV export, in a stable
    /// order.
    pub fn csv_rows(&self) -> Vec<(String, String, f64)> {
        let mut rows = Vec::new();
        for (variant, r) in &self.rouge {
            for (name, score) in [("rouge-1", r.rouge_1), ("rouge-2", r.rouge_2), ("rouge-l", r.rouge_l)] {
                rows.push((variant.clone(), format!("{name}-precision"), score.precision));
                rows.push((variant.clone(), format!("{name}-recall"), score.recall));
                rows.push((variant.clone(), format!("{name}-f1"), score.f1));
            }
        }
        for (variant, features) in &self.extractiveness {
            for (feature, row) in features {
                rows.push((variant.clone(), format!("coverage/{feature}"), row.coverage));
                rows.push((variant.clone(), format!("density/{feature}"), row.density));
            }
        }
        for (variant, style) in &self.style {
            rows.push((variant.clone(), "dominant-percent".into(), style.distribution.dominant_percent));
            rows.push((variant.clone(), "reference-percent".into(), style.distribution.reference_percent));
        }
        if let Some(tau) = &self.tau {
            if let Some(value) = tau.tau {
                rows.push(("-".into(), "kendall-tau".into(), value));
            }
        }
        rows
    }
}
