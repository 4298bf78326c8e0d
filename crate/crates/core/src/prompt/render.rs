use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{GenerationUnit, PromptError, VariantId, VariantSpec};
use crate::backend::estimate_tokens;
use crate::cts::CtsSelection;
use crate::graph::{CitationNetwork, FacetedSummary, NetworkNode, NodeFeature};
use crate::hash::sha256_hex;
use crate::ingest::{extract_taic, CitationSpan, PaperRecord, TaicBundle};

/// Feature families of the variant matrix; digest sets are compared at
/// this granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    MainIdea,
    Taic,
    FacetedSummary,
    CitedAbstract,
    IntentUsage,
    Relationship,
    Cts,
}

impl FeatureKind {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::MainIdea => "main_idea",
            FeatureKind::Taic => "taic",
            FeatureKind::FacetedSummary => "faceted_summary",
            FeatureKind::CitedAbstract => "cited_abstract",
            FeatureKind::IntentUsage => "intent_usage",
            FeatureKind::Relationship => "relationship",
            FeatureKind::Cts => "cts",
        }
    }
}

/// Digest of one feature text included in a rendered bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDigest {
    pub kind: FeatureKind,
    /// Paper id the feature belongs to, or "target".
    pub subject: String,
    pub digest: String,
}

impl FeatureDigest {
    fn new(kind: FeatureKind, subject: &str, text: &str) -> Self {
        Self { kind, subject: subject.to_owned(), digest: sha256_hex(text) }
    }
}

/// A rendered generation prompt plus the digests of every feature it
/// includes; the digest set is exactly what the variant enables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub variant_id: VariantId,
    pub unit_index: usize,
    pub system: String,
    pub user: String,
    pub digests: Vec<FeatureDigest>,
}

impl PromptBundle {
    pub fn feature_kinds(&self) -> BTreeSet<FeatureKind> {
        self.digests.iter().map(|d| d.kind).collect()
    }
}

/// Renders the faceted-summary prompt for one paper.
pub fn render_faceted_prompt(record: &PaperRecord) -> Result<String, PromptError> {
    if record.abstract_text.is_empty() {
        return Err(PromptError::EmptyAbstract(record.paper_id.clone()));
    }
    let taic = extract_taic(record).bundle;
    Ok(format!(
        "Title: {}\n\
         Abstract: {}\n\
         Introduction: {}\n\
         Conclusion: {}\n\
         What are the objective, method, findings, contributions and keywords of the paper above? Answer in the format of\n\
         Objective: XXX.\n\
         Method: XXX.\n\
         Findings: XXX.\n\
         Contribution: XXX.\n\
         Keywords: A; B; C.",
        taic.title, taic.abstract_text, taic.introduction, taic.conclusion
    ))
}

/// Renders the pairwise-relationship prompt: both faceted summaries, the
/// citation marker of B in A, and the enumerated citation contexts.
pub fn render_relation_prompt(
    a: &NodeFeature,
    b: &NodeFeature,
    marker_of_b_in_a: &str,
    spans: &[CitationSpan],
) -> Result<String, PromptError> {
    if spans.is_empty() {
        return Err(PromptError::NoSpans);
    }
    let a_block = faceted_block(a)?;
    let b_block = faceted_block(b)?;
    let mut lines = vec![
        format!("Faceted summary of the citing paper, {}:", a.full_label()),
        a_block,
        format!("Faceted summary of the cited paper, {}:", b.full_label()),
        b_block,
        format!(
            "Citation contexts that {} cites {} (which is cited as {}):",
            a.short_label(),
            b.short_label(),
            marker_of_b_in_a
        ),
    ];
    for (i, span) in spans.iter().enumerate() {
        lines.push(format!("{}. {}", i + 1, span.text()));
    }
    lines.push(format!(
        "Very briefly explain the relationship between {} and {}. TLDR:",
        a.short_label(),
        b.full_label()
    ));
    Ok(lines.join("\n"))
}

/// One citing paper's evidence in a usage prompt: its relation text and
/// example citation fragments, in citing-paper id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageGroup {
    pub citing_id: String,
    pub relation_text: String,
    pub fragments: Vec<String>,
}

/// Renders the enriched intent/usage prompt over the incident edges of a
/// cited paper.
pub fn render_usage_prompt(b: &NodeFeature, groups: &[UsageGroup]) -> Result<String, PromptError> {
    if groups.is_empty() {
        return Err(PromptError::NoGroups);
    }
    let mut lines = vec![format!("How other papers cite {}:", b.short_label())];
    for group in groups {
        lines.push(group.relation_text.clone());
        lines.push("Example citation fragments:".to_owned());
        for (i, fragment) in group.fragments.iter().enumerate() {
            lines.push(format!("{}. {}", i + 1, fragment));
        }
    }
    lines.push(format!(
        "Very briefly answer what {label} is mostly known for, and the common citation intent. \
         Hint: pay attention to how {label} is referred by the citing papers. Answer in the \
         format of \"{label} is known for XXX and it is cited for YYY\". TLDR:",
        label = b.short_label()
    ));
    Ok(lines.join("\n"))
}

/// Renders the main-idea condensation prompt over the gold related-work
/// text (evaluation mode only).
pub fn render_main_idea_prompt(
    target_title: &str,
    target_faceted: &FacetedSummary,
    gold_related_work: &str,
) -> Result<String, PromptError> {
    if gold_related_work.trim().is_empty() {
        return Err(PromptError::MissingGoldText);
    }
    Ok(format!(
        "Our title: {}\n\
         Faceted summary of our paper:\n\
         {}\n\
         Write a short summary of the main idea of the following related work section paragraphs. Ignore citations.\n\
         {}",
        target_title,
        target_faceted.canonical_block(),
        gold_related_work
    ))
}

/// Everything a generation render needs besides the unit itself.
pub struct GenerationContext<'a> {
    pub taic: &'a TaicBundle,
    pub network: &'a CitationNetwork,
    /// Field-of-study phrase in the opener ("NLP" in the default template).
    pub field_of_study: &'a str,
    /// When set, rendering errors if the estimated prompt exceeds it.
    pub budget: Option<usize>,
}

/// Renders the full generation prompt for one unit under a variant spec.
/// Cited papers are listed in chronological order (ties by first-author
/// name); every block appears iff the variant enables it, and the bundle
/// digests enumerate exactly the included features.
pub fn render_generation_prompt(
    variant: &VariantSpec,
    ctx: &GenerationContext<'_>,
    unit: &GenerationUnit,
    cts: Option<&BTreeMap<String, CtsSelection>>,
) -> Result<PromptBundle, PromptError> {
    let mut lines: Vec<String> = Vec::new();
    let mut digests: Vec<FeatureDigest> = Vec::new();

    if variant.use_taic {
        lines.push(format!(
            "We have finished writing the title, abstract, introduction and conclusion section of our {} paper as follows:",
            ctx.field_of_study
        ));
        lines.push(format!("Title: {}", ctx.taic.title));
        lines.push(format!("Abstract: {}", ctx.taic.abstract_text));
        lines.push(format!("Introduction: {}", ctx.taic.introduction));
        lines.push(format!("Conclusion: {}", ctx.taic.conclusion));
        lines.push("However, the related work section is still missing.".to_owned());
        let taic_text = format!(
            "{}\n{}\n{}\n{}",
            ctx.taic.title, ctx.taic.abstract_text, ctx.taic.introduction, ctx.taic.conclusion
        );
        digests.push(FeatureDigest::new(FeatureKind::Taic, "target", &taic_text));
    }

    if variant.use_main_idea {
        lines.push(
            "Write our related work section that concisely cites the following papers in a \
             natural way using all of the main ideas as the main story."
                .to_owned(),
        );
    } else {
        lines.push(
            "Write our related work section that concisely cites the following papers in a \
             natural way."
                .to_owned(),
        );
    }
    lines.push(
        "Keep it short, e.g. 3 paragraphs at most. Make sure the related work section does \
         not conflict with the sections already written."
            .to_owned(),
    );
    if variant.use_main_idea {
        lines.push("You can freely reorder the cited papers to adapt to the main ideas.".to_owned());
    }
    if variant.use_usage {
        lines.push(
            "Pay extra attention to <Usage> which indicates how each work is cited by other work."
                .to_owned(),
        );
    }

    if variant.use_main_idea {
        let idea = unit.main_idea.as_deref().ok_or(PromptError::MissingFeature {
            paper_id: "target".to_owned(),
            feature: FeatureKind::MainIdea.name(),
        })?;
        lines.push("Main idea of our related work section:".to_owned());
        lines.push(idea.to_owned());
        digests.push(FeatureDigest::new(FeatureKind::MainIdea, "target", idea));
    }

    lines.push("List of cited papers:".to_owned());
    let ordered = chronological_nodes(ctx.network, &unit.cited_ids)?;
    for (i, node) in ordered.iter().enumerate() {
        let selection = cts.and_then(|m| m.get(&node.paper_id));
        let (block, block_digests) =
            render_paper_block(variant, ctx.network, &node.paper_id, selection)?;
        lines.push(format!("{}. {}", i + 1, block));
        digests.extend(block_digests);
    }

    let user = lines.join("\n");
    if let Some(budget) = ctx.budget {
        let estimated = estimate_tokens(&user);
        if estimated > budget {
            return Err(PromptError::OverBudget {
                unit_index: unit.unit_index,
                estimated,
                budget,
            });
        }
    }
    Ok(PromptBundle {
        variant_id: variant.variant_id,
        unit_index: unit.unit_index,
        system: String::new(),
        user,
        digests,
    })
}

/// One paper's entry in the cited-papers list, without its list number:
/// the label line, the node content, and the usage/relationship/CTS blocks
/// the variant enables, plus the digests of every included feature. The
/// pipeline also uses this for per-paper token estimation when planning
/// chunks.
pub fn render_paper_block(
    variant: &VariantSpec,
    network: &CitationNetwork,
    paper_id: &str,
    cts: Option<&CtsSelection>,
) -> Result<(String, Vec<FeatureDigest>), PromptError> {
    let node = network
        .node(paper_id)
        .ok_or_else(|| PromptError::UnknownPaper(paper_id.to_owned()))?;
    let mut digests = Vec::new();
    let feature = node
        .feature(variant.node_mode)
        .map_err(|_| PromptError::MissingFeature {
            paper_id: node.paper_id.clone(),
            feature: match variant.node_mode {
                crate::graph::NodeMode::Faceted => FeatureKind::FacetedSummary.name(),
                crate::graph::NodeMode::Abstract => FeatureKind::CitedAbstract.name(),
            },
        })?;
    let mut lines = vec![feature.full_label()];
    let content = feature.content_block();
    let kind = match variant.node_mode {
        crate::graph::NodeMode::Faceted => FeatureKind::FacetedSummary,
        crate::graph::NodeMode::Abstract => FeatureKind::CitedAbstract,
    };
    digests.push(FeatureDigest::new(kind, &node.paper_id, &content));
    lines.push(content);

    if variant.use_usage {
        let usage = network.usages.get(&node.paper_id).ok_or_else(|| {
            PromptError::MissingFeature {
                paper_id: node.paper_id.clone(),
                feature: FeatureKind::IntentUsage.name(),
            }
        })?;
        lines.push(format!("<Usage> {}", usage.raw_text));
        digests.push(FeatureDigest::new(FeatureKind::IntentUsage, &node.paper_id, &usage.raw_text));
    }

    if variant.use_relationship {
        let incident = network.incident_edges(&node.paper_id);
        if incident.is_empty() {
            return Err(PromptError::MissingFeature {
                paper_id: node.paper_id.clone(),
                feature: FeatureKind::Relationship.name(),
            });
        }
        lines.push("How other papers cite it:".to_owned());
        let mut joined = String::new();
        for edge in &incident {
            lines.push(edge.relation_text.clone());
            joined.push_str(&edge.relation_text);
            joined.push('\n');
        }
        digests.push(FeatureDigest::new(FeatureKind::Relationship, &node.paper_id, &joined));
    }

    if variant.use_cts {
        if let Some(selection) = cts {
            if !selection.chosen.is_empty() {
                lines.push("Potentially useful sentences from this paper:".to_owned());
                let mut joined = String::new();
                for candidate in &selection.chosen {
                    let line = format!("[{}] {}", candidate.section_heading, candidate.sentence);
                    joined.push_str(&line);
                    joined.push('\n');
                    lines.push(line);
                }
                digests.push(FeatureDigest::new(FeatureKind::Cts, &node.paper_id, &joined));
            }
        }
    }

    Ok((lines.join("\n"), digests))
}

/// Chronological order with ties broken by first-author name, then paper
/// id; undated papers sort last. A permutation of the input ids.
fn chronological_nodes<'a>(
    network: &'a CitationNetwork,
    cited_ids: &[String],
) -> Result<Vec<&'a NetworkNode>, PromptError> {
    let mut nodes = Vec::with_capacity(cited_ids.len());
    for id in cited_ids {
        nodes.push(
            network
                .node(id)
                .ok_or_else(|| PromptError::UnknownPaper(id.clone()))?,
        );
    }
    nodes.sort_by(|a, b| {
        let ya = a.year.unwrap_or(i32::MAX);
        let yb = b.year.unwrap_or(i32::MAX);
        ya.cmp(&yb)
            .then_with(|| a.first_author.to_lowercase().cmp(&b.first_author.to_lowercase()))
            .then_with(|| a.paper_id.cmp(&b.paper_id))
    });
    Ok(nodes)
}

fn faceted_block(node: &NodeFeature) -> Result<String, PromptError> {
    match &node.content {
        crate::graph::NodeContent::Faceted(f) => Ok(f.canonical_block()),
        crate::graph::NodeContent::Abstract(_) => Err(PromptError::NotFaceted(node.paper_id.clone())),
    }
}
