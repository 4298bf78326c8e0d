use std::collections::BTreeMap;

use super::{
    parse_faceted_output, CachedValue, CitationNetwork, EdgeRelation, EnrichedUsage,
    FacetedSummary, FeatureCache, FeatureCacheKey, GraphError, NetworkNode, NodeFeature, NodeMode,
    UsageClass,
};
use crate::backend::{estimate_tokens, BackendClient};
use crate::ingest::{detect_citation_mentions, extract_citation_spans, CitationSpan, PaperRecord};
use crate::prompt::{
    render_faceted_prompt, render_relation_prompt, render_usage_prompt, UsageGroup,
};

/// When a relation prompt exceeds the backend budget, keep this many spans
/// (first by document order).
const RELATION_SPAN_CAP: usize = 8;

/// Derives citation-network features through the chat backend, memoizing
/// every completion in the feature cache. Derivation for distinct nodes
/// and edges runs concurrently up to the backend's in-flight limit.
pub struct NetworkBuilder<'a> {
    backend: &'a BackendClient,
    cache: &'a FeatureCache,
}

/// Convenience entry point building the whole network in one call.
pub fn build_network(
    backend: &BackendClient,
    cache: &FeatureCache,
    target: &PaperRecord,
    cited: &[PaperRecord],
    extra_citing: &[PaperRecord],
) -> Result<CitationNetwork, GraphError> {
    NetworkBuilder::new(backend, cache).build_network(target, cited, extra_citing)
}

impl<'a> NetworkBuilder<'a> {
    pub fn new(backend: &'a BackendClient, cache: &'a FeatureCache) -> Self {
        Self { backend, cache }
    }

    /// Nodes for target, cited, and extra citing papers; degraded nodes for
    /// target bibliography entries with no record; edges for every in-network
    /// pair (A, B) where A's body cites B; usages for every cited paper with
    /// at least one incoming edge.
    pub fn build_network(
        &self,
        target: &PaperRecord,
        cited: &[PaperRecord],
        extra_citing: &[PaperRecord],
    ) -> Result<CitationNetwork, GraphError> {
        if cited.is_empty() {
            return Err(GraphError::EmptyCitedList);
        }
        let mut records: Vec<&PaperRecord> = Vec::with_capacity(1 + cited.len() + extra_citing.len());
        records.push(target);
        records.extend(cited);
        records.extend(extra_citing);
        {
            let mut seen = std::collections::HashSet::new();
            for record in &records {
                if !seen.insert(record.paper_id.as_str()) {
                    return Err(GraphError::DuplicatePaperId(record.paper_id.clone()));
                }
            }
        }

        let limit = self.backend.profile().max_in_flight.max(1);
        let summaries = parallel_map(&records, limit, |record| {
            self.derive_faceted_summary(record)
                .map(|s| (record.paper_id.clone(), s))
        })?;

        let mut nodes: BTreeMap<String, NetworkNode> = BTreeMap::new();
        for (record, (_, summary)) in records.iter().zip(summaries) {
            nodes.insert(
                record.paper_id.clone(),
                NetworkNode {
                    paper_id: record.paper_id.clone(),
                    title: record.title.clone(),
                    first_author: record_first_author(record),
                    year: record.year,
                    abstract_text: record.abstract_text.clone(),
                    faceted: Some(summary),
                    degraded: false,
                },
            );
        }
        // Degraded stand-ins for cited papers we have no record for.
        for entry in &target.bibliography {
            if link_bib_entry(entry, &records).is_none() && !nodes.contains_key(&entry.bib_id) {
                nodes.insert(
                    entry.bib_id.clone(),
                    NetworkNode {
                        paper_id: entry.bib_id.clone(),
                        title: entry.title.clone(),
                        first_author: entry.first_author.clone(),
                        year: entry.year,
                        abstract_text: String::new(),
                        faceted: None,
                        degraded: true,
                    },
                );
            }
        }

        // One job per citing pair found in the records' bodies.
        let mut jobs: Vec<RelationJob> = Vec::new();
        for citing in &records {
            for cited_rec in &records {
                if citing.paper_id == cited_rec.paper_id {
                    continue;
                }
                let Some(bib_id) = bib_id_linking(citing, cited_rec) else {
                    continue;
                };
                let spans = extract_citation_spans(citing, &bib_id)?;
                if spans.is_empty() {
                    continue;
                }
                let marker = first_marker(citing, &bib_id).unwrap_or_else(|| {
                    format!("{} ({})", record_first_author(cited_rec), year_label(cited_rec.year))
                });
                jobs.push(RelationJob {
                    from_id: citing.paper_id.clone(),
                    to_id: cited_rec.paper_id.clone(),
                    marker,
                    spans,
                });
            }
        }
        jobs.sort_by(|a, b| (a.from_id.as_str(), a.to_id.as_str()).cmp(&(b.from_id.as_str(), b.to_id.as_str())));

        let edges = parallel_map(&jobs, limit, |job| {
            let a = node_feature(&nodes, &job.from_id)?;
            let b = node_feature(&nodes, &job.to_id)?;
            self.derive_edge_relation(&a, &b, &job.marker, &job.spans)
        })?;

        let mut usages = BTreeMap::new();
        let mut cited_ids: Vec<&str> = cited.iter().map(|r| r.paper_id.as_str()).collect();
        cited_ids.sort_unstable();
        let usage_results = parallel_map(&cited_ids, limit, |cited_id| {
            let incident: Vec<&EdgeRelation> =
                edges.iter().filter(|e| e.to_id == **cited_id).collect();
            if incident.is_empty() {
                return Ok(None);
            }
            let b = node_feature(&nodes, cited_id)?;
            self.derive_enriched_usage(&b, &incident).map(Some)
        })?;
        for usage in usage_results.into_iter().flatten() {
            usages.insert(usage.paper_id.clone(), usage);
        }

        Ok(CitationNetwork { target_id: target.paper_id.clone(), nodes, edges, usages })
    }

    /// Faceted summary of one paper: prompt rendered, completed by the
    /// backend, parsed, and memoized under the prompt digest.
    pub fn derive_faceted_summary(
        &self,
        record: &PaperRecord,
    ) -> Result<FacetedSummary, GraphError> {
        let prompt = render_faceted_prompt(record)?;
        let key =
            FeatureCacheKey::new("faceted_summary", &prompt, &self.backend.profile().model_id);
        let cached = self.cache.memoize(&key, || {
            let response = self.complete(&prompt, &key)?;
            let value = parse_faceted_output(&response)?;
            Ok(CachedValue { raw_completion: response, value })
        })?;
        Ok(cached.value)
    }

    /// Directed relation text for A citing B, conditioned on both faceted
    /// summaries and the citation spans. Over-budget prompts are re-rendered
    /// with the first [`RELATION_SPAN_CAP`] spans by document order.
    pub fn derive_edge_relation(
        &self,
        a: &NodeFeature,
        b: &NodeFeature,
        marker_of_b_in_a: &str,
        spans: &[CitationSpan],
    ) -> Result<EdgeRelation, GraphError> {
        if spans.is_empty() {
            return Err(GraphError::EmptySpans {
                from_id: a.paper_id.clone(),
                to_id: b.paper_id.clone(),
            });
        }
        for span in spans {
            if span.host_paper_id != a.paper_id {
                return Err(GraphError::WrongSpanHost {
                    expected: a.paper_id.clone(),
                    got: span.host_paper_id.clone(),
                });
            }
        }

        let mut used: &[CitationSpan] = spans;
        let mut prompt = render_relation_prompt(a, b, marker_of_b_in_a, used)?;
        if estimate_tokens(&prompt) > self.backend.profile().input_token_budget
            && spans.len() > RELATION_SPAN_CAP
        {
            used = &spans[..RELATION_SPAN_CAP];
            prompt = render_relation_prompt(a, b, marker_of_b_in_a, used)?;
        }

        let key = FeatureCacheKey::new("edge_relation", &prompt, &self.backend.profile().model_id);
        let cached = self.cache.memoize(&key, || {
            let response = self.complete(&prompt, &key)?;
            Ok(CachedValue { raw_completion: response.clone(), value: response })
        })?;
        Ok(EdgeRelation {
            from_id: a.paper_id.clone(),
            to_id: b.paper_id.clone(),
            relation_text: cached.value,
            marker: marker_of_b_in_a.to_owned(),
            supporting_spans: used.to_vec(),
        })
    }

    /// Enriched intent/usage of a cited paper from its incoming edges,
    /// grouped per citing paper in citing-id order.
    pub fn derive_enriched_usage(
        &self,
        b: &NodeFeature,
        incident: &[&EdgeRelation],
    ) -> Result<EnrichedUsage, GraphError> {
        if incident.is_empty() {
            return Err(GraphError::EmptyIncidentEdges(b.paper_id.clone()));
        }
        let mut groups: Vec<UsageGroup> = incident
            .iter()
            .map(|edge| {
                if edge.to_id != b.paper_id {
                    return Err(GraphError::MismatchedIncidentEdge {
                        expected: b.paper_id.clone(),
                        got: edge.to_id.clone(),
                    });
                }
                Ok(UsageGroup {
                    citing_id: edge.from_id.clone(),
                    relation_text: edge.relation_text.clone(),
                    fragments: edge.supporting_spans.iter().map(|s| s.text()).collect(),
                })
            })
            .collect::<Result<_, _>>()?;
        groups.sort_by(|x, y| x.citing_id.cmp(&y.citing_id));

        let prompt = render_usage_prompt(b, &groups)?;
        let key = FeatureCacheKey::new("enriched_usage", &prompt, &self.backend.profile().model_id);
        let paper_id = b.paper_id.clone();
        let cached = self.cache.memoize(&key, || {
            let response = self.complete(&prompt, &key)?;
            let value = parse_usage_completion(&paper_id, &response)?;
            Ok(CachedValue { raw_completion: response, value })
        })?;
        Ok(cached.value)
    }

    fn complete(&self, prompt: &str, key: &FeatureCacheKey) -> Result<String, GraphError> {
        let request = self.backend.profile().user_request(prompt);
        let response = self.backend.complete(&request).map_err(|source| GraphError::Backend {
            key_digest: key.entry_digest(),
            source,
        })?;
        Ok(response.content)
    }
}

struct RelationJob {
    from_id: String,
    to_id: String,
    marker: String,
    spans: Vec<CitationSpan>,
}

fn node_feature(
    nodes: &BTreeMap<String, NetworkNode>,
    paper_id: &str,
) -> Result<NodeFeature, GraphError> {
    nodes
        .get(paper_id)
        .ok_or_else(|| GraphError::MissingNodeContent {
            paper_id: paper_id.to_owned(),
            mode: NodeMode::Faceted,
        })?
        .feature(NodeMode::Faceted)
}

/// Parses "{label} is known for XXX and it is cited for YYY" and derives
/// the usage class: a single literal "dominant"/"reference" token decides
/// directly; otherwise a keyword rule classifies, recorded as a fallback.
fn parse_usage_completion(paper_id: &str, completion: &str) -> Result<EnrichedUsage, GraphError> {
    const KNOWN: &str = " is known for ";
    const CITED: &str = " and it is cited for ";
    let parse = || {
        let known_at = completion.find(KNOWN)?;
        let rest = &completion[known_at + KNOWN.len()..];
        let cited_at = rest.find(CITED)?;
        let known_for = rest[..cited_at].trim();
        let cited_for = rest[cited_at + CITED.len()..].trim().trim_end_matches('.').trim();
        if known_for.is_empty() || cited_for.is_empty() {
            return None;
        }
        Some((known_for.to_owned(), cited_for.to_owned()))
    };
    let (known_for, cited_for) = parse().ok_or_else(|| GraphError::ParseFailure {
        operation: "enriched_usage".into(),
        reason: "expected `... is known for XXX and it is cited for YYY`".into(),
        raw: completion.to_owned(),
    })?;
    let (usage_class, class_from_fallback) = derive_usage_class(completion);
    Ok(EnrichedUsage {
        paper_id: paper_id.to_owned(),
        known_for,
        cited_for,
        usage_class,
        class_from_fallback,
        raw_text: completion.trim().to_owned(),
    })
}

fn derive_usage_class(completion: &str) -> (UsageClass, bool) {
    let lower = completion.to_lowercase();
    let has_dominant = lower.contains("dominant");
    let has_reference = lower.contains("reference");
    match (has_dominant, has_reference) {
        (true, false) => (UsageClass::Dominant, false),
        (false, true) => (UsageClass::Reference, false),
        _ => {
            const REFERENCE_CUES: &[&str] =
                &["as a tool", "as a baseline", "for reference", "as a reference", "for comparison"];
            if REFERENCE_CUES.iter().any(|cue| lower.contains(cue)) {
                (UsageClass::Reference, true)
            } else {
                (UsageClass::Dominant, true)
            }
        }
    }
}

fn record_first_author(record: &PaperRecord) -> String {
    record
        .authors
        .first()
        .and_then(|name| name.split_whitespace().last())
        .unwrap_or("Unknown")
        .to_owned()
}

fn year_label(year: Option<i32>) -> String {
    year.map_or_else(|| "n.d.".to_owned(), |y| y.to_string())
}

fn normalize_title(title: &str) -> String {
    title
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric())
        .collect()
}

/// Bibliography entries link to records by exact paper id or normalized
/// title equality.
fn link_bib_entry(entry: &crate::ingest::BibEntry, records: &[&PaperRecord]) -> Option<String> {
    if let Some(record) = records.iter().find(|r| r.paper_id == entry.bib_id) {
        return Some(record.paper_id.clone());
    }
    let wanted = normalize_title(&entry.title);
    records
        .iter()
        .find(|r| normalize_title(&r.title) == wanted)
        .map(|r| r.paper_id.clone())
}

/// The bib_id inside `citing` that links to the record `cited`, if any:
/// exact paper-id match first, then normalized title equality.
pub fn bib_id_linking(citing: &PaperRecord, cited: &PaperRecord) -> Option<String> {
    citing
        .bibliography
        .iter()
        .find(|entry| {
            entry.bib_id == cited.paper_id
                || normalize_title(&entry.title) == normalize_title(&cited.title)
        })
        .map(|entry| entry.bib_id.clone())
}

/// Surface of the first marker of `bib_id` in document order.
fn first_marker(record: &PaperRecord, bib_id: &str) -> Option<String> {
    for section in &record.sections {
        let mentions = detect_citation_mentions(&section.body, &record.bibliography);
        if let Some(m) = mentions.iter().find(|m| m.bib_id.as_deref() == Some(bib_id)) {
            return Some(m.surface.clone());
        }
    }
    None
}

/// Order-preserving bounded-parallel map; failures surface in input order.
fn parallel_map<T, R, F>(items: &[T], limit: usize, f: F) -> Result<Vec<R>, GraphError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, GraphError> + Sync,
{
    if items.len() <= 1 || limit <= 1 {
        return items.iter().map(&f).collect();
    }
    let mut results = Vec::with_capacity(items.len());
    for batch in items.chunks(limit) {
        let outputs = std::thread::scope(|scope| {
            let handles: Vec<_> = batch.iter().map(|item| scope.spawn(|| f(item))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect::<Vec<_>>()
        });
        for output in outputs {
            results.push(output?);
        }
    }
    Ok(results)
}
