use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{
    estimate_tokens, request_digest, BackendError, ChatRequest, ChatResponse, FinishReason,
    Transport, TransportError,
};

/// Fallback behavior when a request digest has no script entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScriptDefault {
    /// Unmatched digests are errors.
    None,
    /// Echo the first `chars` characters of the last user message.
    EchoPrefix { chars: usize },
    /// Synthesize a shape-correct answer from the prompt itself, so a full
    /// offline pipeline run parses end to end.
    Synthesize,
}

/// A deterministic test double: a digest-to-text map plus a default
/// transform. Pure function of the request; performs no I/O.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedResponder {
    #[serde(default)]
    pub entries: BTreeMap<String, String>,
    #[serde(default = "default_rule")]
    pub default: ScriptDefault,
}

fn default_rule() -> ScriptDefault {
    ScriptDefault::None
}

impl Default for ScriptedResponder {
    fn default() -> Self {
        Self { entries: BTreeMap::new(), default: ScriptDefault::None }
    }
}

impl ScriptedResponder {
    pub fn synthesizing() -> Self {
        Self { entries: BTreeMap::new(), default: ScriptDefault::Synthesize }
    }

    pub fn with_entry(mut self, digest: impl Into<String>, text: impl Into<String>) -> Self {
        self.entries.insert(digest.into(), text.into());
        self
    }
}

/// Resolves a request against the script: exact digest hit first, then the
/// default transform, else an error listing the digest.
pub fn respond_scripted(
    request: &ChatRequest,
    script: &ScriptedResponder,
) -> Result<ChatResponse, BackendError> {
    let digest = request_digest(request);
    let content = if let Some(text) = script.entries.get(&digest) {
        text.clone()
    } else {
        let prompt = request.last_user_content().unwrap_or_default();
        match &script.default {
            ScriptDefault::None => return Err(BackendError::UnmatchedScript { digest }),
            ScriptDefault::EchoPrefix { chars } => prompt.chars().take(*chars).collect(),
            ScriptDefault::Synthesize => synthesize(prompt),
        }
    };
    Ok(ChatResponse {
        input_token_count: estimate_tokens(&request.joined_content()),
        output_token_count: estimate_tokens(&content),
        finish_reason: FinishReason::Completed,
        content,
    })
}

pub struct ScriptedTransport {
    script: ScriptedResponder,
}

impl ScriptedTransport {
    pub fn new(script: ScriptedResponder) -> Self {
        Self { script }
    }
}

impl Transport for ScriptedTransport {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        respond_scripted(request, &self.script)
            .map_err(|e| TransportError::fatal(e.to_string()))
    }
}

// The synthesis rules key off literal cue strings that each prompt kind is
// guaranteed to contain, and answer in the shape the downstream parser
// expects. Everything is a pure function of the prompt text.

fn synthesize(prompt: &str) -> String {
    if prompt.contains("What are the objective, method, findings, contributions and keywords") {
        return synthesize_faceted(prompt);
    }
    if prompt.contains("Very briefly explain the relationship between ") {
        return synthesize_relation(prompt);
    }
    if prompt.contains("is mostly known for, and the common citation intent") {
        return synthesize_usage(prompt);
    }
    if prompt.contains("Ignore citations.") {
        return "The section first reviews foundational approaches to the problem and then \
                discusses recent refinements, contrasting their assumptions with the target \
                paper's setting."
            .to_owned();
    }
    if prompt.contains("List of cited papers:") {
        return synthesize_generation(prompt);
    }
    prompt.chars().take(80).collect()
}

fn first_line_value<'a>(prompt: &'a str, label: &str) -> Option<&'a str> {
    prompt
        .lines()
        .find_map(|line| line.strip_prefix(label))
        .map(str::trim)
}

fn synthesize_faceted(prompt: &str) -> String {
    let title = first_line_value(prompt, "Title:").unwrap_or("the paper");
    let mut keywords: Vec<&str> = title.split_whitespace().take(3).collect();
    if keywords.is_empty() {
        keywords.push("general");
    }
    format!(
        "Objective: To investigate {title}.\n\
         Method: A controlled study built around {title}.\n\
         Findings: The approach behind {title} performs consistently well.\n\
         Contribution: A reusable framework derived from {title}.\n\
         Keywords: {}.",
        keywords.join("; ")
    )
}

fn relation_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"Very briefly explain the relationship between (.+? et al\. \S+) and .+ by (.+? et al\. \S+)\. TLDR:",
        )
        .unwrap()
    })
}

fn synthesize_relation(prompt: &str) -> String {
    match relation_re().captures(prompt) {
        Some(caps) => format!(
            "{} cites {} as a building block and extends its approach to a new setting.",
            &caps[1], &caps[2]
        ),
        None => "The citing paper builds directly on the cited paper.".to_owned(),
    }
}

fn usage_format_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"Answer in the format of "([^"]+)""#).unwrap())
}

fn synthesize_usage(prompt: &str) -> String {
    match usage_format_re().captures(prompt) {
        Some(caps) => caps[1]
            .replace("XXX", "its core method")
            .replace("YYY", "reference when comparing methodologies"),
        None => "The paper is known for its core method and it is cited for reference.".to_owned(),
    }
}

fn cited_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?m)^\d+\. (.+) by (.+) et al\. (\S+)$").unwrap())
}

fn synthesize_generation(prompt: &str) -> String {
    let mut sentences = Vec::new();
    for caps in cited_line_re().captures_iter(prompt) {
        let title = &caps[1];
        let author = &caps[2];
        let year = &caps[3];
        let gist: Vec<&str> = title.split_whitespace().take(6).collect();
        sentences.push(format!(
            "{author} et al. ({year}) presented {}.",
            gist.join(" ").to_lowercase()
        ));
    }
    if sentences.is_empty() {
        return "No cited papers were listed.".to_owned();
    }
    format!(
        "{} Together these works chart the progression this paper builds on.",
        sentences.join(" ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::BackendProfile;

    fn request(prompt: &str) -> ChatRequest {
        BackendProfile::scripted("m").user_request(prompt)
    }

    #[test]
    fn exact_digest_hit_returns_mapped_text() {
        let req = request("ping");
        let script = ScriptedResponder::default().with_entry(request_digest(&req), "OK");
        let resp = respond_scripted(&req, &script).unwrap();
        assert_eq!(resp.content, "OK");
        assert_eq!(resp.finish_reason, FinishReason::Completed);
    }

    #[test]
    fn unmatched_digest_without_default_errors_with_digest() {
        let req = request("ping");
        let err = respond_scripted(&req, &ScriptedResponder::default()).unwrap_err();
        match err {
            BackendError::UnmatchedScript { digest } => {
                assert_eq!(digest, request_digest(&req));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn echo_default_is_deterministic() {
        let script = ScriptedResponder {
            entries: BTreeMap::new(),
            default: ScriptDefault::EchoPrefix { chars: 40 },
        };
        let req = request("abcdefghij-abcdefghij-abcdefghij-abcdefghij");
        let a = respond_scripted(&req, &script).unwrap();
        let b = respond_scripted(&req, &script).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.content.chars().count(), 40);
    }

    #[test]
    fn synthesized_usage_answer_follows_the_requested_shape() {
        let prompt = "How other papers cite Duval et al. 2021:\n\
            ...\n\
            Very briefly answer what Duval et al. 2021 is mostly known for, and the common \
            citation intent. Hint: pay attention to how Duval et al. 2021 is referred by the \
            citing papers. Answer in the format of \"Duval et al. 2021 is known for XXX and it \
            is cited for YYY\". TLDR:";
        let out = synthesize(prompt);
        assert!(out.starts_with("Duval et al. 2021 is known for "));
        assert!(out.contains(" and it is cited for "));
    }

    #[test]
    fn synthesized_generation_mentions_every_listed_paper() {
        let prompt = "List of cited papers:\n\
            1. Alpha Systems by Ahn et al. 2019\n\
            body text\n\
            2. Beta Methods by Brand et al. 2020\n";
        let out = synthesize(prompt);
        assert!(out.contains("Ahn et al. (2019)"));
        assert!(out.contains("Brand et al. (2020)"));
    }
}
