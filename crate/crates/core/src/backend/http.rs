use serde_json::{json, Value};

use super::{
    estimate_tokens, ChatRequest, ChatResponse, FinishReason, Role, Transport, TransportError,
};

/// Chat-completion transport over HTTP. The endpoint and model id are fully
/// configurable, so any provider speaking the common request/response shape
/// works; the credential is read from the named environment variable at
/// call time and never stored.
pub struct HttpTransport {
    endpoint: String,
    credential_env: Option<String>,
}

impl HttpTransport {
    pub fn new(endpoint: impl Into<String>, credential_env: Option<String>) -> Self {
        Self { endpoint: endpoint.into(), credential_env }
    }
}

impl Transport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let body = json!({
            "model": request.model_id,
            "messages": request.messages.iter().map(|m| json!({
                "role": match m.role { Role::System => "system", Role::User => "user" },
                "content": m.content,
            })).collect::<Vec<_>>(),
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        });

        let mut builder = ureq::post(&self.endpoint).header("content-type", "application/json");
        if let Some(var) = &self.credential_env {
            let key = std::env::var(var)
                .map_err(|_| TransportError::fatal(format!("credential variable `{var}` not set")))?;
            builder = builder.header("authorization", format!("Bearer {key}"));
        }

        let mut response = builder.send_json(&body).map_err(map_ureq_error)?;
        let payload: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| TransportError::fatal(format!("malformed response body: {e}")))?;
        parse_payload(request, &payload)
    }
}

fn map_ureq_error(error: ureq::Error) -> TransportError {
    match error {
        ureq::Error::StatusCode(code) => TransportError {
            transient: code == 429 || (500..600).contains(&code),
            status: Some(code),
            message: format!("http status {code}"),
        },
        other => TransportError::transient(format!("transport error: {other}")),
    }
}

fn parse_payload(request: &ChatRequest, payload: &Value) -> Result<ChatResponse, TransportError> {
    let choice = payload
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| TransportError::fatal("response has no choices"))?;
    let content = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| TransportError::fatal("response has no message content"))?
        .to_owned();
    let finish_reason = match choice.get("finish_reason").and_then(Value::as_str) {
        Some("length") => FinishReason::Truncated,
        _ => FinishReason::Completed,
    };
    let input_token_count = payload
        .pointer("/usage/prompt_tokens")
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .unwrap_or_else(|| estimate_tokens(&request.joined_content()));
    let output_token_count = payload
        .pointer("/usage/completion_tokens")
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .unwrap_or_else(|| estimate_tokens(&content));
    Ok(ChatResponse { content, input_token_count, output_token_count, finish_reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::BackendProfile;

    #[test]
    fn payload_parsing_reads_content_and_usage() {
        let request = BackendProfile::scripted("m").user_request("q");
        let payload: Value = serde_json::from_str(
            r#"{"choices":[{"message":{"content":"answer"},"finish_reason":"stop"}],
                "usage":{"prompt_tokens":12,"completion_tokens":3}}"#,
        )
        .unwrap();
        let response = parse_payload(&request, &payload).unwrap();
        assert_eq!(response.content, "answer");
        assert_eq!(response.input_token_count, 12);
        assert_eq!(response.finish_reason, FinishReason::Completed);
    }

    #[test]
    fn length_finish_maps_to_truncated() {
        let request = BackendProfile::scripted("m").user_request("q");
        let payload: Value = serde_json::from_str(
            r#"{"choices":[{"message":{"content":"partial"},"finish_reason":"length"}]}"#,
        )
        .unwrap();
        let response = parse_payload(&request, &payload).unwrap();
        assert_eq!(response.finish_reason, FinishReason::Truncated);
    }

    #[test]
    fn rate_limit_status_is_transient() {
        let e = map_ureq_error(ureq::Error::StatusCode(429));
        assert!(e.transient);
        let e = map_ureq_error(ureq::Error::StatusCode(503));
        assert!(e.transient);
        let e = map_ureq_error(ureq::Error::StatusCode(401));
        assert!(!e.transient);
    }
}
