//! Wire format: one JSON object per line, tagged by `kind`.

use addprolog::SourceSpan;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Every message either side may send.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WireMessage {
    /// Replaces the connection's program for sessions started afterwards.
    LoadProgram { program: String },
    StartQuery {
        goal: String,
        /// `prove` (default) or `prov`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        semantics: Option<String>,
        /// `first` (default) or `all`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<String>,
    },
    ChoiceRequest {
        session_id: String,
        request_id: String,
        left: String,
        right: String,
    },
    ChoiceResponse {
        session_id: String,
        request_id: String,
        index: u64,
    },
    /// Bindings in query-variable order, each value a pretty-printed term.
    Solution {
        session_id: String,
        bindings: Map<String, Value>,
    },
    Failure { session_id: String },
    Indeterminate { session_id: String, reason: String },
    /// Asks an all-answers session for its next answer.
    More { session_id: String },
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        session_id: Option<String>,
        message: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        span: Option<WireSpan>,
    },
    Done { session_id: String },
}

pub const CLIENT_KINDS: &[&str] = &["load_program", "start_query", "choice_response", "more"];
pub const SERVER_KINDS: &[&str] = &[
    "choice_request",
    "solution",
    "failure",
    "indeterminate",
    "error",
    "done",
];

impl WireMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            WireMessage::LoadProgram { .. } => "load_program",
            WireMessage::StartQuery { .. } => "start_query",
            WireMessage::ChoiceRequest { .. } => "choice_request",
            WireMessage::ChoiceResponse { .. } => "choice_response",
            WireMessage::Solution { .. } => "solution",
            WireMessage::Failure { .. } => "failure",
            WireMessage::Indeterminate { .. } => "indeterminate",
            WireMessage::More { .. } => "more",
            WireMessage::Error { .. } => "error",
            WireMessage::Done { .. } => "done",
        }
    }

    pub fn error(session_id: Option<&str>, message: impl Into<String>) -> Self {
        WireMessage::Error {
            session_id: session_id.map(str::to_string),
            message: message.into(),
            span: None,
        }
    }

    /// The message as one line of JSON, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("wire messages always serialize")
    }
}

/// Source location of a parse error, counted in code points from zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl From<SourceSpan> for WireSpan {
    fn from(s: SourceSpan) -> Self {
        WireSpan {
            start: s.start,
            end: s.end,
            line: s.line,
            column: s.column,
        }
    }
}

/// Decodes one line sent by a client.
///
/// The error is the `error` message to send back.
pub fn decode_client_line(line: &str) -> Result<WireMessage, WireMessage> {
    let value: Value =
        serde_json::from_str(line).map_err(|e| WireMessage::error(None, format!("malformed JSON: {e}")))?;
    let kind = match value.get("kind") {
        Some(Value::String(k)) => k.clone(),
        Some(_) => return Err(WireMessage::error(None, "`kind` must be a string")),
        None => return Err(WireMessage::error(None, "message has no `kind`")),
    };
    if SERVER_KINDS.contains(&kind.as_str()) {
        return Err(WireMessage::error(None, format!("`{kind}` is sent by the server only")));
    }
    if !CLIENT_KINDS.contains(&kind.as_str()) {
        return Err(WireMessage::error(None, format!("unknown message kind `{kind}`")));
    }
    let session_id = value.get("session_id").and_then(Value::as_str).map(str::to_string);
    serde_json::from_value(value).map_err(|e| WireMessage::Error {
        session_id,
        message: format!("invalid `{kind}` message: {e}"),
        span: None,
    })
}
