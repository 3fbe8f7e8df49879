//! Per-connection protocol state, independent of any transport.

use std::collections::BTreeMap;
use std::str::FromStr;

use addprolog::session::{RequestId, SessionError};
use addprolog::{
    parse_goal, parse_program, AnswerMode, Database, Limits, Outcome, Pretty, Semantics, Session, SessionEvent,
    SessionOptions,
};
use serde_json::Map;

use crate::protocol::{decode_client_line, WireMessage, WireSpan};

pub const DEFAULT_MAX_SESSIONS: usize = 16;

#[derive(Clone, Copy, Debug)]
pub struct ConnectionConfig {
    /// Step limit applied to every session.
    pub limits: Limits,
    /// How many unfinished sessions one connection may hold.
    pub max_sessions: usize,
}

impl Default for ConnectionConfig {
    fn default() -> Self {
        ConnectionConfig {
            limits: Limits::default(),
            max_sessions: DEFAULT_MAX_SESSIONS,
        }
    }
}

/// The loaded program and live sessions of one client.
///
/// Finished sessions are dropped, so later messages naming them get an
/// `unknown session` error.
pub struct Connection {
    config: ConnectionConfig,
    program: Option<Database>,
    sessions: BTreeMap<String, Session>,
    next_session: u64,
}

impl Connection {
    pub fn new(config: ConnectionConfig) -> Self {
        Connection {
            config,
            program: None,
            sessions: BTreeMap::new(),
            next_session: 1,
        }
    }

    pub fn live_sessions(&self) -> usize {
        self.sessions.len()
    }

    /// Handles every non-blank line of a frame in order.
    pub fn handle_text(&mut self, text: &str) -> Vec<WireMessage> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .flat_map(|l| self.handle_line(l))
            .collect()
    }

    /// Handles one client line and returns the replies in order.
    pub fn handle_line(&mut self, line: &str) -> Vec<WireMessage> {
        match decode_client_line(line) {
            Ok(msg) => self.handle(msg),
            Err(reply) => vec![reply],
        }
    }

    pub fn handle(&mut self, msg: WireMessage) -> Vec<WireMessage> {
        match msg {
            WireMessage::LoadProgram { program } => match parse_program(&program) {
                Ok(p) => {
                    self.program = Some(Database::new(p));
                    Vec::new()
                }
                Err(e) => vec![WireMessage::Error {
                    session_id: None,
                    message: format!("program: {e}"),
                    span: Some(WireSpan::from(e.span)),
                }],
            },
            WireMessage::StartQuery { goal, semantics, mode } => self.start_query(&goal, semantics, mode),
            WireMessage::ChoiceResponse {
                session_id,
                request_id,
                index,
            } => self.with_session(&session_id, |s| match RequestId::from_str(&request_id) {
                Ok(r) => s.resolve_choice(r, usize::try_from(index).unwrap_or(usize::MAX)),
                Err(_) => Err(SessionError::UnknownRequest(RequestId(0))),
            }),
            WireMessage::More { session_id } => self.with_session(&session_id, Session::advance),
            other => vec![WireMessage::error(
                None,
                format!("`{}` is sent by the server only", other.kind()),
            )],
        }
    }

    fn start_query(&mut self, goal: &str, semantics: Option<String>, mode: Option<String>) -> Vec<WireMessage> {
        let Some(db) = self.program.clone() else {
            return vec![WireMessage::error(None, "no program loaded")];
        };
        let semantics = match semantics.as_deref().map(Semantics::from_str) {
            None => Semantics::Prove,
            Some(Ok(s)) => s,
            Some(Err(_)) => {
                return vec![WireMessage::error(None, "semantics must be `prov` or `prove`")];
            }
        };
        let mode = match mode.as_deref() {
            None | Some("first") => AnswerMode::First,
            Some("all") => AnswerMode::All,
            Some(_) => return vec![WireMessage::error(None, "mode must be `first` or `all`")],
        };
        let goal = match parse_goal(goal) {
            Ok(g) => g,
            Err(e) => {
                return vec![WireMessage::Error {
                    session_id: None,
                    message: format!("goal: {e}"),
                    span: Some(WireSpan::from(e.span)),
                }]
            }
        };
        if self.sessions.len() >= self.config.max_sessions {
            return vec![WireMessage::error(
                None,
                format!("too many live sessions (limit {})", self.config.max_sessions),
            )];
        }
        let id = format!("s{}", self.next_session);
        self.next_session += 1;
        let options = SessionOptions {
            semantics,
            limits: self.config.limits,
            mode,
            trace: false,
        };
        self.sessions.insert(id.clone(), Session::start(db, &goal, options));
        self.with_session(&id, Session::advance)
    }

    fn with_session(
        &mut self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<SessionEvent, SessionError>,
    ) -> Vec<WireMessage> {
        let Some(session) = self.sessions.get_mut(id) else {
            return vec![WireMessage::error(Some(id), format!("unknown session {id}"))];
        };
        let event = match f(session) {
            Ok(ev) => ev,
            Err(e) => return vec![WireMessage::error(Some(id), error_text(&e))],
        };
        let mut out = Vec::new();
        let session_id = id.to_string();
        match event {
            SessionEvent::ChoiceRequested { request, point } => out.push(WireMessage::ChoiceRequest {
                session_id: session_id.clone(),
                request_id: request.to_string(),
                left: point.left.pretty(),
                right: point.right.pretty(),
            }),
            SessionEvent::Solved(answer) => {
                let bindings: Map<_, _> = answer
                    .bindings
                    .iter()
                    .map(|(name, t)| (name.clone(), t.pretty().into()))
                    .collect();
                out.push(WireMessage::Solution {
                    session_id: session_id.clone(),
                    bindings,
                });
            }
            SessionEvent::Failed => {
                if matches!(session.outcome(), Some(Outcome::Failure { .. })) {
                    out.push(WireMessage::Failure {
                        session_id: session_id.clone(),
                    });
                }
            }
            SessionEvent::Indeterminate(reason) => out.push(WireMessage::Indeterminate {
                session_id: session_id.clone(),
                reason: reason.to_string(),
            }),
            SessionEvent::ChoiceMade { .. } | SessionEvent::Log(_) => {}
        }
        if session.is_done() {
            self.sessions.remove(id);
            out.push(WireMessage::Done { session_id });
        }
        out
    }
}

fn error_text(e: &SessionError) -> String {
    match e {
        SessionError::UnknownRequest(_) => "unknown request".into(),
        SessionError::InvalidState { state: "awaiting-choice", .. } => "a choice is pending".into(),
        SessionError::InvalidState { state: "running", .. } => "no choice is pending".into(),
        other => other.to_string(),
    }
}
