//! Resumable interactive query execution.
//!
//! A [`Session`] owns a paused [`Search`]. [`Session::advance`] runs it until
//! it needs a user choice, finds an answer, fails or hits a limit;
//! [`Session::resolve_choice`] feeds the user's index back and continues from
//! the exact point where the search stopped. Every step is recorded in an
//! append-only transcript, and replaying the transcript's choices as a script
//! reproduces the same outcome.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::ast::{Goal, Var};
use crate::engine::{
    prepare_query, run_query, Answer, AnswerMode, ChoicePoint, Database, Event, LimitKind, Limits,
    OracleError, Outcome, Scripted, Search, Semantics, TraceEntry,
};
use crate::unify::Substitution;

static NEXT_SESSION: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SessionId(u64);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Identifies one choice request within a session.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RequestId(pub u64);

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

impl std::str::FromStr for RequestId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('r')
            .and_then(|n| n.parse().ok())
            .map(RequestId)
            .ok_or_else(|| format!("malformed request id `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SessionOptions {
    pub semantics: Semantics,
    pub limits: Limits,
    pub mode: AnswerMode,
    pub trace: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SessionEvent {
    ChoiceRequested { request: RequestId, point: ChoicePoint },
    ChoiceMade { request: RequestId, index: usize },
    Solved(Answer),
    /// No (more) answers.
    Failed,
    Indeterminate(LimitKind),
    Log(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SessionState {
    Created,
    /// Between steps; in all-answers mode also after an answer, until the
    /// controller asks for more.
    Running,
    AwaitingChoice { request: RequestId, point: ChoicePoint },
    Done(Outcome),
}

impl SessionState {
    fn name(&self) -> &'static str {
        match self {
            SessionState::Created => "created",
            SessionState::Running => "running",
            SessionState::AwaitingChoice { .. } => "awaiting-choice",
            SessionState::Done(_) => "done",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("cannot {op} a session that is {state}")]
    InvalidState { op: &'static str, state: &'static str },
    #[error("unknown request {0}")]
    UnknownRequest(RequestId),
    #[error("choice index {0} out of range (expected 0 or 1)")]
    IndexOutOfRange(usize),
    #[error("replay diverged: {0}")]
    Replay(#[from] OracleError),
}

pub struct Session {
    id: SessionId,
    db: Database,
    goal: Goal,
    bindings: Vec<(String, Var)>,
    options: SessionOptions,
    search: Search,
    state: SessionState,
    transcript: Vec<SessionEvent>,
    answers: Vec<Answer>,
    next_request: u64,
}

impl Session {
    /// Creates a session without doing any search work.
    pub fn start(db: Database, goal: &Goal, options: SessionOptions) -> Session {
        let query = prepare_query(goal);
        let mut search = Search::new(
            db.clone(),
            query.goal,
            options.semantics,
            Substitution::new(),
            options.limits,
        );
        if options.trace {
            search.enable_trace();
        }
        Session {
            id: SessionId(NEXT_SESSION.fetch_add(1, Ordering::Relaxed)),
            db,
            goal: goal.clone(),
            bindings: query.bindings,
            options,
            search,
            state: SessionState::Created,
            transcript: Vec::new(),
            answers: Vec::new(),
            next_request: 1,
        }
    }

    pub fn id(&self) -> SessionId {
        self.id
    }

    pub fn goal(&self) -> &Goal {
        &self.goal
    }

    pub fn options(&self) -> &SessionOptions {
        &self.options
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        matches!(self.state, SessionState::Done(_))
    }

    pub fn outcome(&self) -> Option<&Outcome> {
        match &self.state {
            SessionState::Done(o) => Some(o),
            _ => None,
        }
    }

    pub fn transcript(&self) -> &[SessionEvent] {
        &self.transcript
    }

    /// Query variable names in source order.
    pub fn variable_names(&self) -> impl Iterator<Item = &str> {
        self.bindings.iter().map(|(n, _)| n.as_str())
    }

    pub fn drain_trace(&mut self) -> Vec<TraceEntry> {
        self.search.drain_trace()
    }

    /// Runs the search until the next event worth reporting.
    pub fn advance(&mut self) -> Result<SessionEvent, SessionError> {
        match self.state {
            SessionState::Created | SessionState::Running => Ok(self.run()),
            _ => Err(SessionError::InvalidState {
                op: "advance",
                state: self.state.name(),
            }),
        }
    }

    /// Answers the pending choice request and continues the search.
    pub fn resolve_choice(&mut self, request: RequestId, index: usize) -> Result<SessionEvent, SessionError> {
        let SessionState::AwaitingChoice { request: pending, .. } = &self.state else {
            return Err(SessionError::InvalidState {
                op: "resolve a choice in",
                state: self.state.name(),
            });
        };
        if *pending != request {
            return Err(SessionError::UnknownRequest(request));
        }
        if index > 1 {
            return Err(SessionError::IndexOutOfRange(index));
        }
        self.search
            .choose(index)
            .expect("search is paused at the pending choice");
        self.transcript.push(SessionEvent::ChoiceMade { request, index });
        self.state = SessionState::Running;
        Ok(self.run())
    }

    fn run(&mut self) -> SessionEvent {
        self.state = SessionState::Running;
        let resumed = self.search.resume();
        let stats = self.search.stats();
        let event = match resumed {
            Event::Answer(s) => {
                let answer = Answer::from_substitution(&s, &self.bindings);
                self.answers.push(answer.clone());
                if self.options.mode == AnswerMode::First {
                    self.state = SessionState::Done(Outcome::Success {
                        answers: self.answers.clone(),
                        stats,
                    });
                }
                SessionEvent::Solved(answer)
            }
            Event::Exhausted => {
                self.state = SessionState::Done(if self.answers.is_empty() {
                    Outcome::Failure { stats }
                } else {
                    Outcome::Success {
                        answers: self.answers.clone(),
                        stats,
                    }
                });
                SessionEvent::Failed
            }
            Event::Limit(reason) => {
                self.state = SessionState::Done(Outcome::Indeterminate {
                    reason,
                    answers: self.answers.clone(),
                    stats,
                });
                SessionEvent::Indeterminate(reason)
            }
            Event::Choice(point) => {
                let request = RequestId(self.next_request);
                self.next_request += 1;
                self.state = SessionState::AwaitingChoice {
                    request,
                    point: point.clone(),
                };
                SessionEvent::ChoiceRequested { request, point }
            }
        };
        self.transcript.push(event.clone());
        event
    }

    /// Choice indices made so far, in order.
    pub fn choices(&self) -> Vec<usize> {
        self.transcript
            .iter()
            .filter_map(|e| match e {
                SessionEvent::ChoiceMade { index, .. } => Some(*index),
                _ => None,
            })
            .collect()
    }

    /// Re-runs the query from scratch with the recorded choices as a script.
    pub fn replay(&self) -> Result<Outcome, SessionError> {
        if !self.is_done() {
            return Err(SessionError::InvalidState {
                op: "replay",
                state: self.state.name(),
            });
        }
        Ok(run_query(
            &self.db,
            &self.goal,
            self.options.semantics,
            Scripted::new(self.choices()),
            self.options.limits,
            self.options.mode,
        )?)
    }
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Session")
            .field("id", &self.id)
            .field("goal", &self.goal.to_string())
            .field("state", &self.state)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_goal, parse_program};
    use crate::pretty::Pretty;

    const BURGER: &str = include_str!("../corpus/burger.lp");
    const FLIGHTS: &str = include_str!("../corpus/flights.lp");

    fn session(src: &str, goal: &str, semantics: Semantics) -> Session {
        let db = Database::new(parse_program(src).unwrap());
        Session::start(
            db,
            &parse_goal(goal).unwrap(),
            SessionOptions {
                semantics,
                ..Default::default()
            },
        )
    }

    #[test]
    fn start_does_no_work() {
        let s = session(BURGER, "hset & fset", Semantics::Prove);
        assert_eq!(s.state(), &SessionState::Created);
        assert!(s.transcript().is_empty());
        let s = session("", "a", Semantics::Prove);
        assert_eq!(s.state(), &SessionState::Created);
    }

    #[test]
    fn burger_asks_for_a_set() {
        let mut s = session(BURGER, "hset & fset", Semantics::Prove);
        let SessionEvent::ChoiceRequested { request, point } = s.advance().unwrap() else {
            panic!("expected a choice request");
        };
        assert_eq!(point.left.pretty(), "hset");
        assert_eq!(point.right.pretty(), "fset");
        assert!(matches!(s.state(), SessionState::AwaitingChoice { .. }));
        assert_eq!(
            s.advance(),
            Err(SessionError::InvalidState {
                op: "advance",
                state: "awaiting-choice"
            })
        );
        assert_eq!(s.resolve_choice(request, 0).unwrap(), SessionEvent::Solved(Answer::default()));
        assert!(s.outcome().unwrap().is_success());
    }

    #[test]
    fn prov_never_suspends() {
        let mut s = session(BURGER, "hset", Semantics::Prov);
        assert_eq!(s.advance().unwrap(), SessionEvent::Solved(Answer::default()));
        let mut s = session(BURGER, "hset & fset", Semantics::Prov);
        assert_eq!(s.advance().unwrap(), SessionEvent::Solved(Answer::default()));
    }

    #[test]
    fn empty_program_fails_on_advance() {
        let mut s = session("", "a", Semantics::Prove);
        assert_eq!(s.advance().unwrap(), SessionEvent::Failed);
        assert!(s.outcome().unwrap().is_failure());
        assert!(s.advance().is_err());
    }

    #[test]
    fn flight_choice_binds_times() {
        let mut s = session(FLIGHTS, "panam(paris,nice,Dt,At) & delta(paris,nice,Dt2,At2)", Semantics::Prove);
        let SessionEvent::ChoiceRequested { request, .. } = s.advance().unwrap() else { panic!() };
        let SessionEvent::Solved(answer) = s.resolve_choice(request, 0).unwrap() else { panic!() };
        let shown: Vec<_> = answer.bindings.iter().map(|(n, t)| format!("{n} = {}", t.pretty())).collect();
        assert_eq!(shown, ["Dt = '9:40'", "At = '10:50'", "Dt2 = '8:40'", "At2 = '09:35'"]);
        assert_eq!(s.replay().unwrap(), *s.outcome().unwrap());
    }

    #[test]
    fn resolve_choice_errors() {
        let mut s = session(BURGER, "hset & fset", Semantics::Prove);
        let SessionEvent::ChoiceRequested { request, .. } = s.advance().unwrap() else { panic!() };
        assert_eq!(s.resolve_choice(request, 2), Err(SessionError::IndexOutOfRange(2)));
        assert_eq!(
            s.resolve_choice(RequestId(99), 0),
            Err(SessionError::UnknownRequest(RequestId(99)))
        );
        s.resolve_choice(request, 1).unwrap();
        assert!(matches!(
            s.resolve_choice(request, 0),
            Err(SessionError::InvalidState { state: "done", .. })
        ));
    }

    #[test]
    fn replay_requires_done() {
        let s = session(BURGER, "hset", Semantics::Prov);
        assert!(s.replay().is_err());
    }

    #[test]
    fn replay_of_failure_and_choice_free_sessions() {
        let mut s = session("q.", "p & q", Semantics::Prove);
        let SessionEvent::ChoiceRequested { request, .. } = s.advance().unwrap() else { panic!() };
        assert_eq!(s.resolve_choice(request, 1).unwrap(), SessionEvent::Failed);
        assert!(s.replay().unwrap().is_failure());

        let mut s = session(BURGER, "hset , fset", Semantics::Prove);
        s.advance().unwrap();
        assert_eq!(s.replay().unwrap(), *s.outcome().unwrap());
    }

    #[test]
    fn all_answers_mode_continues_on_advance() {
        let db = Database::new(parse_program(FLIGHTS).unwrap());
        let mut s = Session::start(
            db,
            &parse_goal("panam(From,To,_,_) & delta(paris,To,_,_)").unwrap(),
            SessionOptions {
                mode: AnswerMode::All,
                ..Default::default()
            },
        );
        let SessionEvent::ChoiceRequested { request, .. } = s.advance().unwrap() else { panic!() };
        assert!(matches!(s.resolve_choice(request, 0).unwrap(), SessionEvent::Solved(_)));
        assert_eq!(s.state(), &SessionState::Running);
        assert!(matches!(s.advance().unwrap(), SessionEvent::Solved(_)));
        assert_eq!(s.advance().unwrap(), SessionEvent::Failed);
        let outcome = s.outcome().unwrap().clone();
        assert_eq!(outcome.answers().len(), 2);
        assert_eq!(s.replay().unwrap(), outcome);
        let names: Vec<_> = s.variable_names().collect();
        assert_eq!(names, ["From", "To"]);
    }

    #[test]
    fn transcript_records_requests_and_choices() {
        let mut s = session("a. b. c.", "(a & b) & c", Semantics::Prove);
        let SessionEvent::ChoiceRequested { request: r1, .. } = s.advance().unwrap() else { panic!() };
        let SessionEvent::ChoiceRequested { request: r2, .. } = s.resolve_choice(r1, 0).unwrap() else {
            panic!()
        };
        assert_ne!(r1, r2);
        s.resolve_choice(r2, 1).unwrap();
        let kinds: Vec<_> = s
            .transcript()
            .iter()
            .map(|e| match e {
                SessionEvent::ChoiceRequested { request, .. } => format!("ask {request}"),
                SessionEvent::ChoiceMade { request, index } => format!("made {request} {index}"),
                SessionEvent::Solved(_) => "solved".into(),
                other => format!("{other:?}"),
            })
            .collect();
        assert_eq!(kinds, ["ask r1", "made r1 0", "ask r2", "made r2 1", "solved"]);
        assert_eq!(s.choices(), [0, 1]);
    }

    #[test]
    fn limit_is_indeterminate() {
        let db = Database::new(parse_program("p :- p.").unwrap());
        let mut s = Session::start(
            db,
            &parse_goal("p").unwrap(),
            SessionOptions {
                limits: Limits::steps(50),
                ..Default::default()
            },
        );
        assert_eq!(s.advance().unwrap(), SessionEvent::Indeterminate(LimitKind::Steps(50)));
        assert!(s.outcome().unwrap().is_indeterminate());
        assert_eq!(s.replay().unwrap(), *s.outcome().unwrap());
    }

    #[test]
    fn session_ids_are_unique() {
        let a = session("", "a", Semantics::Prov);
        let b = session("", "a", Semantics::Prov);
        assert_ne!(a.id(), b.id());
    }

    #[test]
    fn request_id_round_trips() {
        assert_eq!("r12".parse::<RequestId>(), Ok(RequestId(12)));
        assert!("12".parse::<RequestId>().is_err());
    }
}
