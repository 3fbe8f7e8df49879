//! Proof search under the two semantics.
//!
//! Under [`Semantics::Prov`] an `&` goal simply requires both operands. Under
//! [`Semantics::Prove`] the engine asks a [`ChoiceOracle`] which operand the
//! user wants, solves that one interactively and then checks the other one
//! under `Prov`, so no further questions are asked while it runs. In both
//! semantics `;` is resolved by the machine: left operand first, the right
//! one on backtracking.

mod exhaustive;
mod machine;
mod oracle;

pub use exhaustive::{enumerate_scripts, ScriptRun, TooManyScripts};
pub use machine::{
    Database, Event, Focus, LimitKind, Limits, MachineError, Search, Semantics, StepStats,
    TraceEntry,
};
pub use oracle::{ChoiceOracle, ChoicePoint, NoChoices, OracleError, PathStep, Scripted};

use crate::ast::{close_query, ClosedQuery, Goal, Term, Var, VarSource};
use crate::unify::Substitution;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("indeterminate: {0}")]
    Indeterminate(LimitKind),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Lazy stream of answer substitutions.
///
/// Ends after the search is exhausted or after yielding one error.
pub struct Solutions<'o> {
    search: Search,
    oracle: Box<dyn ChoiceOracle + 'o>,
    done: bool,
}

impl<'o> Solutions<'o> {
    pub fn new(search: Search, oracle: impl ChoiceOracle + 'o) -> Self {
        Solutions {
            search,
            oracle: Box::new(oracle),
            done: false,
        }
    }

    pub fn stats(&self) -> StepStats {
        self.search.stats()
    }

    pub fn search_mut(&mut self) -> &mut Search {
        &mut self.search
    }
}

impl Iterator for Solutions<'_> {
    type Item = Result<Substitution, SearchError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            match self.search.resume() {
                Event::Answer(s) => return Some(Ok(s)),
                Event::Exhausted => {
                    self.done = true;
                    return None;
                }
                Event::Limit(kind) => {
                    self.done = true;
                    return Some(Err(SearchError::Indeterminate(kind)));
                }
                Event::Choice(point) => {
                    let chosen = self
                        .oracle
                        .choose(&point)
                        .and_then(|i| {
                            self.search.choose(i).map_err(|_| OracleError::IndexOutOfRange(i))
                        });
                    if let Err(e) = chosen {
                        self.done = true;
                        return Some(Err(e.into()));
                    }
                }
            }
        }
    }
}

/// Non-interactive search: `&` requires both operands, left then right.
pub fn solve_prov(db: &Database, goal: &Goal, s: Substitution, limits: Limits) -> Solutions<'static> {
    Solutions::new(
        Search::new(db.clone(), goal.clone(), Semantics::Prov, s, limits),
        NoChoices,
    )
}

/// Interactive search: every `&` reached outside an unchosen operand asks
/// `oracle` for an index.
pub fn solve_prove<'o>(
    db: &Database,
    goal: &Goal,
    s: Substitution,
    oracle: impl ChoiceOracle + 'o,
    limits: Limits,
) -> Solutions<'o> {
    Solutions::new(
        Search::new(db.clone(), goal.clone(), Semantics::Prove, s, limits),
        oracle,
    )
}

/// Backchains on one distinguished clause: unify its head with the atom,
/// then solve its body. `focus.clause` must already be renamed apart.
pub fn backchain(focus: Focus, db: &Database, s: Substitution, limits: Limits) -> Solutions<'static> {
    Solutions::new(Search::focused(db.clone(), focus, s, limits), NoChoices)
}

/// Values of the query variables in one solution, in source order.
///
/// Variables left unbound by the solution are omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Answer {
    pub bindings: Vec<(String, Term)>,
}

impl Answer {
    pub fn from_substitution(s: &Substitution, vars: &[(String, Var)]) -> Self {
        let bindings = vars
            .iter()
            .filter_map(|(name, v)| {
                let t = s.apply(&Term::Var(v.clone()));
                match &t {
                    Term::Var(w) if w.id == v.id => None,
                    _ => Some((name.clone(), t)),
                }
            })
            .collect();
        Answer { bindings }
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.bindings.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success { answers: Vec<Answer>, stats: StepStats },
    Failure { stats: StepStats },
    /// A limit stopped the search. Answers found before that are kept.
    Indeterminate {
        reason: LimitKind,
        answers: Vec<Answer>,
        stats: StepStats,
    },
}

impl Outcome {
    pub fn stats(&self) -> StepStats {
        match self {
            Outcome::Success { stats, .. }
            | Outcome::Failure { stats }
            | Outcome::Indeterminate { stats, .. } => *stats,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success { .. })
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Outcome::Failure { .. })
    }

    pub fn is_indeterminate(&self) -> bool {
        matches!(self, Outcome::Indeterminate { .. })
    }

    pub fn answers(&self) -> &[Answer] {
        match self {
            Outcome::Success { answers, .. } | Outcome::Indeterminate { answers, .. } => answers,
            Outcome::Failure { .. } => &[],
        }
    }

    pub fn first_answer(&self) -> Option<&Answer> {
        self.answers().first()
    }
}

/// Whether a query stops at the first answer or enumerates them all.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AnswerMode {
    #[default]
    First,
    All,
}

/// Renames the free variables of a user query apart from everything else.
pub fn prepare_query(goal: &Goal) -> ClosedQuery {
    close_query(goal, &mut VarSource::after_goal(goal))
}

/// Runs a query to completion and summarizes the result.
pub fn run_query(
    db: &Database,
    goal: &Goal,
    semantics: Semantics,
    oracle: impl ChoiceOracle,
    limits: Limits,
    mode: AnswerMode,
) -> Result<Outcome, OracleError> {
    let query = prepare_query(goal);
    let search = Search::new(db.clone(), query.goal, semantics, Substitution::new(), limits);
    let mut solutions = Solutions::new(search, oracle);
    let mut answers = Vec::new();
    loop {
        match solutions.next() {
            Some(Ok(s)) => {
                answers.push(Answer::from_substitution(&s, &query.bindings));
                if mode == AnswerMode::First {
                    break;
                }
            }
            Some(Err(SearchError::Indeterminate(reason))) => {
                return Ok(Outcome::Indeterminate {
                    reason,
                    answers,
                    stats: solutions.stats(),
                });
            }
            Some(Err(SearchError::Oracle(e))) => return Err(e),
            None => break,
        }
    }
    let stats = solutions.stats();
    Ok(if answers.is_empty() {
        Outcome::Failure { stats }
    } else {
        Outcome::Success { answers, stats }
    })
}
