//! Enumeration of every user choice script for a query.
//!
//! Forks the search at each choice request instead of re-running from the
//! start, so each leaf costs only the work below its last choice.

use super::{prepare_query, Answer, Database, Event, Limits, Outcome, Search, Semantics};
use crate::ast::Goal;
use crate::unify::Substitution;

/// First-answer outcome of the query under one choice script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptRun {
    /// Indices given in order; exactly as many as the search asked for.
    pub script: Vec<usize>,
    pub outcome: Outcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("more than {0} choice scripts")]
pub struct TooManyScripts(pub usize);

/// Runs `goal` under interactive semantics once per possible choice script,
/// in lexicographic script order.
pub fn enumerate_scripts(
    db: &Database,
    goal: &Goal,
    limits: Limits,
    max_runs: usize,
) -> Result<Vec<ScriptRun>, TooManyScripts> {
    let query = prepare_query(goal);
    let root = Search::new(db.clone(), query.goal, Semantics::Prove, Substitution::new(), limits);
    let mut stack = vec![(root, Vec::new())];
    let mut runs = Vec::new();
    while let Some((mut search, script)) = stack.pop() {
        let outcome = match search.resume() {
            Event::Answer(s) => Outcome::Success {
                answers: vec![Answer::from_substitution(&s, &query.bindings)],
                stats: search.stats(),
            },
            Event::Exhausted => Outcome::Failure {
                stats: search.stats(),
            },
            Event::Limit(reason) => Outcome::Indeterminate {
                reason,
                answers: Vec::new(),
                stats: search.stats(),
            },
            Event::Choice(_) => {
                for i in [1, 0] {
                    let mut fork = search.clone();
                    fork.choose(i).expect("search is awaiting a choice");
                    let mut s = script.clone();
                    s.push(i);
                    stack.push((fork, s));
                }
                continue;
            }
        };
        if runs.len() == max_runs {
            return Err(TooManyScripts(max_runs));
        }
        runs.push(ScriptRun { script, outcome });
    }
    Ok(runs)
}
