//! Horn-clause logic programming with additive goals.
//!
//! Goals may combine atoms with `,` (both), `;` (either, chosen by the
//! machine) and `&` (both, but the user decides which one is pursued
//! interactively). Queries run under one of two semantics:
//!
//! * [`Semantics::Prov`]: plain provability; `&` just needs both operands.
//! * [`Semantics::Prove`]: interactive; each `&` asks a [`ChoiceOracle`] for
//!   an operand, solves it interactively, then checks the other operand
//!   without further questions.
//!
//! ```
//! use addprolog::{parse_goal, parse_program, run_query, AnswerMode, Database, Limits, Scripted, Semantics};
//!
//! let db = Database::new(parse_program("panam(paris, nice, '9:40', '10:50'). delta(paris, nice, '8:40', '09:35').")?);
//! let goal = parse_goal("panam(paris,nice,Dt,At) & delta(paris,nice,Dt2,At2)")?;
//! let outcome = run_query(&db, &goal, Semantics::Prove, Scripted::new([0]), Limits::default(), AnswerMode::First)?;
//! assert_eq!(outcome.first_answer().unwrap().get("Dt").unwrap().to_string(), "'9:40'");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! [`session::Session`] wraps a search so a front end can pause at each
//! choice and resume when the user answers.

pub mod ast;
pub mod cli;
pub mod engine;
pub mod parser;
pub mod pretty;
pub mod session;
pub mod unify;

pub use ast::{close_query, free_vars, Clause, ClosedQuery, Goal, Program, Term, Var, VarId, VarSource};
pub use engine::{
    backchain, enumerate_scripts, run_query, solve_prov, solve_prove, Answer, AnswerMode,
    ChoiceOracle, ChoicePoint, Database, Focus, LimitKind, Limits, Outcome, Scripted, Semantics,
    StepStats,
};
pub use parser::{parse_goal, parse_program, parse_term, ParseError, SourceSpan};
pub use pretty::Pretty;
pub use session::{Session, SessionEvent, SessionOptions, SessionState};
pub use unify::{rename_apart, unify, Substitution};
