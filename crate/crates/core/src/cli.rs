//! Command-line front end: batch queries and an interactive REPL.
//!
//! Exit codes: 0 success, 1 failure, 2 indeterminate (a limit was hit),
//! 3 usage, I/O or parse error.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::Parser;

use crate::engine::{Answer, AnswerMode, ChoicePoint, Database, Limits, Outcome, Semantics};
use crate::parser::{parse_goal, parse_program};
use crate::pretty::Pretty;
use crate::session::{Session, SessionEvent, SessionOptions, SessionState};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "addprolog", version, about = "Logic programming with user-chosen (&) and machine-chosen (;) goals")]
pub struct Args {
    /// Program file (`.lp`).
    pub program: PathBuf,

    /// `prove` asks the user at every `&`; `prov` never asks.
    #[arg(long, default_value = "prove")]
    pub semantics: Semantics,

    /// Comma-separated choice indices answered in order instead of prompting.
    #[arg(long)]
    pub choices: Option<String>,

    /// Goal to run in batch mode; without it a REPL starts.
    #[arg(long)]
    pub query: Option<String>,

    /// Print every answer instead of the first.
    #[arg(long)]
    pub all: bool,

    #[arg(long, default_value_t = Limits::DEFAULT_STEPS)]
    pub limit_steps: u64,

    /// Print applied rules to stderr.
    #[arg(long)]
    pub trace: bool,
}

fn parse_choices(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<usize>() {
            Ok(i @ (0 | 1)) => Ok(i),
            _ => Err(format!("invalid choice `{s}` in --choices (expected 0 or 1)")),
        })
        .collect()
}

/// Where the answers to choice requests come from.
enum Chooser {
    Script { choices: Vec<usize>, next: usize },
    Prompt,
}

enum Stop {
    Exit(i32),
}

struct Io<'a> {
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn read_line(&mut self) -> Option<String> {
        let mut line = String::new();
        match self.input.read_line(&mut line) {
            Ok(0) | Err(_) => None,
            Ok(_) => Some(line),
        }
    }
}

fn print_answer(out: &mut dyn Write, answer: &Answer) {
    for (name, value) in &answer.bindings {
        let _ = writeln!(out, "{name} = {}.", value.pretty());
    }
    let _ = writeln!(out, "yes.");
}

fn print_choice(out: &mut dyn Write, point: &ChoicePoint) {
    let _ = writeln!(out, "choose:");
    let _ = writeln!(out, "  [0] {}", point.left.pretty());
    let _ = writeln!(out, "  [1] {}", point.right.pretty());
}

impl Chooser {
    fn pick(&mut self, point: &ChoicePoint, io: &mut Io<'_>) -> Result<usize, Stop> {
        match self {
            Chooser::Script { choices, next } => match choices.get(*next) {
                Some(&i) => {
                    *next += 1;
                    Ok(i)
                }
                None => {
                    let _ = writeln!(io.err, "error: choice script exhausted after {} choice(s)", choices.len());
                    Err(Stop::Exit(EXIT_ERROR))
                }
            },
            Chooser::Prompt => {
                print_choice(io.out, point);
                loop {
                    let _ = write!(io.out, "> ");
                    let _ = io.out.flush();
                    let Some(line) = io.read_line() else {
                        let _ = writeln!(io.err, "error: input closed while waiting for a choice");
                        return Err(Stop::Exit(EXIT_ERROR));
                    };
                    match line.trim().trim_end_matches('.') {
                        "0" => return Ok(0),
                        "1" => return Ok(1),
                        _ => {
                            let _ = writeln!(io.out, "please answer 0 or 1");
                        }
                    }
                }
            }
        }
    }
}

fn flush_trace(session: &mut Session, err: &mut dyn Write) {
    for entry in session.drain_trace() {
        let _ = writeln!(err, "{entry}");
    }
}

/// Drives `session` until it reports an answer, failure or limit, prompting
/// for choices on the way. With `keep_going` every answer is printed until
/// the search ends.
fn drive(session: &mut Session, chooser: &mut Chooser, io: &mut Io<'_>, keep_going: bool) -> Result<(), Stop> {
    let mut printed_any = false;
    let mut event = session.advance();
    loop {
        flush_trace(session, io.err);
        match event {
            Ok(SessionEvent::ChoiceRequested { request, point }) => {
                let index = chooser.pick(&point, io)?;
                event = session.resolve_choice(request, index);
            }
            Ok(SessionEvent::Solved(answer)) => {
                print_answer(io.out, &answer);
                printed_any = true;
                if keep_going && !session.is_done() {
                    event = session.advance();
                } else {
                    return Ok(());
                }
            }
            Ok(SessionEvent::Failed) => {
                if !printed_any {
                    let _ = writeln!(io.out, "no.");
                }
                return Ok(());
            }
            Ok(SessionEvent::Indeterminate(reason)) => {
                let _ = writeln!(io.out, "unknown.");
                let _ = writeln!(io.err, "note: {reason}");
                return Ok(());
            }
            Ok(SessionEvent::ChoiceMade { .. } | SessionEvent::Log(_)) => {
                event = session.advance();
            }
            Err(e) => {
                let _ = writeln!(io.err, "error: {e}");
                return Err(Stop::Exit(EXIT_ERROR));
            }
        }
    }
}

fn exit_code(outcome: Option<&Outcome>) -> i32 {
    match outcome {
        Some(Outcome::Success { .. }) => EXIT_SUCCESS,
        Some(Outcome::Failure { .. }) => EXIT_FAILURE,
        Some(Outcome::Indeterminate { .. }) => EXIT_INDETERMINATE,
        None => EXIT_ERROR,
    }
}

/// Entry point with injectable streams. Returns the process exit code.
pub fn main_with<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_SUCCESS
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_ERROR
                }
            };
        }
    };
    let mut io = Io { input, out, err };
    match run(&args, &mut io) {
        Ok(code) | Err(Stop::Exit(code)) => code,
    }
}

fn run(args: &Args, io: &mut Io<'_>) -> Result<i32, Stop> {
    let origin = args.program.display().to_string();
    let source = std::fs::read_to_string(&args.program).map_err(|e| {
        let _ = writeln!(io.err, "error: cannot read `{origin}`: {e}");
        Stop::Exit(EXIT_ERROR)
    })?;
    let program = parse_program(&source).map_err(|e| {
        let _ = writeln!(io.err, "{}", e.render(&source, &origin));
        Stop::Exit(EXIT_ERROR)
    })?;
    let db = Database::new(program);
    let script = args
        .choices
        .as_deref()
        .map(parse_choices)
        .transpose()
        .map_err(|e| {
            let _ = writeln!(io.err, "error: {e}");
            Stop::Exit(EXIT_ERROR)
        })?;
    let mut chooser = match script {
        Some(choices) => Chooser::Script { choices, next: 0 },
        None => Chooser::Prompt,
    };
    let options = SessionOptions {
        semantics: args.semantics,
        limits: Limits::steps(args.limit_steps),
        mode: if args.all { AnswerMode::All } else { AnswerMode::First },
        trace: args.trace,
    };

    let Some(query) = &args.query else {
        repl_loop(&db, options, &mut chooser, io);
        return Ok(EXIT_SUCCESS);
    };
    let goal = parse_goal(query).map_err(|e| {
        let _ = writeln!(io.err, "{}", e.render(query, "<query>"));
        Stop::Exit(EXIT_ERROR)
    })?;
    let mut session = Session::start(db, &goal, options);
    drive(&mut session, &mut chooser, io, args.all)?;
    Ok(exit_code(session.outcome()))
}

/// Reads `?- goal.` lines until `halt.` or end of input.
///
/// Queries always run in all-answers mode so `more.` can resume them; only
/// the first answer is printed until `more.` is entered.
fn repl_loop(db: &Database, options: SessionOptions, chooser: &mut Chooser, io: &mut Io<'_>) {
    let options = SessionOptions {
        mode: AnswerMode::All,
        ..options
    };
    let mut active: Option<Session> = None;
    loop {
        let _ = write!(io.out, "?- ");
        let _ = io.out.flush();
        let Some(line) = io.read_line() else {
            let _ = writeln!(io.out);
            return;
        };
        let text = line.trim();
        let text = text.strip_prefix("?-").map(str::trim).unwrap_or(text);
        match text {
            "" => continue,
            "halt." | "halt" => return,
            "more." | "more" => match active.as_mut() {
                Some(s) if matches!(s.state(), SessionState::Running) => {
                    if let Err(Stop::Exit(_)) = drive(s, chooser, io, false) {
                        active = None;
                    }
                }
                _ => {
                    let _ = writeln!(io.out, "no.");
                }
            },
            goal_text => match parse_goal(goal_text) {
                Ok(goal) => {
                    let mut session = Session::start(db.clone(), &goal, options);
                    active = match drive(&mut session, chooser, io, false) {
                        Ok(()) => Some(session),
                        Err(Stop::Exit(_)) => None,
                    };
                }
                Err(e) => {
                    let _ = writeln!(io.out, "{}", e.render(goal_text, "<query>"));
                }
            },
        }
    }
}
