//! The search machine.
//!
//! Proof search runs over an explicit continuation (a persistent stack of
//! pending tasks) and a stack of backtrack frames. Both are cheap to clone,
//! which gives three things at once: substitutions are restored by keeping
//! old values, the machine can stop in the middle of a derivation to wait for
//! a user choice and later continue, and a paused machine can be forked to
//! explore every choice script.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use tracing::debug;

use super::oracle::{ChoicePoint, PathStep};
use crate::ast::{Clause, Goal, Program, Symbol, Term, VarSource};
use crate::pretty::Pretty;
use crate::unify::{rename_apart, unify, Substitution};

/// Which operational semantics drives `&`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Semantics {
    /// Both operands of `&` are solved; nobody is asked.
    Prov,
    /// The user picks the operand to pursue; the other is checked under
    /// [`Semantics::Prov`].
    #[default]
    Prove,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Prov => "prov",
            Semantics::Prove => "prove",
        })
    }
}

impl std::str::FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prov" => Ok(Semantics::Prov),
            "prove" => Ok(Semantics::Prove),
            other => Err(format!("unknown semantics `{other}` (expected prov or prove)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of resolution steps before the search gives up.
    pub steps: u64,
}

impl Limits {
    pub const DEFAULT_STEPS: u64 = 100_000;

    pub fn steps(steps: u64) -> Self {
        Limits { steps }
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            steps: Self::DEFAULT_STEPS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    Steps(u64),
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitKind::Steps(n) => write!(f, "step limit of {n} reached"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    /// Clause attempts plus connective reductions.
    pub resolution_steps: u64,
    pub choice_requests: u64,
    pub max_depth: usize,
    /// Choice requests raised while an unchosen `&` operand was still being
    /// checked. Must stay zero.
    pub demoted_choice_requests: u64,
}

/// One applied rule, for `--trace` style output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub step: u64,
    pub rule: &'static str,
    pub subject: String,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[step{}] {} {}", self.step, self.rule, self.subject)
    }
}

/// A renamed-apart clause singled out for backchaining against an atom.
#[derive(Clone, Debug)]
pub struct Focus {
    pub clause: Clause,
    pub goal_atom: Term,
}

/// A program plus its predicate index. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Database {
    inner: Arc<DbInner>,
}

#[derive(Debug)]
struct DbInner {
    program: Program,
    index: HashMap<(Symbol, usize), Arc<[usize]>>,
}

impl Database {
    pub fn new(program: Program) -> Self {
        let mut index: HashMap<(Symbol, usize), Vec<usize>> = HashMap::new();
        for (i, c) in program.clauses.iter().enumerate() {
            let (name, arity) = c.head.predicate_key().expect("clause head is not a variable");
            index.entry((name.clone(), arity)).or_default().push(i);
        }
        Database {
            inner: Arc::new(DbInner {
                program,
                index: index.into_iter().map(|(k, v)| (k, v.into())).collect(),
            }),
        }
    }

    pub fn program(&self) -> &Program {
        &self.inner.program
    }

    fn candidates(&self, atom: &Term) -> Option<Arc<[usize]>> {
        let (name, arity) = atom.predicate_key()?;
        self.inner.index.get(&(name.clone(), arity)).cloned()
    }
}

impl From<Program> for Database {
    fn from(p: Program) -> Self {
        Database::new(p)
    }
}

/// What the machine stopped for.
#[derive(Clone, Debug)]
pub enum Event {
    Answer(Substitution),
    Choice(ChoicePoint),
    Exhausted,
    Limit(LimitKind),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("the search is not waiting for a choice")]
    NotAwaitingChoice,
    #[error("choice index {0} out of range (expected 0 or 1)")]
    IndexOutOfRange(usize),
}

type Path = Option<Arc<PathNode>>;

#[derive(Debug)]
struct PathNode {
    step: PathStep,
    parent: Path,
}

fn extend_path(path: &Path, step: PathStep) -> Path {
    Some(Arc::new(PathNode {
        step,
        parent: path.clone(),
    }))
}

fn path_vec(path: &Path) -> Vec<PathStep> {
    let mut out = Vec::new();
    let mut cur = path;
    while let Some(node) = cur {
        out.push(node.step);
        cur = &node.parent;
    }
    out.reverse();
    out
}

#[derive(Clone, Debug)]
enum Task {
    Solve {
        goal: Arc<Goal>,
        mode: Semantics,
        depth: usize,
        path: Path,
    },
    Focus {
        clause: Arc<Clause>,
        atom: Term,
        mode: Semantics,
        depth: usize,
    },
    EnterDemoted,
    ExitDemoted,
}

type Cont = Option<Arc<ContNode>>;

#[derive(Debug)]
struct ContNode {
    task: Task,
    next: Cont,
}

// Continuations and paths can be as long as the search is deep; unlink them
// iteratively so dropping one cannot exhaust the stack.
impl Drop for ContNode {
    fn drop(&mut self) {
        let mut next = self.next.take();
        while let Some(node) = next {
            match Arc::try_unwrap(node) {
                Ok(mut node) => next = node.next.take(),
                Err(_) => break,
            }
        }
    }
}

impl Drop for PathNode {
    fn drop(&mut self) {
        let mut parent = self.parent.take();
        while let Some(node) = parent {
            match Arc::try_unwrap(node) {
                Ok(mut node) => parent = node.parent.take(),
                Err(_) => break,
            }
        }
    }
}

fn push(task: Task, next: Cont) -> Cont {
    Some(Arc::new(ContNode { task, next }))
}

#[derive(Clone, Debug)]
struct State {
    subst: Substitution,
    cont: Cont,
    /// How many unchosen `&` operands are currently being checked.
    demoted: u32,
}

#[derive(Clone, Debug)]
struct Selection {
    atom: Term,
    candidates: Arc<[usize]>,
    mode: Semantics,
    depth: usize,
    path: Path,
}

#[derive(Clone, Debug)]
enum Alternative {
    Clauses { sel: Selection, next: usize },
    Task(Task),
}

#[derive(Clone, Debug)]
struct Frame {
    alt: Alternative,
    state: State,
}

#[derive(Clone, Debug)]
struct Pending {
    left: Arc<Goal>,
    right: Arc<Goal>,
    depth: usize,
    path: Path,
    state: State,
    point: ChoicePoint,
}

/// A resumable depth-first search over one goal.
///
/// [`Search::resume`] runs until the next answer, choice request, exhaustion
/// or limit. After a choice request the caller must call
/// [`Search::choose`] before resuming.
#[derive(Clone, Debug)]
pub struct Search {
    db: Database,
    fresh: VarSource,
    limits: Limits,
    stats: StepStats,
    current: Option<State>,
    frames: Vec<Frame>,
    pending: Option<Pending>,
    halted: Option<Event>,
    trace: Option<Vec<TraceEntry>>,
}

impl Search {
    /// Search for `goal` under `semantics`, starting from substitution `s`.
    pub fn new(db: Database, goal: Goal, semantics: Semantics, s: Substitution, limits: Limits) -> Self {
        let fresh = fresh_after(&goal, &s, None);
        let task = Task::Solve {
            goal: Arc::new(goal),
            mode: semantics,
            depth: 0,
            path: None,
        };
        Self::with_task(db, task, s, fresh, limits)
    }

    /// Search that starts in the backchaining phase on `focus`.
    pub fn focused(db: Database, focus: Focus, s: Substitution, limits: Limits) -> Self {
        let fresh = fresh_after(&Goal::Atom(focus.goal_atom.clone()), &s, Some(&focus.clause));
        let task = Task::Focus {
            clause: Arc::new(focus.clause),
            atom: focus.goal_atom,
            mode: Semantics::Prov,
            depth: 0,
        };
        Self::with_task(db, task, s, fresh, limits)
    }

    fn with_task(db: Database, task: Task, subst: Substitution, fresh: VarSource, limits: Limits) -> Self {
        Search {
            db,
            fresh,
            limits,
            stats: StepStats::default(),
            current: Some(State {
                subst,
                cont: push(task, None),
                demoted: 0,
            }),
            frames: Vec::new(),
            pending: None,
            halted: None,
            trace: None,
        }
    }

    /// Records applied rules; see [`Search::drain_trace`].
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn drain_trace(&mut self) -> Vec<TraceEntry> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn awaiting_choice(&self) -> Option<&ChoicePoint> {
        self.pending.as_ref().map(|p| &p.point)
    }

    /// Supplies the user's operand index for the pending `&` goal.
    ///
    /// The chosen operand runs first, still interactively; the other one runs
    /// afterwards under the accumulated substitution and never asks. The
    /// choice itself is not a backtrack point.
    pub fn choose(&mut self, index: usize) -> Result<(), MachineError> {
        if index > 1 {
            return Err(if self.pending.is_some() {
                MachineError::IndexOutOfRange(index)
            } else {
                MachineError::NotAwaitingChoice
            });
        }
        let p = self.pending.take().ok_or(MachineError::NotAwaitingChoice)?;
        let (chosen, unchosen) = if index == 0 { (p.left, p.right) } else { (p.right, p.left) };
        self.note("with-choose", || format!("{index}"));
        debug!(index, "user chose & operand");
        let depth = p.depth + 1;
        let cont = push(
            Task::Solve {
                goal: chosen,
                mode: Semantics::Prove,
                depth,
                path: extend_path(&p.path, PathStep::Chosen(index)),
            },
            push(
                Task::EnterDemoted,
                push(
                    Task::Solve {
                        goal: unchosen,
                        mode: Semantics::Prov,
                        depth,
                        path: extend_path(&p.path, PathStep::Unchosen(1 - index)),
                    },
                    push(Task::ExitDemoted, p.state.cont),
                ),
            ),
        );
        self.current = Some(State { cont, ..p.state });
        Ok(())
    }

    /// Runs until something needs the caller's attention.
    pub fn resume(&mut self) -> Event {
        if let Some(p) = &self.pending {
            return Event::Choice(p.point.clone());
        }
        loop {
            if let Some(ev) = &self.halted {
                return ev.clone();
            }
            let state = match self.current.take() {
                Some(s) => s,
                None => match self.backtrack() {
                    Some(s) => s,
                    None => continue,
                },
            };
            let Some(node) = state.cont.clone() else {
                return Event::Answer(state.subst);
            };
            let rest = State {
                cont: node.next.clone(),
                ..state
            };
            if let Some(ev) = self.step(&node.task, rest) {
                return ev;
            }
        }
    }

    fn tick(&mut self) -> bool {
        if self.stats.resolution_steps >= self.limits.steps {
            debug!(limit = self.limits.steps, "step limit reached");
            self.halted = Some(Event::Limit(LimitKind::Steps(self.limits.steps)));
            self.current = None;
            return false;
        }
        self.stats.resolution_steps += 1;
        true
    }

    fn note(&mut self, rule: &'static str, subject: impl FnOnce() -> String) {
        if let Some(t) = &mut self.trace {
            t.push(TraceEntry {
                step: self.stats.resolution_steps,
                rule,
                subject: subject(),
            });
        }
    }

    fn step(&mut self, task: &Task, rest: State) -> Option<Event> {
        match task {
            Task::EnterDemoted => {
                self.current = Some(State {
                    demoted: rest.demoted + 1,
                    ..rest
                });
                None
            }
            Task::ExitDemoted => {
                self.current = Some(State {
                    demoted: rest.demoted - 1,
                    ..rest
                });
                None
            }
            Task::Focus {
                clause,
                atom,
                mode,
                depth,
            } => {
                if !self.tick() {
                    return None;
                }
                self.stats.max_depth = self.stats.max_depth.max(*depth);
                self.current = unify(&clause.head, atom, &rest.subst).map(|subst| {
                    let cont = match &clause.body {
                        Some(b) => push(
                            Task::Solve {
                                goal: Arc::new(b.clone()),
                                mode: *mode,
                                depth: depth + 1,
                                path: None,
                            },
                            rest.cont,
                        ),
                        None => rest.cont,
                    };
                    State { subst, cont, ..rest }
                });
                None
            }
            Task::Solve {
                goal,
                mode,
                depth,
                path,
            } => {
                self.stats.max_depth = self.stats.max_depth.max(*depth);
                self.reduce(goal, *mode, *depth, path, rest)
            }
        }
    }

    fn reduce(&mut self, goal: &Arc<Goal>, mode: Semantics, depth: usize, path: &Path, rest: State) -> Option<Event> {
        let sub = |g: &Arc<Goal>, m: Semantics, step: PathStep| Task::Solve {
            goal: g.clone(),
            mode: m,
            depth: depth + 1,
            path: extend_path(path, step),
        };
        match &**goal {
            Goal::Atom(atom) => {
                self.current = match self.db.candidates(atom) {
                    Some(candidates) => {
                        let sel = Selection {
                            atom: atom.clone(),
                            candidates,
                            mode,
                            depth,
                            path: path.clone(),
                        };
                        self.try_clauses(sel, 0, rest)
                    }
                    None => None,
                };
            }
            Goal::Tensor(l, r) => {
                if !self.tick() {
                    return None;
                }
                self.note("tensor", || goal.pretty());
                let cont = push(
                    sub(l, mode, PathStep::TensorLeft),
                    push(sub(r, mode, PathStep::TensorRight), rest.cont),
                );
                self.current = Some(State { cont, ..rest });
            }
            Goal::Plus(l, r) => {
                if !self.tick() {
                    return None;
                }
                self.note("plus-left", || goal.pretty());
                self.frames.push(Frame {
                    alt: Alternative::Task(sub(r, mode, PathStep::PlusRight)),
                    state: rest.clone(),
                });
                let cont = push(sub(l, mode, PathStep::PlusLeft), rest.cont);
                self.current = Some(State { cont, ..rest });
            }
            Goal::With(l, r) if mode == Semantics::Prov => {
                if !self.tick() {
                    return None;
                }
                self.note("with-both", || goal.pretty());
                let cont = push(
                    sub(l, mode, PathStep::WithLeft),
                    push(sub(r, mode, PathStep::WithRight), rest.cont),
                );
                self.current = Some(State { cont, ..rest });
            }
            Goal::With(l, r) => {
                if !self.tick() {
                    return None;
                }
                self.note("with-ask", || goal.pretty());
                self.stats.choice_requests += 1;
                if rest.demoted > 0 {
                    self.stats.demoted_choice_requests += 1;
                }
                let point = ChoicePoint {
                    left: rest.subst.apply_goal(l),
                    right: rest.subst.apply_goal(r),
                    path: path_vec(path),
                };
                self.pending = Some(Pending {
                    left: l.clone(),
                    right: r.clone(),
                    depth,
                    path: path.clone(),
                    state: rest,
                    point: point.clone(),
                });
                return Some(Event::Choice(point));
            }
            Goal::Exists(v, body) => {
                if !self.tick() {
                    return None;
                }
                let witness = self.fresh.fresh_named(&v.name);
                self.note("exists", || goal.pretty());
                let body = body.rename(&HashMap::from([(v.id, witness)]));
                let cont = push(sub(&Arc::new(body), mode, PathStep::ExistsBody), rest.cont);
                self.current = Some(State { cont, ..rest });
            }
        }
        None
    }

    /// Tries candidate clauses from `start` in source order; the first whose
    /// head unifies becomes the new state and the remaining ones are kept as
    /// a backtrack frame.
    fn try_clauses(&mut self, sel: Selection, start: usize, state: State) -> Option<State> {
        for i in start..sel.candidates.len() {
            if !self.tick() {
                return None;
            }
            let index = sel.candidates[i];
            let clause = rename_apart(&self.db.program().clauses[index], &mut self.fresh);
            let Some(subst) = unify(&clause.head, &sel.atom, &state.subst) else {
                continue;
            };
            self.note(if clause.is_fact() { "fact" } else { "backchain" }, || {
                clause.pretty()
            });
            let cont = match clause.body {
                Some(body) => push(
                    Task::Solve {
                        goal: Arc::new(body),
                        mode: sel.mode,
                        depth: sel.depth + 1,
                        path: extend_path(&sel.path, PathStep::Clause(index)),
                    },
                    state.cont.clone(),
                ),
                None => state.cont.clone(),
            };
            let demoted = state.demoted;
            if i + 1 < sel.candidates.len() {
                self.frames.push(Frame {
                    alt: Alternative::Clauses { sel, next: i + 1 },
                    state,
                });
            }
            return Some(State { subst, cont, demoted });
        }
        None
    }

    fn backtrack(&mut self) -> Option<State> {
        while let Some(frame) = self.frames.pop() {
            match frame.alt {
                Alternative::Task(task) => {
                    debug!("backtracking into the other disjunct");
                    self.note("plus-right", String::new);
                    return Some(State {
                        cont: push(task, frame.state.cont.clone()),
                        ..frame.state
                    });
                }
                Alternative::Clauses { sel, next } => {
                    if let Some(s) = self.try_clauses(sel, next, frame.state) {
                        return Some(s);
                    }
                    if self.halted.is_some() {
                        return None;
                    }
                }
            }
        }
        self.halted = Some(Event::Exhausted);
        None
    }
}

fn fresh_after(goal: &Goal, s: &Substitution, clause: Option<&Clause>) -> VarSource {
    let mut max = goal.max_var_id().map(|v| v.0);
    for (k, t) in s.normalized() {
        let mut vars = Vec::new();
        t.vars_into(&mut vars);
        for id in std::iter::once(k).chain(vars.iter().map(|v| v.id)) {
            max = max.max(Some(id.0));
        }
    }
    if let Some(c) = clause {
        let mut vars = Vec::new();
        c.head.vars_into(&mut vars);
        if let Some(b) = &c.body {
            b.all_vars_into(&mut vars);
        }
        max = max.max(vars.iter().map(|v| v.id.0).max());
    }
    VarSource::starting_at(max.map_or(0, |m| m + 1))
}
