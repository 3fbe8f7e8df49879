//! Abstract syntax: terms, goals, clauses and programs.
//!
//! Goals are built from atoms with four connectives: `,` (tensor), `;`
//! (machine-chosen disjunction), `&` (user-chosen conjunction) and an
//! explicit existential binder. Clauses are Horn clauses whose bodies are
//! goals; every clause is reusable any number of times.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Interned-ish symbol used for constants and functors.
pub type Symbol = Arc<str>;

/// Numeric identity of a variable. Two variables are the same variable iff
/// their ids are equal; the name is only a printing hint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_G{}", self.0)
    }
}

#[derive(Clone, Debug)]
pub struct Var {
    pub id: VarId,
    pub name: Symbol,
}

impl Var {
    pub fn new(id: u32, name: impl Into<Symbol>) -> Self {
        Var {
            id: VarId(id),
            name: name.into(),
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

/// Source of never-before-used variable ids.
///
/// One source is owned by each search; ids it hands out are strictly
/// increasing, so a variable produced by renaming can never collide with one
/// already present in the search state.
#[derive(Clone, Debug, Default)]
pub struct VarSource {
    next: u32,
}

impl VarSource {
    pub fn new() -> Self {
        Self::default()
    }

    /// A source whose first id is `next`.
    pub fn starting_at(next: u32) -> Self {
        VarSource { next }
    }

    /// A source guaranteed not to collide with any variable in `goal`.
    pub fn after_goal(goal: &Goal) -> Self {
        Self::starting_at(goal.max_var_id().map_or(0, |v| v.0 + 1))
    }

    pub fn peek(&self) -> u32 {
        self.next
    }

    /// Fresh variable printed as `_G<id>`.
    pub fn fresh(&mut self) -> Var {
        let id = self.bump();
        Var {
            id: VarId(id),
            name: format!("_G{id}").into(),
        }
    }

    /// Fresh variable that keeps a source name for display.
    pub fn fresh_named(&mut self, name: &Symbol) -> Var {
        Var {
            id: VarId(self.bump()),
            name: name.clone(),
        }
    }

    fn bump(&mut self) -> u32 {
        let id = self.next;
        self.next = self.next.checked_add(1).expect("variable ids exhausted");
        id
    }
}

/// First-order term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Const(Symbol),
    /// `functor(args..)`, always with at least one argument. Arguments are
    /// shared, so instantiated terms may be far larger than their memory use.
    Compound(Symbol, Arc<[Term]>),
}

impl Term {
    pub fn constant(name: impl Into<Symbol>) -> Self {
        Term::Const(name.into())
    }

    /// Builds `functor(args..)`.
    ///
    /// # Panics
    ///
    /// Panics if `args` is empty; nullary terms are constants.
    pub fn compound(functor: impl Into<Symbol>, args: Vec<Term>) -> Self {
        assert!(!args.is_empty(), "compound terms need at least one argument");
        Term::Compound(functor.into(), args.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// `(name, arity)` of a non-variable term.
    pub fn predicate_key(&self) -> Option<(&Symbol, usize)> {
        match self {
            Term::Var(_) => None,
            Term::Const(name) => Some((name, 0)),
            Term::Compound(name, args) => Some((name, args.len())),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::Compound(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn vars_into(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::Compound(_, args) => args.iter().for_each(|a| a.vars_into(out)),
        }
    }

    pub fn contains_var(&self, id: VarId) -> bool {
        match self {
            Term::Var(v) => v.id == id,
            Term::Const(_) => false,
            Term::Compound(_, args) => args.iter().any(|a| a.contains_var(id)),
        }
    }

    /// Replaces variables according to `map`, leaving others untouched.
    pub fn rename(&self, map: &HashMap<VarId, Var>) -> Term {
        match self {
            Term::Var(v) => match map.get(&v.id) {
                Some(to) => Term::Var(to.clone()),
                None => self.clone(),
            },
            Term::Const(_) => self.clone(),
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| a.rename(map)).collect())
            }
        }
    }

    fn max_var_id(&self) -> Option<VarId> {
        match self {
            Term::Var(v) => Some(v.id),
            Term::Const(_) => None,
            Term::Compound(_, args) => args.iter().filter_map(Term::max_var_id).max(),
        }
    }
}

/// Goal formula.
///
/// Binary connectives share their operands through `Arc` so the search can
/// push subgoals without copying them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Goal {
    /// Atomic goal; the term is never a bare variable.
    Atom(Term),
    /// `G , G`: both, under one substitution.
    Tensor(Arc<Goal>, Arc<Goal>),
    /// `G ; G`: one of them, picked by the search.
    Plus(Arc<Goal>, Arc<Goal>),
    /// `G & G`: both; under interactive execution the user picks which one is
    /// pursued interactively.
    With(Arc<Goal>, Arc<Goal>),
    /// `exists X. G`
    Exists(Var, Arc<Goal>),
}

impl Goal {
    /// # Panics
    ///
    /// Panics if `term` is a variable.
    pub fn atom(term: Term) -> Self {
        assert!(!term.is_var(), "an atomic goal cannot be a bare variable");
        Goal::Atom(term)
    }

    pub fn tensor(l: Goal, r: Goal) -> Self {
        Goal::Tensor(Arc::new(l), Arc::new(r))
    }

    pub fn plus(l: Goal, r: Goal) -> Self {
        Goal::Plus(Arc::new(l), Arc::new(r))
    }

    pub fn with(l: Goal, r: Goal) -> Self {
        Goal::With(Arc::new(l), Arc::new(r))
    }

    pub fn exists(v: Var, body: Goal) -> Self {
        Goal::Exists(v, Arc::new(body))
    }

    /// Number of binary connectives and binders.
    pub fn connectives(&self) -> usize {
        match self {
            Goal::Atom(_) => 0,
            Goal::Tensor(l, r) | Goal::Plus(l, r) | Goal::With(l, r) => {
                1 + l.connectives() + r.connectives()
            }
            Goal::Exists(_, b) => 1 + b.connectives(),
        }
    }

    pub fn with_count(&self) -> usize {
        match self {
            Goal::Atom(_) => 0,
            Goal::With(l, r) => 1 + l.with_count() + r.with_count(),
            Goal::Tensor(l, r) | Goal::Plus(l, r) => l.with_count() + r.with_count(),
            Goal::Exists(_, b) => b.with_count(),
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars_ordered(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<VarId>, out: &mut Vec<Var>) {
        match self {
            Goal::Atom(t) => {
                let mut vs = Vec::new();
                t.vars_into(&mut vs);
                for v in vs {
                    if !bound.contains(&v.id) && !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
            Goal::Tensor(l, r) | Goal::Plus(l, r) | Goal::With(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Goal::Exists(v, b) => {
                bound.push(v.id);
                b.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable occurring anywhere, binders included.
    pub fn all_vars_into(&self, out: &mut Vec<Var>) {
        match self {
            Goal::Atom(t) => t.vars_into(out),
            Goal::Tensor(l, r) | Goal::Plus(l, r) | Goal::With(l, r) => {
                l.all_vars_into(out);
                r.all_vars_into(out);
            }
            Goal::Exists(v, b) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
                b.all_vars_into(out);
            }
        }
    }

    pub fn binders_into(&self, out: &mut Vec<Var>) {
        match self {
            Goal::Atom(_) => {}
            Goal::Tensor(l, r) | Goal::Plus(l, r) | Goal::With(l, r) => {
                l.binders_into(out);
                r.binders_into(out);
            }
            Goal::Exists(v, b) => {
                out.push(v.clone());
                b.binders_into(out);
            }
        }
    }

    /// Renames variables (free and bound alike) according to `map`.
    pub fn rename(&self, map: &HashMap<VarId, Var>) -> Goal {
        match self {
            Goal::Atom(t) => Goal::Atom(t.rename(map)),
            Goal::Tensor(l, r) => Goal::tensor(l.rename(map), r.rename(map)),
            Goal::Plus(l, r) => Goal::plus(l.rename(map), r.rename(map)),
            Goal::With(l, r) => Goal::with(l.rename(map), r.rename(map)),
            Goal::Exists(v, b) => {
                let v = map.get(&v.id).cloned().unwrap_or_else(|| v.clone());
                Goal::exists(v, b.rename(map))
            }
        }
    }

    pub fn max_var_id(&self) -> Option<VarId> {
        match self {
            Goal::Atom(t) => t.max_var_id(),
            Goal::Tensor(l, r) | Goal::Plus(l, r) | Goal::With(l, r) => {
                l.max_var_id().max(r.max_var_id())
            }
            Goal::Exists(v, b) => Some(v.id).max(b.max_var_id()),
        }
    }
}

/// Variables of `g` not captured by an enclosing binder.
pub fn free_vars(g: &Goal) -> BTreeSet<VarId> {
    g.free_vars_ordered().into_iter().map(|v| v.id).collect()
}

/// A query with its free variables renamed fresh and recorded for answer
/// reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedQuery {
    pub goal: Goal,
    /// Source name and variable, in first-occurrence order. Variables whose
    /// name starts with `_` are renamed but not recorded.
    pub bindings: Vec<(String, Var)>,
}

/// Renames the free variables of `g` to fresh ids from `fresh` and records
/// them. Free variables are read as implicitly existential; their final
/// values are the answer.
pub fn close_query(g: &Goal, fresh: &mut VarSource) -> ClosedQuery {
    let mut map = HashMap::new();
    let mut bindings = Vec::new();
    for v in g.free_vars_ordered() {
        let nv = fresh.fresh_named(&v.name);
        if !v.name.starts_with('_') {
            bindings.push((v.name.to_string(), nv.clone()));
        }
        map.insert(v.id, nv);
    }
    ClosedQuery {
        goal: g.rename(&map),
        bindings,
    }
}

/// `head.` or `head :- body.` under an implicit universal prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Term,
    pub body: Option<Goal>,
    /// Variables of head and body not bound inside the body.
    pub universals: Vec<Var>,
}

impl Clause {
    /// Builds a clause whose universal prefix is inferred from head and body.
    pub fn new(head: Term, body: Option<Goal>) -> Self {
        assert!(!head.is_var(), "clause head cannot be a variable");
        let mut universals = Vec::new();
        head.vars_into(&mut universals);
        if let Some(b) = &body {
            for v in b.free_vars_ordered() {
                if !universals.contains(&v) {
                    universals.push(v);
                }
            }
        }
        Clause {
            head,
            body,
            universals,
        }
    }

    pub fn fact(head: Term) -> Self {
        Self::new(head, None)
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_none()
    }
}

/// Ordered list of clauses; selection order is source order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<Clause>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Self {
        Program { clauses }
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }
}

/// Structural equality up to a consistent bijective renaming of variables.
#[derive(Default)]
struct Bijection {
    fwd: HashMap<VarId, VarId>,
    bwd: HashMap<VarId, VarId>,
}

impl Bijection {
    fn pair(&mut self, a: VarId, b: VarId) -> bool {
        match (self.fwd.get(&a), self.bwd.get(&b)) {
            (None, None) => {
                self.fwd.insert(a, b);
                self.bwd.insert(b, a);
                true
            }
            (Some(x), Some(y)) => *x == b && *y == a,
            _ => false,
        }
    }

    fn term(&mut self, a: &Term, b: &Term) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => self.pair(x.id, y.id),
            (Term::Const(x), Term::Const(y)) => x == y,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.term(x, y))
            }
            _ => false,
        }
    }

    fn goal(&mut self, a: &Goal, b: &Goal) -> bool {
        match (a, b) {
            (Goal::Atom(x), Goal::Atom(y)) => self.term(x, y),
            (Goal::Tensor(a1, a2), Goal::Tensor(b1, b2))
            | (Goal::Plus(a1, a2), Goal::Plus(b1, b2))
            | (Goal::With(a1, a2), Goal::With(b1, b2)) => self.goal(a1, b1) && self.goal(a2, b2),
            (Goal::Exists(x, a1), Goal::Exists(y, b1)) => self.pair(x.id, y.id) && self.goal(a1, b1),
            _ => false,
        }
    }
}

pub fn alpha_eq_term(a: &Term, b: &Term) -> bool {
    Bijection::default().term(a, b)
}

pub fn alpha_eq_goal(a: &Goal, b: &Goal) -> bool {
    Bijection::default().goal(a, b)
}

pub fn alpha_eq_clause(a: &Clause, b: &Clause) -> bool {
    let mut bij = Bijection::default();
    let body_eq = match (&a.body, &b.body) {
        (None, None) => true,
        (Some(x), Some(y)) => bij.goal(x, y),
        _ => false,
    };
    body_eq
        && bij.term(&a.head, &b.head)
        && a.universals.len() == b.universals.len()
        && a.universals
            .iter()
            .all(|u| bij.fwd.get(&u.id).is_some_and(|m| b.universals.iter().any(|w| w.id == *m)))
}
