//! Substitutions, unification with occurs check, and renaming clauses apart.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::ast::{Clause, Goal, Symbol, Term, Var, VarId, VarSource};

/// Finite map from variables to terms.
///
/// Stored in triangular form on a persistent map: a binding's right-hand side
/// may mention other bound variables, and every read resolves the chain. Old
/// values stay valid after extension, which is all backtracking needs.
#[derive(Clone, Default)]
pub struct Substitution {
    map: im::HashMap<VarId, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Adds `var ↦ term`, refusing self-bindings, rebinding, and cycles.
    pub fn extend(&self, var: &Var, term: Term) -> Option<Substitution> {
        if self.map.contains_key(&var.id) {
            return None;
        }
        if self.occurs(var.id, &term) {
            return None;
        }
        Some(self.bind(var.id, term))
    }

    fn bind(&self, id: VarId, term: Term) -> Substitution {
        debug_assert!(!matches!(&term, Term::Var(v) if v.id == id));
        Substitution {
            map: self.map.update(id, term),
        }
    }

    /// Follows variable-to-variable links until an unbound variable or a
    /// non-variable term is reached. Does not descend into arguments.
    pub fn walk<'a>(&'a self, term: &'a Term) -> &'a Term {
        let mut t = term;
        while let Term::Var(v) = t {
            match self.map.get(&v.id) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    pub fn lookup(&self, id: VarId) -> Option<Term> {
        self.map.get(&id).map(|t| self.apply(t))
    }

    /// Fully instantiates `term`.
    pub fn apply(&self, term: &Term) -> Term {
        enum Work<'a> {
            Visit(&'a Term),
            Build(&'a Symbol, &'a Arc<[Term]>),
            Remember(VarId),
        }
        // Each bound variable and each argument list is resolved once and the
        // result shared. The traversal keeps its own stack since answers can
        // be very deep.
        let mut cache: HashMap<VarId, Term> = HashMap::new();
        let mut built: HashMap<(*const u8, *const Term), Term> = HashMap::new();
        let mut work = vec![Work::Visit(term)];
        let mut done: Vec<Term> = Vec::new();
        while let Some(w) = work.pop() {
            match w {
                Work::Visit(t @ Term::Var(v)) => {
                    if let Some(resolved) = cache.get(&v.id) {
                        done.push(resolved.clone());
                    } else if let Some(bound) = self.map.get(&v.id) {
                        work.push(Work::Remember(v.id));
                        work.push(Work::Visit(bound));
                    } else {
                        done.push(t.clone());
                    }
                }
                Work::Visit(t @ Term::Const(_)) => done.push(t.clone()),
                Work::Visit(Term::Compound(f, args)) => {
                    if let Some(t) = built.get(&(f.as_ptr(), args.as_ptr())) {
                        done.push(t.clone());
                    } else {
                        work.push(Work::Build(f, args));
                        work.extend(args.iter().rev().map(Work::Visit));
                    }
                }
                Work::Build(f, args) => {
                    let new_args: Arc<[Term]> = done.drain(done.len() - args.len()..).collect();
                    let t = Term::Compound(f.clone(), new_args);
                    built.insert((f.as_ptr(), args.as_ptr()), t.clone());
                    done.push(t);
                }
                Work::Remember(id) => {
                    cache.insert(id, done.last().expect("resolved term").clone());
                }
            }
        }
        done.pop().expect("one result")
    }

    /// Instantiates every atom of `goal`. Binders are left alone: they carry
    /// fresh ids and are never in the domain.
    pub fn apply_goal(&self, goal: &Goal) -> Goal {
        match goal {
            Goal::Atom(t) => Goal::Atom(self.apply(t)),
            Goal::Tensor(l, r) => Goal::tensor(self.apply_goal(l), self.apply_goal(r)),
            Goal::Plus(l, r) => Goal::plus(self.apply_goal(l), self.apply_goal(r)),
            Goal::With(l, r) => Goal::with(self.apply_goal(l), self.apply_goal(r)),
            Goal::Exists(v, b) => Goal::exists(v.clone(), self.apply_goal(b)),
        }
    }

    /// Idempotent form: every right-hand side fully resolved.
    pub fn normalized(&self) -> BTreeMap<VarId, Term> {
        self.map
            .iter()
            .map(|(k, v)| (*k, self.apply(v)))
            .collect()
    }

    /// Substitution with only the listed variables, each fully resolved.
    pub fn restrict(&self, vars: &[Var]) -> Substitution {
        let mut out = Substitution::new();
        for v in vars {
            if let Some(t) = self.lookup(v.id) {
                if !matches!(&t, Term::Var(w) if w.id == v.id) {
                    out = out.bind(v.id, t);
                }
            }
        }
        out
    }

    // Bound variables and argument lists can be shared many times over, so
    // each one is expanded at most once.
    fn occurs(&self, id: VarId, term: &Term) -> bool {
        let mut seen = HashSet::new();
        let mut seen_args = HashSet::new();
        let mut todo = vec![term];
        while let Some(t) = todo.pop() {
            match t {
                Term::Var(v) if v.id == id => return true,
                Term::Var(v) => {
                    if seen.insert(v.id) {
                        if let Some(bound) = self.map.get(&v.id) {
                            todo.push(bound);
                        }
                    }
                }
                Term::Const(_) => {}
                Term::Compound(_, args) => {
                    if seen_args.insert(args.as_ptr()) {
                        todo.extend(args.iter());
                    }
                }
            }
        }
        false
    }
}

impl PartialEq for Substitution {
    fn eq(&self, other: &Self) -> bool {
        self.normalized() == other.normalized()
    }
}

impl Eq for Substitution {}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.normalized()).finish()
    }
}

/// Most general unifier of `t1` and `t2` extending `s`, or `None`.
///
/// The occurs check is always on.
pub fn unify(t1: &Term, t2: &Term, s: &Substitution) -> Option<Substitution> {
    let mut s = s.clone();
    let mut stack = vec![(t1.clone(), t2.clone())];
    let mut seen = HashSet::new();
    // Keeps the lists in `seen` alive so their addresses are not reused.
    let mut visited = Vec::new();
    while let Some((a, b)) = stack.pop() {
        let a = s.walk(&a).clone();
        let b = s.walk(&b).clone();
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x.id == y.id => {}
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if s.occurs(x.id, &t) {
                    return None;
                }
                s = s.bind(x.id, t);
            }
            (Term::Const(x), Term::Const(y)) => {
                if x != y {
                    return None;
                }
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                // Shared argument lists need to be matched only once.
                let key = (xs.as_ptr() as usize, ys.as_ptr() as usize);
                if !Arc::ptr_eq(&xs, &ys) && seen.insert(key) {
                    stack.extend(xs.iter().cloned().zip(ys.iter().cloned()).rev());
                    visited.push((xs, ys));
                }
            }
            _ => return None,
        }
    }
    Some(s)
}

/// Copy of `c` with its universals and body binders replaced by fresh
/// variables.
pub fn rename_apart(c: &Clause, fresh: &mut VarSource) -> Clause {
    if c.universals.is_empty() && !has_binders(c) {
        return c.clone();
    }
    let mut map = HashMap::new();
    for u in &c.universals {
        map.insert(u.id, fresh.fresh());
    }
    if let Some(body) = &c.body {
        let mut binders = Vec::new();
        body.binders_into(&mut binders);
        for b in binders {
            map.insert(b.id, fresh.fresh());
        }
    }
    Clause {
        head: c.head.rename(&map),
        body: c.body.as_ref().map(|b| b.rename(&map)),
        universals: c.universals.iter().map(|u| map[&u.id].clone()).collect(),
    }
}

fn has_binders(c: &Clause) -> bool {
    let mut binders = Vec::new();
    if let Some(b) = &c.body {
        b.binders_into(&mut binders);
    }
    !binders.is_empty()
}
