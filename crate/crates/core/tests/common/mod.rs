//! Random program/goal generators and a brute-force ground evaluator shared
//! by the property and acceptance suites.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use addprolog::ast::{Clause, Goal, Program, Term, Var, VarSource};
use addprolog::{parse_goal, parse_program, Pretty};
use rand::seq::SliceRandom;
use rand::Rng;

pub const CONSTANTS: &[&str] = &["a", "b", "c"];

/// Share of generated clauses whose body may call any predicate.
pub const RECURSIVE_CLAUSE_RATE: f64 = 0.05;

/// Shape bounds for generated program/goal pairs.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_clauses: usize,
    pub max_predicates: usize,
    pub max_term_depth: usize,
    pub max_goal_connectives: usize,
    pub max_body_connectives: usize,
}

impl Shape {
    pub const SMALL: Shape = Shape {
        max_clauses: 6,
        max_predicates: 3,
        max_term_depth: 2,
        max_goal_connectives: 3,
        max_body_connectives: 2,
    };

    /// Function-free variant for which the Herbrand base is finite.
    pub const DATALOG: Shape = Shape {
        max_term_depth: 0,
        ..Shape::SMALL
    };
}

pub struct Case {
    pub program_text: String,
    pub goal_text: String,
}

impl Case {
    pub fn program(&self) -> Program {
        parse_program(&self.program_text).expect("generated program parses")
    }

    pub fn goal(&self) -> Goal {
        parse_goal(&self.goal_text).expect("generated goal parses")
    }
}

struct Signature {
    preds: Vec<(&'static str, usize)>,
}

fn gen_term_text(rng: &mut impl Rng, depth: usize, vars: &[&str]) -> String {
    let roll = rng.gen_range(0..10);
    if depth > 0 && roll < 2 {
        if rng.gen_bool(0.6) {
            format!("f({})", gen_term_text(rng, depth - 1, vars))
        } else {
            format!(
                "g({},{})",
                gen_term_text(rng, depth - 1, vars),
                gen_term_text(rng, depth - 1, vars)
            )
        }
    } else if roll < 6 && !vars.is_empty() {
        vars.choose(rng).unwrap().to_string()
    } else {
        CONSTANTS.choose(rng).unwrap().to_string()
    }
}

fn gen_atom_text(rng: &mut impl Rng, preds: &[(&str, usize)], depth: usize, vars: &[&str]) -> String {
    let (name, arity) = *preds.choose(rng).unwrap();
    if arity == 0 {
        return name.to_string();
    }
    let args: Vec<_> = (0..arity).map(|_| gen_term_text(rng, depth, vars)).collect();
    format!("{name}({})", args.join(","))
}

fn gen_goal_text(
    rng: &mut impl Rng,
    preds: &[(&str, usize)],
    depth: usize,
    vars: &[&str],
    connectives: usize,
) -> String {
    if connectives == 0 {
        return gen_atom_text(rng, preds, depth, vars);
    }
    let roll = rng.gen_range(0..10);
    if roll == 0 {
        // Binder names are distinct from the clause/query variables.
        let binder = ["U", "V", "W"][connectives.min(3) - 1];
        let mut inner = vars.to_vec();
        inner.push(binder);
        return format!(
            "(exists {binder}. {})",
            gen_goal_text(rng, preds, depth, &inner, connectives - 1)
        );
    }
    let op = match roll {
        1..=3 => ",",
        4..=6 => ";",
        _ => "&",
    };
    let left_share = rng.gen_range(0..connectives);
    let l = gen_goal_text(rng, preds, depth, vars, left_share);
    let r = gen_goal_text(rng, preds, depth, vars, connectives - 1 - left_share);
    format!("({l} {op} {r})")
}

fn gen_signature(rng: &mut impl Rng, shape: Shape) -> Signature {
    let n = rng.gen_range(1..=shape.max_predicates);
    let preds = ["p", "q", "r"][..n]
        .iter()
        .map(|&p| (p, rng.gen_range(0..=2)))
        .collect();
    Signature { preds }
}

/// Random program and goal within `shape`, as source text.
///
/// Clause bodies mostly call predicates declared after the head's, so most
/// programs terminate; a few clauses may call anything, recursion included.
pub fn gen_case(rng: &mut impl Rng, shape: Shape) -> Case {
    let sig = gen_signature(rng, shape);
    let mut clauses = Vec::new();
    for _ in 0..rng.gen_range(1..=shape.max_clauses) {
        let vars = ["X", "Y"];
        let h = rng.gen_range(0..sig.preds.len());
        let head = gen_atom_text(rng, &sig.preds[h..=h], shape.max_term_depth, &vars);
        let callees = if rng.gen_bool(RECURSIVE_CLAUSE_RATE) {
            &sig.preds[..]
        } else {
            &sig.preds[h + 1..]
        };
        if callees.is_empty() || rng.gen_bool(0.4) {
            clauses.push(format!("{head}."));
        } else {
            let k = rng.gen_range(0..=shape.max_body_connectives);
            let body = gen_goal_text(rng, callees, shape.max_term_depth.min(1), &vars, k);
            clauses.push(format!("{head} :- {body}."));
        }
    }
    let k = rng.gen_range(0..=shape.max_goal_connectives);
    let goal = gen_goal_text(rng, &sig.preds, shape.max_term_depth.min(1), &["X", "Y", "Z"], k);
    Case {
        program_text: clauses.join("\n"),
        goal_text: goal,
    }
}

// ---------------------------------------------------------------------------
// AST generator for printer/parser round trips.

const NAMES: &[&str] = &["X", "Y", "Z", "Dt", "At2", "_Tmp"];
const SYMBOLS: &[&str] = &["a", "b", "panam", "9:40", "09", "42", "it's", "A b", "exists", "x_1", "\\"];

pub struct AstGen {
    fresh: VarSource,
    free: HashMap<&'static str, Var>,
    scopes: Vec<(&'static str, Var)>,
}

impl AstGen {
    pub fn new() -> Self {
        AstGen {
            fresh: VarSource::new(),
            free: HashMap::new(),
            scopes: Vec::new(),
        }
    }

    fn var(&mut self, name: &'static str) -> Var {
        if let Some((_, v)) = self.scopes.iter().rev().find(|(n, _)| *n == name) {
            return v.clone();
        }
        let fresh = &mut self.fresh;
        self.free
            .entry(name)
            .or_insert_with(|| fresh.fresh_named(&name.into()))
            .clone()
    }

    pub fn term(&mut self, rng: &mut impl Rng, depth: usize) -> Term {
        match rng.gen_range(0..10) {
            0..=2 => Term::Var(self.var(NAMES.choose(rng).unwrap())),
            3..=5 if depth > 0 => {
                let n = rng.gen_range(1..=3);
                let args = (0..n).map(|_| self.term(rng, depth - 1)).collect();
                Term::compound(*SYMBOLS.choose(rng).unwrap(), args)
            }
            _ => Term::constant(*SYMBOLS.choose(rng).unwrap()),
        }
    }

    fn atom(&mut self, rng: &mut impl Rng) -> Goal {
        loop {
            let t = self.term(rng, 2);
            if !t.is_var() {
                return Goal::atom(t);
            }
        }
    }

    pub fn goal(&mut self, rng: &mut impl Rng, size: usize) -> Goal {
        if size == 0 {
            return self.atom(rng);
        }
        match rng.gen_range(0..4) {
            0 => {
                let name = *NAMES[..5].choose(rng).unwrap();
                let binder = self.fresh.fresh_named(&name.into());
                self.scopes.push((name, binder.clone()));
                let body = self.goal(rng, size - 1);
                self.scopes.pop();
                Goal::exists(binder, body)
            }
            k => {
                let split = rng.gen_range(0..size);
                let l = self.goal(rng, split);
                let r = self.goal(rng, size - 1 - split);
                match k {
                    1 => Goal::tensor(l, r),
                    2 => Goal::plus(l, r),
                    _ => Goal::with(l, r),
                }
            }
        }
    }

    pub fn clause(&mut self, rng: &mut impl Rng) -> Clause {
        let head = match self.atom(rng) {
            Goal::Atom(t) => t,
            _ => unreachable!(),
        };
        let body = rng.gen_bool(0.7).then(|| {
            let size = rng.gen_range(0..=5);
            self.goal(rng, size)
        });
        Clause::new(head, body)
    }
}

// ---------------------------------------------------------------------------
// Brute-force evaluation over a finite Herbrand base (function-free only).

/// Least Herbrand model of a function-free program over `universe`.
pub struct GroundModel {
    pub universe: Vec<Term>,
    pub facts: BTreeSet<String>,
}

fn constants_of_term(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(_) => {}
        Term::Const(c) => {
            out.insert(c.to_string());
        }
        Term::Compound(_, args) => args.iter().for_each(|a| constants_of_term(a, out)),
    }
}

fn constants_of_goal(g: &Goal, out: &mut BTreeSet<String>) {
    match g {
        Goal::Atom(Term::Compound(_, args)) => args.iter().for_each(|a| constants_of_term(a, out)),
        Goal::Atom(_) => {}
        Goal::Tensor(l, r) | Goal::Plus(l, r) | Goal::With(l, r) => {
            constants_of_goal(l, out);
            constants_of_goal(r, out);
        }
        Goal::Exists(_, b) => constants_of_goal(b, out),
    }
}

fn is_function_free(t: &Term) -> bool {
    match t {
        Term::Compound(_, args) => args.iter().all(|a| matches!(a, Term::Var(_) | Term::Const(_))),
        _ => true,
    }
}

fn goal_function_free(g: &Goal) -> bool {
    match g {
        Goal::Atom(t) => is_function_free(t),
        Goal::Tensor(l, r) | Goal::Plus(l, r) | Goal::With(l, r) => goal_function_free(l) && goal_function_free(r),
        Goal::Exists(_, b) => goal_function_free(b),
    }
}

type Env = HashMap<addprolog::VarId, Term>;

fn ground(t: &Term, env: &Env) -> Term {
    match t {
        Term::Var(v) => env.get(&v.id).cloned().expect("variable assigned"),
        Term::Const(_) => t.clone(),
        Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| ground(a, env)).collect()),
    }
}

impl GroundModel {
    /// Returns `None` when the program or goal has function symbols.
    pub fn build(program: &Program, goal: &Goal) -> Option<GroundModel> {
        let mut consts = BTreeSet::new();
        for c in &program.clauses {
            if !is_function_free(&c.head) || !c.body.as_ref().is_none_or(goal_function_free) {
                return None;
            }
            if let Term::Compound(_, args) = &c.head {
                args.iter().for_each(|a| constants_of_term(a, &mut consts));
            }
            if let Some(b) = &c.body {
                constants_of_goal(b, &mut consts);
            }
        }
        if !goal_function_free(goal) {
            return None;
        }
        constants_of_goal(goal, &mut consts);
        consts.insert("a".into());
        let universe: Vec<Term> = consts.into_iter().map(Term::constant).collect();
        let mut model = GroundModel {
            universe,
            facts: BTreeSet::new(),
        };
        loop {
            let mut added = false;
            for c in &program.clauses {
                for env in model.assignments(&c.universals) {
                    let holds = c.body.as_ref().is_none_or(|b| model.holds(b, &env));
                    if holds && model.facts.insert(ground(&c.head, &env).pretty()) {
                        added = true;
                    }
                }
            }
            if !added {
                return Some(model);
            }
        }
    }

    fn assignments(&self, vars: &[Var]) -> Vec<Env> {
        let mut out = vec![Env::new()];
        for v in vars {
            out = out
                .into_iter()
                .flat_map(|env| {
                    self.universe.iter().map(move |t| {
                        let mut e = env.clone();
                        e.insert(v.id, t.clone());
                        e
                    })
                })
                .collect();
        }
        out
    }

    /// Truth of `g` under `env`; `&` and `,` are both conjunction here.
    pub fn holds(&self, g: &Goal, env: &Env) -> bool {
        match g {
            Goal::Atom(t) => self.facts.contains(&ground(t, env).pretty()),
            Goal::Tensor(l, r) | Goal::With(l, r) => self.holds(l, env) && self.holds(r, env),
            Goal::Plus(l, r) => self.holds(l, env) || self.holds(r, env),
            Goal::Exists(v, b) => self.universe.iter().any(|t| {
                let mut e = env.clone();
                e.insert(v.id, t.clone());
                self.holds(b, &e)
            }),
        }
    }

    /// Whether some assignment of the goal's free variables makes it true.
    pub fn provable(&self, g: &Goal) -> bool {
        self.assignments(&g.free_vars_ordered())
            .iter()
            .any(|env| self.holds(g, env))
    }
}
