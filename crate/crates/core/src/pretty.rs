//! Printing in the concrete syntax accepted by [`crate::parser`].
//!
//! Operands whose connective differs from their parent's are parenthesized,
//! as is a same-connective left operand and every `exists` used as an
//! operand. A same-connective right operand is written bare since all three
//! connectives associate to the right.

use std::fmt::{self, Write};

use crate::ast::{Clause, Goal, Program, Term};

pub trait Pretty {
    fn write_pretty(&self, out: &mut String);

    fn pretty(&self) -> String {
        let mut s = String::new();
        self.write_pretty(&mut s);
        s
    }
}

fn is_plain_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_lowercase()) && cs.all(|c| c.is_alphanumeric() || c == '_')
}

fn is_number(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit())
}

fn is_var_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_uppercase() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_')
}

pub(crate) fn write_symbol(out: &mut String, s: &str) {
    if is_plain_ident(s) || is_number(s) {
        out.push_str(s);
    } else {
        out.push('\'');
        for c in s.chars() {
            match c {
                '\'' => out.push_str("''"),
                '\\' => out.push_str("\\\\"),
                c => out.push(c),
            }
        }
        out.push('\'');
    }
}

impl Pretty for Term {
    fn write_pretty(&self, out: &mut String) {
        match self {
            Term::Var(v) => {
                // `_` alone would re-parse as a new anonymous variable.
                if is_var_name(&v.name) && &*v.name != "_" {
                    out.push_str(&v.name);
                } else {
                    let _ = write!(out, "{}", v.id);
                }
            }
            Term::Const(s) => write_symbol(out, s),
            Term::Compound(f, args) => {
                write_symbol(out, f);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    a.write_pretty(out);
                }
                out.push(')');
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Op {
    Tensor,
    Plus,
    With,
}

fn binary(g: &Goal) -> Option<(Op, &Goal, &Goal)> {
    match g {
        Goal::Tensor(l, r) => Some((Op::Tensor, l, r)),
        Goal::Plus(l, r) => Some((Op::Plus, l, r)),
        Goal::With(l, r) => Some((Op::With, l, r)),
        _ => None,
    }
}

fn write_operand(out: &mut String, child: &Goal, parent: Op, right: bool) {
    let bare = match (child, binary(child)) {
        (Goal::Atom(_), _) => true,
        (_, Some((op, _, _))) => right && op == parent,
        _ => false,
    };
    if bare {
        child.write_pretty(out);
    } else {
        out.push('(');
        child.write_pretty(out);
        out.push(')');
    }
}

impl Pretty for Goal {
    fn write_pretty(&self, out: &mut String) {
        match self {
            Goal::Atom(t) => t.write_pretty(out),
            Goal::Exists(v, body) => {
                out.push_str("exists ");
                Term::Var(v.clone()).write_pretty(out);
                out.push_str(". ");
                body.write_pretty(out);
            }
            _ => {
                let (op, l, r) = binary(self).expect("binary connective");
                write_operand(out, l, op, false);
                out.push_str(match op {
                    Op::Tensor => " , ",
                    Op::Plus => " ; ",
                    Op::With => " & ",
                });
                write_operand(out, r, op, true);
            }
        }
    }
}

impl Pretty for Clause {
    fn write_pretty(&self, out: &mut String) {
        self.head.write_pretty(out);
        if let Some(body) = &self.body {
            out.push_str(" :- ");
            body.write_pretty(out);
        }
        out.push('.');
    }
}

impl Pretty for Program {
    fn write_pretty(&self, out: &mut String) {
        for c in &self.clauses {
            c.write_pretty(out);
            out.push('\n');
        }
    }
}

macro_rules! display_via_pretty {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.pretty())
            }
        }
    )*};
}

display_via_pretty!(Term, Goal, Clause, Program);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_goal, parse_program, parse_term};

    fn a(name: &str) -> Goal {
        Goal::atom(Term::constant(name))
    }

    #[test]
    fn mixed_connectives_get_parentheses() {
        assert_eq!(Goal::with(a("a"), Goal::plus(a("b"), a("c"))).pretty(), "a & (b ; c)");
    }

    #[test]
    fn mixed_nesting_is_always_parenthesized() {
        let g = Goal::with(Goal::plus(Goal::tensor(a("a"), a("b")), a("c")), a("d"));
        assert_eq!(g.pretty(), "((a , b) ; c) & d");
    }

    #[test]
    fn right_nested_tensor_is_bare() {
        assert_eq!(Goal::tensor(a("a"), Goal::tensor(a("b"), a("c"))).pretty(), "a , b , c");
        assert_eq!(Goal::tensor(Goal::tensor(a("a"), a("b")), a("c")).pretty(), "(a , b) , c");
    }

    #[test]
    fn clause_forms() {
        let p = parse_program("h :- g.\nf.").unwrap();
        assert_eq!(p.clauses[0].pretty(), "h :- g.");
        assert_eq!(p.clauses[1].pretty(), "f.");
    }

    #[test]
    fn burger_body_matches_source() {
        let src = "hset :- hburger , coke , (onion ; cone).";
        assert_eq!(parse_program(src).unwrap().clauses[0].pretty(), src);
    }

    #[test]
    fn terms_and_quoting() {
        for src in [
            "panam(paris,nice,'9:40','10:50')",
            "f(X,g(Y,'A b'),42)",
            "'it''s'",
            "'\\\\'",
            "''",
            "'Upper'",
        ] {
            assert_eq!(parse_term(src).unwrap().pretty(), src);
        }
    }

    #[test]
    fn exists_operand_is_parenthesized() {
        let g = parse_goal("a , (exists X. p(X)) ; b").unwrap();
        assert_eq!(g.pretty(), "(a , (exists X. p(X))) ; b");
        let top = parse_goal("exists X. p(X) & q(X)").unwrap();
        assert_eq!(top.pretty(), "exists X. p(X) & q(X)");
    }

    #[test]
    fn anonymous_variables_print_by_id() {
        let g = parse_goal("p(_, _)").unwrap();
        assert_eq!(g.pretty(), "p(_G0,_G1)");
    }
}
