//! Concrete syntax for programs and goals.
//!
//! ```text
//! clause  ::= term "." | term ":-" goal "."
//! goal    ::= plus ("&" goal)?          loosest, user choice
//! plus    ::= tensor (";" plus)?        machine choice
//! tensor  ::= unary ("," tensor)?       tightest
//! unary   ::= "exists" VAR "." goal | "(" goal ")" | term
//! ```
//!
//! Lowercase identifiers, digit strings and single-quoted text are constants
//! or functors; uppercase or `_`-initial identifiers are variables. `%` starts
//! a comment running to end of line.

use std::collections::HashMap;
use std::fmt;

use crate::ast::{Clause, Goal, Program, Symbol, Term, Var, VarSource};

/// Location in the source text. All fields count code points from zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{}:{}: {message}", span.line + 1, span.column + 1)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
        }
    }

    /// Renders the error with the offending source line and a caret marker.
    pub fn render(&self, source: &str, origin: &str) -> String {
        let line_text = source.lines().nth(self.span.line).unwrap_or("");
        let width = (self.span.end - self.span.start).max(1);
        format!(
            "{origin}:{}:{}: error: {}\n  | {line_text}\n  | {}{}",
            self.span.line + 1,
            self.span.column + 1,
            self.message,
            " ".repeat(self.span.column),
            "^".repeat(width)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Quoted(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Amp,
    Neck,
    Dot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Var(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Quoted(s) => write!(f, "`'{s}'`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Neck => f.write_str("`:-`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            offset: 0,
            line: 0,
            column: 0,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.offset += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 0;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn here(&self) -> SourceSpan {
        SourceSpan {
            start: self.offset,
            end: self.offset,
            line: self.line,
            column: self.column,
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '%' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn word(&mut self, first: char) -> String {
        let mut s = String::from(first);
        while let Some(&c) = self.chars.peek() {
            if c.is_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn tokens(mut self) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let mut span = self.here();
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, span));
                return Ok(out);
            };
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '&' => Tok::Amp,
                '.' => Tok::Dot,
                ':' if self.chars.peek() == Some(&'-') => {
                    self.bump();
                    Tok::Neck
                }
                '\'' => {
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            None | Some('\n') => {
                                span.end = self.offset;
                                return Err(ParseError::new(span, "unterminated quoted atom"));
                            }
                            Some('\'') => {
                                if self.chars.peek() == Some(&'\'') {
                                    self.bump();
                                    s.push('\'');
                                } else {
                                    break;
                                }
                            }
                            Some('\\') => match self.bump() {
                                Some(e @ ('\\' | '\'')) => s.push(e),
                                _ => {
                                    span.end = self.offset;
                                    return Err(ParseError::new(span, "unknown escape in quoted atom"));
                                }
                            },
                            Some(c) => s.push(c),
                        }
                    }
                    Tok::Quoted(s)
                }
                c if c.is_ascii_digit() => {
                    let w = self.word(c);
                    if !w.chars().all(|c| c.is_ascii_digit()) {
                        span.end = self.offset;
                        return Err(ParseError::new(span, format!("malformed number `{w}`")));
                    }
                    Tok::Number(w)
                }
                c if c.is_lowercase() => Tok::Ident(self.word(c)),
                c if c.is_uppercase() || c == '_' => Tok::Var(self.word(c)),
                other => {
                    span.end = self.offset;
                    return Err(ParseError::new(span, format!("unexpected character `{other}`")));
                }
            };
            span.end = self.offset;
            out.push((tok, span));
        }
    }
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    fresh: VarSource,
    /// Innermost scope last; the first entry holds clause- or query-level
    /// variables.
    scopes: Vec<HashMap<String, Var>>,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: Lexer::new(text).tokens()?,
            pos: 0,
            fresh: VarSource::new(),
            scopes: vec![HashMap::new()],
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn advance(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<SourceSpan, ParseError> {
        if *self.peek() == tok {
            Ok(self.advance().1)
        } else {
            Err(ParseError::new(
                self.span(),
                format!("expected {what}, found {}", self.peek()),
            ))
        }
    }

    fn variable(&mut self, name: &str) -> Var {
        if name == "_" {
            return self.fresh.fresh_named(&Symbol::from("_"));
        }
        for scope in self.scopes.iter().rev() {
            if let Some(v) = scope.get(name) {
                return v.clone();
            }
        }
        let v = self.fresh.fresh_named(&Symbol::from(name));
        self.scopes[0].insert(name.to_string(), v.clone());
        v
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut clauses = Vec::new();
        while *self.peek() != Tok::Eof {
            self.scopes = vec![HashMap::new()];
            clauses.push(self.clause()?);
        }
        Ok(Program::new(clauses))
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let head_span = self.span();
        let head = match self.peek() {
            Tok::Var(_) => {
                return Err(ParseError::new(head_span, "clause head cannot be a variable"));
            }
            Tok::Ident(_) | Tok::Quoted(_) | Tok::Number(_) => self.term()?,
            other => {
                return Err(ParseError::new(
                    head_span,
                    format!("expected a clause head, found {other}"),
                ));
            }
        };
        let body = if *self.peek() == Tok::Neck {
            let neck = self.advance().1;
            Some(self.operand_after(neck, ":-")?)
        } else {
            None
        };
        self.expect(Tok::Dot, "`.` at end of clause")?;
        Ok(Clause::new(head, body))
    }

    fn starts_goal(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Quoted(_) | Tok::Number(_) | Tok::LParen
        )
    }

    /// Parses the goal after a binary operator, reporting a missing operand
    /// at the operator itself.
    fn operand_after(&mut self, op: SourceSpan, name: &str) -> Result<Goal, ParseError> {
        if !self.starts_goal() {
            let msg = match self.peek() {
                Tok::Var(_) => format!("expected a goal after `{name}`; a variable is not a goal"),
                other => format!("expected a goal after `{name}`, found {other}"),
            };
            return Err(ParseError::new(op, msg));
        }
        self.goal()
    }

    fn goal(&mut self) -> Result<Goal, ParseError> {
        let left = self.plus()?;
        if *self.peek() == Tok::Amp {
            let op = self.advance().1;
            let right = self.operand_after(op, "&")?;
            return Ok(Goal::with(left, right));
        }
        Ok(left)
    }

    fn plus(&mut self) -> Result<Goal, ParseError> {
        let left = self.tensor()?;
        if *self.peek() == Tok::Semi {
            let op = self.advance().1;
            if !self.starts_goal() {
                self.operand_after(op, ";")?;
            }
            let right = self.plus()?;
            return Ok(Goal::plus(left, right));
        }
        Ok(left)
    }

    fn tensor(&mut self) -> Result<Goal, ParseError> {
        let left = self.unary()?;
        if *self.peek() == Tok::Comma {
            let op = self.advance().1;
            if !self.starts_goal() {
                self.operand_after(op, ",")?;
            }
            let right = self.tensor()?;
            return Ok(Goal::tensor(left, right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Goal, ParseError> {
        match self.peek().clone() {
            Tok::Ident(ref kw) if kw == "exists" && matches!(self.peek_at(1), Tok::Var(_)) => {
                self.advance();
                let (tok, span) = self.advance();
                let Tok::Var(name) = tok else { unreachable!() };
                if name == "_" {
                    return Err(ParseError::new(span, "cannot bind the anonymous variable"));
                }
                let dot = self.expect(Tok::Dot, "`.` after the bound variable")?;
                let binder = self.fresh.fresh_named(&Symbol::from(name.as_str()));
                self.scopes.push(HashMap::from([(name, binder.clone())]));
                let body = self.operand_after(dot, "exists");
                self.scopes.pop();
                Ok(Goal::exists(binder, body?))
            }
            Tok::LParen => {
                self.advance();
                let g = self.goal()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(g)
            }
            Tok::Ident(_) | Tok::Quoted(_) | Tok::Number(_) => Ok(Goal::Atom(self.term()?)),
            Tok::Var(_) => Err(ParseError::new(self.span(), "a variable is not a goal")),
            other => Err(ParseError::new(
                self.span(),
                format!("expected a goal, found {other}"),
            )),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (tok, span) = self.advance();
        let name = match tok {
            Tok::Var(name) => return Ok(Term::Var(self.variable(&name))),
            Tok::Ident(s) | Tok::Quoted(s) | Tok::Number(s) => s,
            other => {
                return Err(ParseError::new(span, format!("expected a term, found {other}")));
            }
        };
        if *self.peek() != Tok::LParen {
            return Ok(Term::constant(name));
        }
        self.advance();
        if *self.peek() == Tok::RParen {
            return Err(ParseError::new(self.span(), "empty argument list; write a constant instead"));
        }
        let mut args = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.advance();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "`,` or `)` in argument list")?;
        Ok(Term::compound(name, args))
    }
}

/// Parses a whole program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    Parser::new(text)?.program()
}

/// Parses a single goal. A trailing `.` is accepted.
pub fn parse_goal(text: &str) -> Result<Goal, ParseError> {
    let mut p = Parser::new(text)?;
    if *p.peek() == Tok::Eof {
        return Err(ParseError::new(p.span(), "expected a goal, found end of input"));
    }
    let g = p.goal()?;
    if *p.peek() == Tok::Dot {
        p.advance();
    }
    if *p.peek() != Tok::Eof {
        return Err(ParseError::new(
            p.span(),
            format!("unexpected {} after goal", p.peek()),
        ));
    }
    Ok(g)
}

/// Parses a single term.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(ParseError::new(p.span(), format!("unexpected {} after term", p.peek())));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::alpha_eq_goal;

    fn a(name: &str) -> Goal {
        Goal::atom(Term::constant(name))
    }

    #[test]
    fn burger_clauses() {
        let p = parse_program("hburger.\nhset :- hburger , coke , (onion ; cone).").unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.clauses[0].is_fact());
        let expected = Goal::tensor(
            a("hburger"),
            Goal::tensor(a("coke"), Goal::plus(a("onion"), a("cone"))),
        );
        assert_eq!(p.clauses[1].body.as_ref().unwrap(), &expected);
    }

    #[test]
    fn quoted_flight_times() {
        let p = parse_program("panam(paris, nice, '9:40', '10:50').").unwrap();
        let c = &p.clauses[0];
        assert!(c.is_fact());
        assert_eq!(
            c.head,
            Term::compound(
                "panam",
                vec![
                    Term::constant("paris"),
                    Term::constant("nice"),
                    Term::constant("9:40"),
                    Term::constant("10:50"),
                ]
            )
        );
    }

    #[test]
    fn trailing_operator_is_reported_at_operator() {
        let e = parse_program("p :- q &.").unwrap_err();
        assert_eq!(e.span.start, 7);
        assert_eq!(e.span.end, 8);
        assert_eq!((e.span.line, e.span.column), (0, 7));
        assert!(e.message.contains('&'), "{}", e.message);
    }

    #[test]
    fn with_of_two_sets() {
        assert_eq!(parse_goal("hset & fset").unwrap(), Goal::with(a("hset"), a("fset")));
    }

    #[test]
    fn flight_goal_has_four_free_vars() {
        let g = parse_goal("panam(paris,nice,Dt,At) & delta(paris,nice,Dt2,At2)").unwrap();
        assert!(matches!(g, Goal::With(..)));
        let names: Vec<_> = g.free_vars_ordered().iter().map(|v| v.name.to_string()).collect();
        assert_eq!(names, ["Dt", "At", "Dt2", "At2"]);
    }

    #[test]
    fn with_binds_loosest() {
        let g = parse_goal("a , (b ; c) & d").unwrap();
        assert_eq!(
            g,
            Goal::with(Goal::tensor(a("a"), Goal::plus(a("b"), a("c"))), a("d"))
        );
        assert_eq!(
            parse_goal("a ; b , c & d ; e").unwrap(),
            Goal::with(
                Goal::plus(a("a"), Goal::tensor(a("b"), a("c"))),
                Goal::plus(a("d"), a("e"))
            )
        );
    }

    #[test]
    fn operators_are_right_associative() {
        assert_eq!(
            parse_goal("a & b & c").unwrap(),
            Goal::with(a("a"), Goal::with(a("b"), a("c")))
        );
    }

    #[test]
    fn exists_binders_are_fresh_and_scoped() {
        let g = parse_goal("p(X) , exists X. q(X) , (exists X. r(X))").unwrap();
        let mut binders = Vec::new();
        g.binders_into(&mut binders);
        assert_eq!(binders.len(), 2);
        assert_ne!(binders[0].id, binders[1].id);
        assert_eq!(g.free_vars_ordered().len(), 1);
    }

    #[test]
    fn same_name_same_variable_in_clause() {
        let p = parse_program("p(X) :- q(X, Y), r(Y).\ns(X).").unwrap();
        assert_eq!(p.clauses[0].universals.len(), 2);
        assert_eq!(p.clauses[1].universals.len(), 1);
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let g = parse_goal("p(_, _)").unwrap();
        assert_eq!(g.free_vars_ordered().len(), 2);
    }

    #[test]
    fn comments_and_whitespace() {
        let p = parse_program("% header\n  a. % trailing\n\n b :- a.\n").unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn duplicate_clauses_allowed() {
        assert_eq!(parse_program("a. a.").unwrap().len(), 2);
    }

    #[test]
    fn goal_accepts_trailing_dot() {
        assert!(alpha_eq_goal(&parse_goal("p(X).").unwrap(), &parse_goal("p(Y)").unwrap()));
    }

    #[test]
    fn error_cases_carry_spans() {
        for (src, line, col) in [
            ("p :- .", 0, 2),
            ("p(a", 0, 3),
            ("X.", 0, 0),
            ("a.\nb :- c ,", 1, 7),
            ("a.\n'unterminated", 1, 0),
            ("p :- X.", 0, 2),
            ("p().", 0, 2),
            ("a # b.", 0, 2),
            ("p :- q ; .", 0, 7),
        ] {
            let e = parse_program(src).unwrap_err();
            assert_eq!((e.span.line, e.span.column), (line, col), "{src:?}: {e}");
            assert!(e.span.start <= e.span.end);
            assert!(e.span.end <= src.chars().count());
        }
    }

    #[test]
    fn spans_count_code_points() {
        let e = parse_program("é. ü :- ?").unwrap_err();
        assert_eq!(e.span.column, 8);
        assert_eq!(e.span.start, 8);
    }

    #[test]
    fn render_points_at_column() {
        let src = "p :- q &.";
        let e = parse_program(src).unwrap_err();
        let text = e.render(src, "t.lp");
        assert!(text.starts_with("t.lp:1:8: error:"), "{text}");
        assert!(text.ends_with("       ^"), "{text}");
    }

    #[test]
    fn exists_as_predicate_name() {
        let g = parse_goal("exists(a) , exists").unwrap();
        assert_eq!(
            g,
            Goal::tensor(Goal::atom(Term::compound("exists", vec![Term::constant("a")])), a("exists"))
        );
    }

    #[test]
    fn quote_escapes() {
        assert_eq!(parse_term("'it''s'").unwrap(), Term::constant("it's"));
        assert_eq!(parse_term(r"'a\'b'").unwrap(), Term::constant("a'b"));
    }
}
