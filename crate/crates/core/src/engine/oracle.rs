use std::fmt;

use crate::ast::Goal;

/// Step from the root goal towards a choice point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PathStep {
    TensorLeft,
    TensorRight,
    PlusLeft,
    PlusRight,
    /// Left operand of an `&` solved without asking (both operands run).
    WithLeft,
    WithRight,
    /// Operand picked by the user.
    Chosen(usize),
    /// The other operand, checked without interaction.
    Unchosen(usize),
    ExistsBody,
    /// Body of the clause at this source index.
    Clause(usize),
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathStep::TensorLeft => f.write_str(",0"),
            PathStep::TensorRight => f.write_str(",1"),
            PathStep::PlusLeft => f.write_str(";0"),
            PathStep::PlusRight => f.write_str(";1"),
            PathStep::WithLeft => f.write_str("&0"),
            PathStep::WithRight => f.write_str("&1"),
            PathStep::Chosen(i) => write!(f, "&{i}!"),
            PathStep::Unchosen(i) => write!(f, "&{i}~"),
            PathStep::ExistsBody => f.write_str("E"),
            PathStep::Clause(i) => write!(f, "#{i}"),
        }
    }
}

/// An `&` goal waiting for the user to pick an operand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoicePoint {
    /// Operand 0, instantiated by the current substitution.
    pub left: Goal,
    /// Operand 1, instantiated by the current substitution.
    pub right: Goal,
    pub path: Vec<PathStep>,
}

impl ChoicePoint {
    pub fn operand(&self, index: usize) -> Option<&Goal> {
        match index {
            0 => Some(&self.left),
            1 => Some(&self.right),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("choice script exhausted after {provided} choice(s)")]
    ScriptExhausted { provided: usize },
    #[error("choice index {0} out of range (expected 0 or 1)")]
    IndexOutOfRange(usize),
    #[error("no choice available: {0}")]
    Unavailable(String),
}

/// Supplies the user's operand index for `&` goals.
pub trait ChoiceOracle {
    fn choose(&mut self, point: &ChoicePoint) -> Result<usize, OracleError>;
}

impl<F> ChoiceOracle for F
where
    F: FnMut(&ChoicePoint) -> Result<usize, OracleError>,
{
    fn choose(&mut self, point: &ChoicePoint) -> Result<usize, OracleError> {
        self(point)
    }
}

/// Answers from a fixed list of indices, in order.
#[derive(Clone, Debug, Default)]
pub struct Scripted {
    script: Vec<usize>,
    pos: usize,
}

impl Scripted {
    pub fn new(script: impl Into<Vec<usize>>) -> Self {
        Scripted {
            script: script.into(),
            pos: 0,
        }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> &[usize] {
        &self.script[self.pos..]
    }
}

impl ChoiceOracle for Scripted {
    fn choose(&mut self, _point: &ChoicePoint) -> Result<usize, OracleError> {
        let i = *self.script.get(self.pos).ok_or(OracleError::ScriptExhausted {
            provided: self.script.len(),
        })?;
        self.pos += 1;
        if i > 1 {
            return Err(OracleError::IndexOutOfRange(i));
        }
        Ok(i)
    }
}

/// Oracle for searches that must never ask: any request is an error.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoChoices;

impl ChoiceOracle for NoChoices {
    fn choose(&mut self, _point: &ChoicePoint) -> Result<usize, OracleError> {
        Err(OracleError::Unavailable("this search takes no user choices".into()))
    }
}
