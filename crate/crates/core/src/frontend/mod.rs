//! The `.acg` control-flow-graph language.
//!
//! ```text
//! array A, B;
//! var i, n, v;
//!
//! head:
//!   i = 0
//!   br guard
//! guard:
//!   if (i < n) body tail
//! body:
//!   v = A[i]
//!   B[i] = v
//!   i = i + 1
//!   br guard
//! tail:
//!   end
//!
//! check tail: forall [0, n) of A, B : a = b
//! ```

mod lexer;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::{LinCons, Operand, Rhs};
use crate::var::{segment_var, Var};

pub use parser::{parse_constraint, parse_program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Cmp {
    pub fn negate(self) -> Cmp {
        match self {
            Cmp::Lt => Cmp::Ge,
            Cmp::Le => Cmp::Gt,
            Cmp::Eq => Cmp::Ne,
            Cmp::Ne => Cmp::Eq,
            Cmp::Ge => Cmp::Lt,
            Cmp::Gt => Cmp::Le,
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Ge => a >= b,
            Cmp::Gt => a > b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instr {
    /// Scalar assignment, including havoc (`v = ?`).
    Assign { target: Var, rhs: Rhs },
    /// `target = array[index]`
    Read {
        target: Var,
        array: String,
        index: Operand,
    },
    /// `array[index] = value`
    Write {
        array: String,
        index: Operand,
        value: Operand,
    },
}

impl Instr {
    /// The scalar written by this instruction, if any.
    pub fn target(&self) -> Option<Var> {
        match self {
            Instr::Assign { target, .. } | Instr::Read { target, .. } => Some(*target),
            Instr::Write { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Jump {
    Cond {
        lhs: Operand,
        cmp: Cmp,
        rhs: Operand,
        then_label: String,
        else_label: String,
    },
    Br(String),
    End,
    Error,
}

impl Jump {
    pub fn targets(&self) -> Vec<&str> {
        match self {
            Jump::Cond {
                then_label,
                else_label,
                ..
            } => vec![then_label, else_label],
            Jump::Br(l) => vec![l],
            Jump::End | Jump::Error => vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub label: String,
    pub instrs: Vec<Instr>,
    pub jump: Jump,
}

/// A segment bound in a check: a variable or constant, optionally `+ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundExpr {
    pub base: Operand,
    pub plus: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckDirective {
    pub label: String,
    pub lo: BoundExpr,
    pub hi: BoundExpr,
    pub arrays: Vec<String>,
    pub predicate: Vec<LinCons>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub arrays: Vec<String>,
    pub scalars: Vec<Var>,
    pub blocks: Vec<Block>,
    pub checks: Vec<CheckDirective>,
    labels: BTreeMap<String, usize>,
}

impl Program {
    pub(crate) fn new(
        arrays: Vec<String>,
        scalars: Vec<Var>,
        blocks: Vec<Block>,
        checks: Vec<CheckDirective>,
    ) -> Program {
        let labels = blocks
            .iter()
            .enumerate()
            .map(|(n, b)| (b.label.clone(), n))
            .collect();
        Program {
            arrays,
            scalars,
            blocks,
            checks,
            labels,
        }
    }

    pub fn entry(&self) -> &Block {
        &self.blocks[0]
    }

    pub fn block_index(&self, label: &str) -> Option<usize> {
        self.labels.get(label).copied()
    }

    pub fn block(&self, label: &str) -> Option<&Block> {
        self.block_index(label).map(|n| &self.blocks[n])
    }

    /// Successor block indices of block `n`.
    pub fn successors(&self, n: usize) -> Vec<usize> {
        self.blocks[n]
            .jump
            .targets()
            .into_iter()
            .map(|l| self.labels[l])
            .collect()
    }

    /// Segment variables, one per array, in declaration order.
    pub fn segment_vars(&self) -> Vec<Var> {
        self.arrays.iter().map(|a| segment_var(a)).collect()
    }
}

/// Source position, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{loc}: lexical error: {msg}")]
    Lexical { loc: Loc, msg: String },
    #[error("{loc}: syntax error: {msg}")]
    Syntax { loc: Loc, msg: String },
    #[error("{loc}: unknown label `{label}`")]
    UnknownLabel { loc: Loc, label: String },
    #[error("{loc}: undeclared identifier `{name}`")]
    Undeclared { loc: Loc, name: String },
    #[error("{loc}: duplicate label `{label}`")]
    DuplicateLabel { loc: Loc, label: String },
    #[error("{loc}: name `{name}` clashes with {with}")]
    NameClash { loc: Loc, name: String, with: String },
    #[error("{loc}: program needs ≥1 block")]
    EmptyProgram { loc: Loc },
}

impl ParseError {
    pub fn loc(&self) -> Loc {
        match self {
            ParseError::Lexical { loc, .. }
            | ParseError::Syntax { loc, .. }
            | ParseError::UnknownLabel { loc, .. }
            | ParseError::Undeclared { loc, .. }
            | ParseError::DuplicateLabel { loc, .. }
            | ParseError::NameClash { loc, .. }
            | ParseError::EmptyProgram { loc } => *loc,
        }
    }

    /// Short category name, stable across messages.
    pub fn category(&self) -> &'static str {
        match self {
            ParseError::Lexical { .. } => "lexical",
            ParseError::Syntax { .. } => "syntax",
            ParseError::UnknownLabel { .. } => "unknown-label",
            ParseError::Undeclared { .. } => "undeclared",
            ParseError::DuplicateLabel { .. } => "duplicate-label",
            ParseError::NameClash { .. } => "name-clash",
            ParseError::EmptyProgram { .. } => "empty-program",
        }
    }
}

struct Op(Operand);

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Operand::Var(v) => write!(f, "{v}"),
            Operand::Const(k) => write!(f, "{k}"),
        }
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Op(self.base))?;
        if self.plus {
            f.write_str("+1")?;
        }
        Ok(())
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Assign { target, rhs } => match rhs {
                Rhs::Const(k) => write!(f, "{target} = {k}"),
                Rhs::Copy(w) => write!(f, "{target} = {w}"),
                Rhs::Neg(w) => write!(f, "{target} = -{w}"),
                Rhs::Bin(op, a, b) => write!(f, "{target} = {} {} {}", Op(*a), op.symbol(), Op(*b)),
                Rhs::Havoc => write!(f, "{target} = ?"),
            },
            Instr::Read {
                target,
                array,
                index,
            } => write!(f, "{target} = {array}[{}]", Op(*index)),
            Instr::Write {
                array,
                index,
                value,
            } => write!(f, "{array}[{}] = {}", Op(*index), Op(*value)),
        }
    }
}

impl fmt::Display for Jump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Jump::Cond {
                lhs,
                cmp,
                rhs,
                then_label,
                else_label,
            } => write!(
                f,
                "if ({} {} {}) {then_label} {else_label}",
                Op(*lhs),
                cmp.symbol(),
                Op(*rhs)
            ),
            Jump::Br(l) => write!(f, "br {l}"),
            Jump::End => f.write_str("end"),
            Jump::Error => f.write_str("error"),
        }
    }
}

impl fmt::Display for CheckDirective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "check {}: forall [{}, {}) of {} : ",
            self.label,
            self.lo,
            self.hi,
            self.arrays.join(", ")
        )?;
        let conj: Vec<String> = self.predicate.iter().map(|c| c.to_string()).collect();
        f.write_str(&conj.join(" && "))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.arrays.is_empty() {
            writeln!(f, "array {};", self.arrays.join(", "))?;
        }
        if !self.scalars.is_empty() {
            let names: Vec<&str> = self.scalars.iter().map(|v| v.name()).collect();
            writeln!(f, "var {};", names.join(", "))?;
        }
        for b in &self.blocks {
            writeln!(f, "\n{}:", b.label)?;
            for i in &b.instrs {
                writeln!(f, "  {i}")?;
            }
            writeln!(f, "  {}", b.jump)?;
        }
        if !self.checks.is_empty() {
            writeln!(f)?;
        }
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
