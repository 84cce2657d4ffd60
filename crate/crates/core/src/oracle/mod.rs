//! Concrete semantics and brute-force soundness checking.
//!
//! The concrete interpreter runs programs over arrays of a fixed finite
//! length. Scalars start unbound; the enumerator binds a scalar the first
//! time it is read, so only values that matter are ever enumerated.

pub mod orderings;

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::content::{Base, ContentState, Vertex};
use crate::engine::AnalysisResult;
use crate::frontend::{Instr, Jump, Program};
use crate::scalar::{DiffCons, Operand, Rhs, ScalarDomain};
use crate::var::{segment_var, Var};

pub use orderings::{count_orderings, OrderingProblem};

/// A program point: block index and instruction offset. The offset equal
/// to the block length is the jump.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pc {
    pub block: usize,
    pub offset: usize,
}

/// `⟨σ, ρ⟩` plus a program counter. Scalars and arrays are stored in the
/// declaration order of the program they belong to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConcreteState {
    pub sigma: Vec<Option<i64>>,
    pub rho: Vec<Vec<i64>>,
    pub pc: Pc,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConcreteError {
    #[error("index {index} of `{array}` is outside [0, {len})")]
    OutOfRange { array: String, index: i64, len: usize },
    #[error("`{0}` is read before it is assigned")]
    Unbound(Var),
    #[error("integer overflow")]
    Overflow,
    #[error("reached an error block")]
    ErrorBlock,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Next(ConcreteState),
    Halt,
    Error(ConcreteError),
}

impl ConcreteState {
    /// Entry state with every scalar unbound.
    pub fn initial(prog: &Program, arrays: Vec<Vec<i64>>) -> ConcreteState {
        assert_eq!(arrays.len(), prog.arrays.len(), "one content vector per array");
        ConcreteState {
            sigma: vec![None; prog.scalars.len()],
            rho: arrays,
            pc: Pc { block: 0, offset: 0 },
        }
    }

    pub fn with(mut self, prog: &Program, v: Var, value: i64) -> ConcreteState {
        self.sigma[scalar_slot(prog, v)] = Some(value);
        self
    }

    pub fn scalar(&self, prog: &Program, v: Var) -> Option<i64> {
        prog.scalars.iter().position(|&w| w == v).and_then(|k| self.sigma[k])
    }

    pub fn array(&self, prog: &Program, name: &str) -> Option<&[i64]> {
        prog.arrays.iter().position(|a| a == name).map(|k| &self.rho[k][..])
    }

    /// Display with names, for diagnostics.
    pub fn show<'a>(&'a self, prog: &'a Program) -> impl fmt::Display + 'a {
        Shown(self, prog)
    }
}

struct Shown<'a>(&'a ConcreteState, &'a Program);

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (c, p) = (self.0, self.1);
        write!(f, "{}+{} {{", p.blocks[c.pc.block].label, c.pc.offset)?;
        let mut sep = "";
        for (v, x) in p.scalars.iter().zip(&c.sigma) {
            if let Some(x) = x {
                write!(f, "{sep}{v}={x}")?;
                sep = ", ";
            }
        }
        for (a, cells) in p.arrays.iter().zip(&c.rho) {
            write!(f, "{sep}{a}={cells:?}")?;
            sep = ", ";
        }
        f.write_str("}")
    }
}

fn scalar_slot(prog: &Program, v: Var) -> usize {
    prog.scalars
        .iter()
        .position(|&w| w == v)
        .unwrap_or_else(|| panic!("`{v}` is not a scalar of the program"))
}

fn array_slot(prog: &Program, name: &str) -> usize {
    prog.arrays
        .iter()
        .position(|a| a == name)
        .unwrap_or_else(|| panic!("`{name}` is not an array of the program"))
}

fn operand(prog: &Program, c: &ConcreteState, o: Operand) -> Result<i64, ConcreteError> {
    match o {
        Operand::Const(k) => Ok(k),
        Operand::Var(v) => c.sigma[scalar_slot(prog, v)].ok_or(ConcreteError::Unbound(v)),
    }
}

fn cell(c: &ConcreteState, slot: usize, array: &str, index: i64) -> Result<usize, ConcreteError> {
    let len = c.rho[slot].len();
    if index < 0 || index as usize >= len {
        return Err(ConcreteError::OutOfRange {
            array: array.to_string(),
            index,
            len,
        });
    }
    Ok(index as usize)
}

/// Executes one instruction or jump. `choice` supplies havoc values.
pub fn concrete_step(prog: &Program, c: &ConcreteState, choice: &mut dyn FnMut() -> i64) -> Step {
    match try_step(prog, c, choice) {
        Ok(s) => s,
        Err(e) => Step::Error(e),
    }
}

fn try_step(prog: &Program, c: &ConcreteState, choice: &mut dyn FnMut() -> i64) -> Result<Step, ConcreteError> {
    let block = &prog.blocks[c.pc.block];
    let mut next = c.clone();
    if c.pc.offset == block.instrs.len() {
        let target = match &block.jump {
            Jump::End => return Ok(Step::Halt),
            Jump::Error => return Err(ConcreteError::ErrorBlock),
            Jump::Br(l) => l,
            Jump::Cond {
                lhs,
                cmp,
                rhs,
                then_label,
                else_label,
            } => {
                let (a, b) = (operand(prog, c, *lhs)?, operand(prog, c, *rhs)?);
                if cmp.holds(a, b) {
                    then_label
                } else {
                    else_label
                }
            }
        };
        next.pc = Pc {
            block: prog.block_index(target).expect("validated label"),
            offset: 0,
        };
        return Ok(Step::Next(next));
    }
    match &block.instrs[c.pc.offset] {
        Instr::Assign { target, rhs } => {
            let value = match *rhs {
                Rhs::Const(k) => k,
                Rhs::Copy(v) => operand(prog, c, Operand::Var(v))?,
                Rhs::Neg(v) => operand(prog, c, Operand::Var(v))?
                    .checked_neg()
                    .ok_or(ConcreteError::Overflow)?,
                Rhs::Bin(op, a, b) => op
                    .apply(operand(prog, c, a)?, operand(prog, c, b)?)
                    .ok_or(ConcreteError::Overflow)?,
                Rhs::Havoc => choice(),
            };
            next.sigma[scalar_slot(prog, *target)] = Some(value);
        }
        Instr::Read { target, array, index } => {
            let slot = array_slot(prog, array);
            let k = cell(c, slot, array, operand(prog, c, *index)?)?;
            next.sigma[scalar_slot(prog, *target)] = Some(c.rho[slot][k]);
        }
        Instr::Write { array, index, value } => {
            let slot = array_slot(prog, array);
            let k = cell(c, slot, array, operand(prog, c, *index)?)?;
            next.rho[slot][k] = operand(prog, c, *value)?;
        }
    }
    next.pc.offset += 1;
    Ok(Step::Next(next))
}

/// Where a variable's value lives in a concrete state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Scalar(usize),
    Cell(usize),
    Idx,
    /// Not a variable of the program; never has a value.
    Free,
}

#[derive(Clone, Copy, Debug)]
struct Term(Option<Slot>, i64);

/// `pos − neg ≤ bound` over slots.
#[derive(Clone, Copy, Debug)]
struct Cons {
    pos: Option<Slot>,
    neg: Option<Slot>,
    bound: i64,
    shown: DiffCons,
}

fn slot_of(prog: &Program, v: Var) -> Slot {
    if v == Var::idx() {
        return Slot::Idx;
    }
    if let Some(k) = prog.scalars.iter().position(|&w| w == v) {
        return Slot::Scalar(k);
    }
    match prog.arrays.iter().position(|a| segment_var(a) == v) {
        Some(k) => Slot::Cell(k),
        None => Slot::Free,
    }
}

fn compile(prog: &Program, d: &DiffCons) -> Cons {
    let (pos, neg, bound) = (d.pos, d.neg, d.bound);
    Cons {
        pos: pos.map(|v| slot_of(prog, v)),
        neg: neg.map(|v| slot_of(prog, v)),
        bound,
        shown: *d,
    }
}

fn vertex_term(prog: &Program, v: Vertex) -> Term {
    let plus = i64::from(v.plus);
    match v.base {
        Base::Const(k) => Term(None, k + plus),
        Base::Var(x) => Term(Some(slot_of(prog, x)), plus),
    }
}

/// A content state compiled for fast membership tests against concrete
/// states of one program: the constraints of `φ`, and for each entry what
/// it adds to its cell context.
pub struct Membership {
    bottom: bool,
    phi: Vec<Cons>,
    /// `(from, to, constraints)`; `None` means the entry is `⊥`.
    entries: Vec<(Vertex, Vertex, Term, Term, Option<Vec<Cons>>)>,
}

struct Valuation<'a> {
    c: &'a ConcreteState,
    idx: i64,
}

impl Valuation<'_> {
    fn get(&self, s: Slot) -> Option<i64> {
        match s {
            Slot::Scalar(k) => self.c.sigma[k],
            Slot::Cell(k) => usize::try_from(self.idx).ok().and_then(|i| self.c.rho[k].get(i).copied()),
            Slot::Idx => Some(self.idx),
            Slot::Free => None,
        }
    }

    fn term(&self, t: Term) -> Option<i64> {
        match t.0 {
            None => Some(t.1),
            Some(s) => self.get(s).map(|x| x + t.1),
        }
    }

    /// `None` when a slot has no value.
    fn holds(&self, c: &Cons) -> Option<bool> {
        let side = |s: Option<Slot>| match s {
            None => Some(0i128),
            Some(s) => self.get(s).map(i128::from),
        };
        Some(side(c.pos)? - side(c.neg)? <= i128::from(c.bound))
    }
}

impl Membership {
    pub fn new<D: ScalarDomain>(prog: &Program, s: &ContentState<D>) -> Membership {
        let mut entries = Vec::new();
        if !s.is_bottom() {
            let n = s.n();
            for i in 0..n {
                for j in 0..n {
                    if s.structural(i, j) {
                        continue;
                    }
                    let full = s.full(i, j);
                    let (p, q) = (s.vertices()[i], s.vertices()[j]);
                    let (tp, tq) = (vertex_term(prog, p), vertex_term(prog, q));
                    if full.is_bottom() {
                        entries.push((p, q, tp, tq, None));
                        continue;
                    }
                    let ctx = s.cell_context(i, j);
                    let extra: Vec<Cons> = full
                        .diff_constraints()
                        .iter()
                        .filter(|c| !ctx.implies_diff(c))
                        .map(|c| compile(prog, c))
                        .collect();
                    if !extra.is_empty() {
                        entries.push((p, q, tp, tq, Some(extra)));
                    }
                }
            }
        }
        Membership {
            bottom: s.is_bottom(),
            phi: s.phi().diff_constraints().iter().map(|c| compile(prog, c)).collect(),
            entries,
        }
    }

    /// Whether the state contains `c`. Constraints over unbound scalars and
    /// cells outside the arrays are not checked.
    pub fn contains(&self, c: &ConcreteState) -> bool {
        self.explain(c).is_none()
    }

    /// The first failed obligation, if any.
    pub fn explain(&self, c: &ConcreteState) -> Option<String> {
        if self.bottom {
            return Some("state is ⊥".into());
        }
        let mut val = Valuation { c, idx: 0 };
        for d in &self.phi {
            if let Some(false) = val.holds(d) {
                return Some(format!("φ fails: {}", d.shown));
            }
        }
        for (p, q, tp, tq, cs) in &self.entries {
            let (Some(lo), Some(hi)) = (val.term(*tp), val.term(*tq)) else {
                continue;
            };
            for l in lo..hi {
                let Some(cs) = cs else {
                    return Some(format!("({p},{q}) is ⊥ but covers index {l}"));
                };
                val.idx = l;
                for d in cs {
                    if let Some(false) = val.holds(d) {
                        return Some(format!("({p},{q}) fails {} at index {l}", d.shown));
                    }
                }
            }
        }
        None
    }
}

/// Whether `c` is in `γ(s)`.
pub fn gamma_member<D: ScalarDomain>(prog: &Program, s: &ContentState<D>, c: &ConcreteState) -> bool {
    Membership::new(prog, s).contains(c)
}

/// Enumeration bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Values for scalars bound on first read and for havoc.
    pub scalars: (i64, i64),
    /// Initial cell values.
    pub cells: (i64, i64),
    /// Largest array length; every length from 0 up is tried.
    pub max_len: usize,
    /// Longest run, in steps.
    pub max_steps: usize,
    /// Visited-state cap over the whole enumeration.
    pub max_states: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            scalars: (-2, 3),
            cells: (0, 2),
            max_len: 3,
            max_steps: 200,
            max_states: 2_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub state: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Enumeration {
    pub violations: Vec<Violation>,
    pub states: usize,
    /// Set when the state cap stopped the search early.
    pub partial: bool,
}

/// All initial array contents within the limits.
fn initial_arrays(count: usize, lim: &Limits) -> Vec<Vec<Vec<i64>>> {
    let mut one = Vec::new();
    for len in 0..=lim.max_len {
        let mut cur = vec![vec![]];
        for _ in 0..len {
            cur = cur
                .into_iter()
                .flat_map(|c| {
                    (lim.cells.0..=lim.cells.1).map(move |x| {
                        let mut c = c.clone();
                        c.push(x);
                        c
                    })
                })
                .collect();
        }
        one.extend(cur);
    }
    let mut all = vec![vec![]];
    for _ in 0..count {
        all = all
            .into_iter()
            .flat_map(|acc: Vec<Vec<i64>>| {
                one.iter().map(move |a| {
                    let mut acc = acc.clone();
                    acc.push(a.clone());
                    acc
                })
            })
            .collect();
    }
    all
}

/// The scalar the next step reads while it is still unbound.
fn unbound_read(prog: &Program, c: &ConcreteState) -> Option<Var> {
    let block = &prog.blocks[c.pc.block];
    let mut ops: Vec<Operand> = Vec::new();
    if c.pc.offset == block.instrs.len() {
        if let Jump::Cond { lhs, rhs, .. } = &block.jump {
            ops.extend([*lhs, *rhs]);
        }
    } else {
        match &block.instrs[c.pc.offset] {
            Instr::Assign { rhs, .. } => match *rhs {
                Rhs::Copy(v) | Rhs::Neg(v) => ops.push(Operand::Var(v)),
                Rhs::Bin(_, a, b) => ops.extend([a, b]),
                Rhs::Const(_) | Rhs::Havoc => {}
            },
            Instr::Read { index, .. } => ops.push(*index),
            Instr::Write { index, value, .. } => ops.extend([*index, *value]),
        }
    }
    ops.into_iter().find_map(|o| match o {
        Operand::Var(v) if c.scalar(prog, v).is_none() => Some(v),
        _ => None,
    })
}

fn is_havoc(prog: &Program, c: &ConcreteState) -> bool {
    let block = &prog.blocks[c.pc.block];
    matches!(
        block.instrs.get(c.pc.offset),
        Some(Instr::Assign { rhs: Rhs::Havoc, .. })
    )
}

/// Checks every reachable concrete state against the analysis result at
/// its program point. Runs that go out of bounds are dropped.
pub fn soundness_enumerate<D: ScalarDomain>(
    prog: &Program,
    result: &AnalysisResult<D>,
    lim: &Limits,
) -> Enumeration {
    let mut out = Enumeration::default();
    let mut checkers: HashMap<Pc, Membership> = HashMap::new();
    let mut seen: HashSet<ConcreteState> = HashSet::new();
    let range = lim.scalars.0..=lim.scalars.1;
    let mut frontier: Vec<ConcreteState> = initial_arrays(prog.arrays.len(), lim)
        .into_iter()
        .map(|a| ConcreteState::initial(prog, a))
        .collect();
    for step in 0..=lim.max_steps {
        let mut next = Vec::new();
        while let Some(c) = frontier.pop() {
            // binding a scalar is not a step: bound copies stay at this level
            if let Some(v) = unbound_read(prog, &c) {
                frontier.extend(range.clone().map(|x| c.clone().with(prog, v, x)));
                continue;
            }
            if !seen.insert(c.clone()) {
                continue;
            }
            if seen.len() > lim.max_states {
                out.partial = true;
                break;
            }
            check_at(prog, result, &c, &mut checkers, &mut out);
            if step == lim.max_steps {
                continue;
            }
            if is_havoc(prog, &c) {
                for x in range.clone() {
                    if let Step::Next(s) = concrete_step(prog, &c, &mut || x) {
                        next.push(s);
                    }
                }
            } else if let Step::Next(s) = concrete_step(prog, &c, &mut || unreachable!("no havoc here")) {
                next.push(s);
            }
        }
        if next.is_empty() || out.partial {
            break;
        }
        frontier = next;
    }
    out.states = seen.len();
    out
}

fn check_at<D: ScalarDomain>(
    prog: &Program,
    result: &AnalysisResult<D>,
    c: &ConcreteState,
    checkers: &mut HashMap<Pc, Membership>,
    out: &mut Enumeration,
) {
    let m = checkers.entry(c.pc).or_insert_with(|| {
        let label = &prog.blocks[c.pc.block].label;
        let s = result
            .state_after(prog, label, c.pc.offset)
            .expect("re-running a block that normalized during analysis");
        Membership::new(prog, &s)
    });
    if let Some(reason) = m.explain(c) {
        out.violations.push(Violation {
            state: c.show(prog).to_string(),
            reason,
        });
    }
}
