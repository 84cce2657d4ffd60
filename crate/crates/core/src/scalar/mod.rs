//! Scalar numeric lattices used for the scalar component and for every
//! content-graph edge.
//!
//! Two implementations are provided: [`Interval`] and the sparse
//! difference-bound matrix [`Dbm`]. Both speak the same primitive
//! vocabulary of difference constraints ([`DiffCons`]), which is what the
//! content graph needs for boundary constraints between segment vertices.

mod dbm;
mod interval;
mod lincons;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use dbm::Dbm;
pub use interval::Interval;
pub use lincons::{LinCons, LinConsError, Rel};

use crate::var::Var;

/// Sentinel for "no upper bound".
pub const INF: i64 = i64::MAX;

/// Adds two bounds, treating [`INF`] as +∞. Positive overflow saturates to
/// +∞ (dropping the bound, which is sound); negative overflow clamps.
#[inline]
pub(crate) fn add_bound(a: i64, b: i64) -> i64 {
    if a == INF || b == INF {
        return INF;
    }
    match a.checked_add(b) {
        Some(s) if s != INF => s,
        _ if a > 0 => INF,
        _ => i64::MIN / 2,
    }
}

/// `pos − neg ≤ bound`. `None` on either side stands for the constant 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffCons {
    pub pos: Option<Var>,
    pub neg: Option<Var>,
    pub bound: i64,
}

impl DiffCons {
    pub fn new(pos: Option<Var>, neg: Option<Var>, bound: i64) -> DiffCons {
        DiffCons { pos, neg, bound }
    }

    /// The integer complement: `¬(x − y ≤ k)` is `y − x ≤ −k − 1`.
    pub fn negate(&self) -> DiffCons {
        DiffCons {
            pos: self.neg,
            neg: self.pos,
            bound: self.bound.saturating_neg().saturating_sub(1),
        }
    }

    /// `x ≤ k`
    pub fn upper(x: Var, k: i64) -> DiffCons {
        DiffCons::new(Some(x), None, k)
    }

    /// `x ≥ k`
    pub fn lower(x: Var, k: i64) -> DiffCons {
        DiffCons::new(None, Some(x), -k)
    }

    /// `x − y ≤ k`
    pub fn diff(x: Var, y: Var, k: i64) -> DiffCons {
        DiffCons::new(Some(x), Some(y), k)
    }

    pub fn mentions(&self, v: Var) -> bool {
        self.pos == Some(v) || self.neg == Some(v)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        self.pos.into_iter().chain(self.neg)
    }

    pub fn holds_at(&self, value: impl Fn(Var) -> i64) -> bool {
        let p = self.pos.map_or(0, &value) as i128;
        let n = self.neg.map_or(0, &value) as i128;
        p - n <= self.bound as i128
    }

    pub fn to_lincons(&self) -> Option<LinCons> {
        // pos − neg ≤ k   ⇔   neg − pos ≥ −k
        let mut terms = Vec::new();
        if let Some(n) = self.neg {
            terms.push((n, 1));
        }
        if let Some(p) = self.pos {
            terms.push((p, -1));
        }
        LinCons::from_ints(&terms, Rel::Ge, -self.bound).ok()
    }

    /// Translates a linear constraint into difference constraints when it
    /// has the shape `±x ≥ m` or `x − y ≥ m` (possibly as an equality).
    pub fn from_lincons(c: &LinCons) -> Option<Vec<DiffCons>> {
        let mut out = Vec::new();
        for ineq in c.as_inequalities() {
            out.push(Self::from_ge(&ineq)?);
        }
        Some(out)
    }

    fn from_ge(c: &LinCons) -> Option<DiffCons> {
        let m = c.bound().to_i64()?;
        let mut plus = None;
        let mut minus = None;
        for (v, k) in c.terms() {
            if k.is_one() && plus.is_none() {
                plus = Some(*v);
            } else if (-k).is_one() && minus.is_none() {
                minus = Some(*v);
            } else {
                return None;
            }
        }
        // plus − minus ≥ m   ⇔   minus − plus ≤ −m
        Some(DiffCons::new(minus, plus, m.checked_neg()?))
    }
}

impl fmt::Display for DiffCons {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.pos, self.neg) {
            (Some(p), Some(n)) => match self.bound {
                0 => write!(f, "{p} <= {n}"),
                -1 => write!(f, "{p} < {n}"),
                k if k > 0 => write!(f, "{p} <= {n} + {k}"),
                k => write!(f, "{p} <= {n} - {}", -(k as i128)),
            },
            (Some(p), None) => write!(f, "{p} <= {}", self.bound),
            (None, Some(n)) => write!(f, "{n} >= {}", -(self.bound as i128)),
            (None, None) => write!(f, "0 <= {}", self.bound),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    Var(Var),
    Const(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn apply(self, a: i64, b: i64) -> Option<i64> {
        match self {
            BinOp::Add => a.checked_add(b),
            BinOp::Sub => a.checked_sub(b),
            BinOp::Mul => a.checked_mul(b),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }
}

/// Right-hand side of a scalar assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rhs {
    Const(i64),
    Copy(Var),
    Neg(Var),
    Bin(BinOp, Operand, Operand),
    Havoc,
}

impl Rhs {
    pub fn mentions(&self, v: Var) -> bool {
        let op = |o: &Operand| matches!(o, Operand::Var(w) if *w == v);
        match self {
            Rhs::Copy(w) | Rhs::Neg(w) => *w == v,
            Rhs::Bin(_, a, b) => op(a) || op(b),
            Rhs::Const(_) | Rhs::Havoc => false,
        }
    }

    pub fn substitute(&self, from: Var, to: Var) -> Rhs {
        let sub = |w: Var| if w == from { to } else { w };
        let sub_op = |o: Operand| match o {
            Operand::Var(w) => Operand::Var(sub(w)),
            c => c,
        };
        match *self {
            Rhs::Copy(w) => Rhs::Copy(sub(w)),
            Rhs::Neg(w) => Rhs::Neg(sub(w)),
            Rhs::Bin(op, a, b) => Rhs::Bin(op, sub_op(a), sub_op(b)),
            r => r,
        }
    }
}

/// Lattice interface shared by every scalar domain.
///
/// Values are immutable; every operation returns a fresh value. Variables
/// that a value does not mention are unconstrained, so there is no explicit
/// universe and any two values may be combined.
pub trait ScalarDomain: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    const NAME: &'static str;

    fn top() -> Self;
    fn bottom() -> Self;
    fn is_bottom(&self) -> bool;
    fn is_top(&self) -> bool;

    fn join(&self, other: &Self) -> Self;
    fn meet(&self, other: &Self) -> Self;
    fn leq(&self, other: &Self) -> bool;
    fn widen(&self, other: &Self) -> Self;

    /// Meet that may skip normalization, so a widened value keeps its
    /// unstable bounds dropped.
    fn meet_lazy(&self, other: &Self) -> Self {
        self.meet(other)
    }

    /// Meet with a single difference constraint.
    fn add_diff(&self, c: DiffCons) -> Self;
    /// Sound entailment test for a difference constraint.
    fn implies_diff(&self, c: &DiffCons) -> bool;

    /// Meet with `x ≠ k`. Convex domains can only trim an end point.
    fn assume_ne(&self, _x: Var, _k: i64) -> Self {
        self.clone()
    }

    /// Existential quantification of `v`.
    fn project(&self, v: Var) -> Self;

    fn project_all(&self, vs: &[Var]) -> Self {
        vs.iter().fold(self.clone(), |acc, v| acc.project(*v))
    }

    /// `v := rhs`; callers guarantee `v` does not occur in `rhs`.
    fn assign(&self, v: Var, rhs: &Rhs) -> Self;

    /// The constraints of the (closed) value. Bottom yields `[0 ≤ −1]`.
    fn diff_constraints(&self) -> Vec<DiffCons>;

    /// Keeps only the constraints selected by `keep`.
    fn restrict(&self, keep: &dyn Fn(&DiffCons) -> bool) -> Self {
        if self.is_bottom() {
            return self.clone();
        }
        let mut out = Self::top();
        for c in self.diff_constraints().into_iter().filter(|c| keep(c)) {
            out = out.add_diff(c);
        }
        out
    }

    /// Variables with at least one constraint.
    fn support(&self) -> BTreeSet<Var> {
        self.diff_constraints()
            .iter()
            .flat_map(|c| c.vars())
            .collect()
    }

    fn mentions(&self, v: Var) -> bool {
        self.diff_constraints().iter().any(|c| c.mentions(v))
    }

    /// Number of stored constraints, used for cost accounting.
    fn size(&self) -> usize {
        self.diff_constraints().len()
    }

    /// Meet with a linear constraint; inexpressible constraints are ignored.
    fn assume(&self, c: &LinCons) -> Self {
        match DiffCons::from_lincons(c) {
            Some(ds) => ds.into_iter().fold(self.clone(), |acc, d| acc.add_diff(d)),
            None => self.clone(),
        }
    }

    /// Sound entailment of a linear constraint.
    fn implies(&self, c: &LinCons) -> bool {
        if self.is_bottom() {
            return true;
        }
        match DiffCons::from_lincons(c) {
            Some(ds) => ds.iter().all(|d| self.implies_diff(d)),
            None => self.implies_general(c),
        }
    }

    /// Entailment for constraints that are not difference constraints:
    /// bound the left-hand side using unary bounds of each variable.
    fn implies_general(&self, c: &LinCons) -> bool {
        c.as_inequalities().iter().all(|ineq| {
            let mut lo = BigInt::zero();
            for (v, k) in ineq.terms() {
                let b = if k.is_positive() {
                    self.lower_bound(*v)
                } else {
                    self.upper_bound(*v)
                };
                match b {
                    Some(b) => lo += k * BigInt::from(b),
                    None => return false,
                }
            }
            &lo >= ineq.bound()
        })
    }

    fn lower_bound(&self, v: Var) -> Option<i64> {
        self.diff_constraints()
            .iter()
            .filter(|c| c.pos.is_none() && c.neg == Some(v))
            .map(|c| -c.bound)
            .max()
    }

    fn upper_bound(&self, v: Var) -> Option<i64> {
        self.diff_constraints()
            .iter()
            .filter(|c| c.neg.is_none() && c.pos == Some(v))
            .map(|c| c.bound)
            .min()
    }

    /// The constraint set as linear constraints.
    fn constraints(&self) -> Vec<LinCons> {
        if self.is_bottom() {
            return vec![bottom_marker()];
        }
        let mut out: Vec<LinCons> = self
            .diff_constraints()
            .iter()
            .filter_map(DiffCons::to_lincons)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Membership of an integer point (variables not in `value` are free).
    fn contains_point(&self, value: &dyn Fn(Var) -> Option<i64>) -> bool {
        let mut v = self.clone();
        let vars: Vec<Var> = self.support().into_iter().collect();
        for x in vars {
            if let Some(k) = value(x) {
                v = v.add_diff(DiffCons::upper(x, k)).add_diff(DiffCons::lower(x, k));
            }
        }
        !v.is_bottom()
    }

    /// Sorted `∧`-joined rendering.
    fn render(&self) -> String {
        if self.is_bottom() {
            return "⊥".into();
        }
        render_diffs(&self.diff_constraints())
    }
}

/// The `0 ≥ 1` marker returned when querying the constraints of ⊥.
pub fn bottom_marker() -> LinCons {
    // the zero node is pinned to 0, so −zero ≥ 1 reads as 0 ≥ 1
    LinCons::from_ints(&[(Var::ZERO, -1)], Rel::Ge, 1).expect("nonzero")
}

/// Renders a set of difference constraints, folding paired bounds into
/// equalities and two-sided ranges.
pub fn render_diffs(cs: &[DiffCons]) -> String {
    use std::collections::BTreeMap;
    if cs.is_empty() {
        return "⊤".into();
    }
    // key: unordered pair (by name); value: (upper of a−b, upper of b−a)
    type Key = (Option<Var>, Option<Var>);
    let name = |v: Option<Var>| v.map_or("", |v| v.name());
    let mut pairs: BTreeMap<(String, String), (Key, Option<i64>, Option<i64>)> = BTreeMap::new();
    for c in cs {
        let (a, b, fwd) = match (c.pos, c.neg) {
            (Some(_), None) => (c.pos, None, true),
            (None, Some(_)) => (c.neg, None, false),
            _ => {
                if name(c.pos) <= name(c.neg) {
                    (c.pos, c.neg, true)
                } else {
                    (c.neg, c.pos, false)
                }
            }
        };
        let e = pairs
            .entry((name(a).to_string(), name(b).to_string()))
            .or_insert(((a, b), None, None));
        let slot = if fwd { &mut e.1 } else { &mut e.2 };
        *slot = Some(slot.map_or(c.bound, |s: i64| s.min(c.bound)));
    }
    let mut parts = Vec::new();
    for ((a, b), up, down) in pairs.into_values() {
        let a = a.expect("left side present");
        match b {
            None => {
                // a ≤ up,  −a ≤ down
                match (up, down) {
                    (Some(u), Some(d)) if u == -d => parts.push(format!("{a} = {u}")),
                    (Some(u), Some(d)) => parts.push(format!("{} <= {a} <= {u}", -d)),
                    (Some(u), None) => parts.push(format!("{a} <= {u}")),
                    (None, Some(d)) => parts.push(format!("{a} >= {}", -d)),
                    (None, None) => {}
                }
            }
            Some(b) => {
                // a − b ≤ up,  b − a ≤ down
                match (up, down) {
                    (Some(u), Some(d)) if u == -d => parts.push(if u == 0 {
                        format!("{a} = {b}")
                    } else if u > 0 {
                        format!("{a} = {b} + {u}")
                    } else {
                        format!("{a} = {b} - {}", -(u as i128))
                    }),
                    (u, d) => {
                        if let Some(u) = u {
                            parts.push(DiffCons::diff(a, b, u).to_string());
                        }
                        if let Some(d) = d {
                            parts.push(DiffCons::diff(b, a, d).to_string());
                        }
                    }
                }
            }
        }
    }
    parts.join(" ∧ ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lincons_round_trip_through_diffs() {
        let x = Var::new("x");
        let y = Var::new("y");
        let c = LinCons::from_ints(&[(x, 1), (y, -1)], Rel::Gt, 0).unwrap();
        let ds = DiffCons::from_lincons(&c).unwrap();
        assert_eq!(ds, vec![DiffCons::diff(y, x, -1)]);
        assert_eq!(ds[0].to_lincons().unwrap(), c);
    }

    #[test]
    fn three_variable_constraint_inexpressible() {
        let c = LinCons::from_ints(
            &[(Var::new("x"), 1), (Var::new("y"), 1), (Var::new("z"), 1)],
            Rel::Ge,
            0,
        )
        .unwrap();
        assert!(DiffCons::from_lincons(&c).is_none());
    }

    #[test]
    fn render_folds_equalities() {
        let a = Var::new("a");
        let b = Var::new("b");
        let s = render_diffs(&[DiffCons::diff(a, b, 0), DiffCons::diff(b, a, 0)]);
        assert_eq!(s, "a = b");
        let s = render_diffs(&[DiffCons::upper(a, 1), DiffCons::lower(a, 0)]);
        assert_eq!(s, "0 <= a <= 1");
    }

    #[test]
    fn bound_addition_saturates() {
        assert_eq!(add_bound(INF, -3), INF);
        assert_eq!(add_bound(i64::MAX - 1, 5), INF);
        assert_eq!(add_bound(2, -3), -1);
    }
}
