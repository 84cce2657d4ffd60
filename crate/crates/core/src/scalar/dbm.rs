//! Sparse difference-bound matrices.
//!
//! A value stores only the variables it actually constrains (plus the zero
//! node when unary bounds exist), as a small dense matrix over that node
//! list. Entry `(a, b)` is the tightest known upper bound on `a − b`.
//! Values are kept shortest-path closed, except for the immediate result of
//! a widening.

use std::collections::BTreeSet;

use super::interval::{eval_interval, Itv};
use super::{add_bound, DiffCons, Operand, Rhs, ScalarDomain, INF};
use crate::var::Var;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dbm {
    bottom: bool,
    closed: bool,
    nodes: Vec<Var>,
    m: Vec<i64>,
}

impl Dbm {
    fn n(&self) -> usize {
        self.nodes.len()
    }

    fn pos(&self, v: Var) -> Option<usize> {
        self.nodes.binary_search(&v).ok()
    }

    #[inline]
    fn at(&self, a: usize, b: usize) -> i64 {
        self.m[a * self.nodes.len() + b]
    }

    /// Upper bound on `a − b` (variables absent from the matrix are free).
    pub fn bound(&self, a: Var, b: Var) -> i64 {
        if a == b {
            return 0;
        }
        match (self.pos(a), self.pos(b)) {
            (Some(i), Some(j)) => self.at(i, j),
            _ => INF,
        }
    }

    fn with_nodes(nodes: Vec<Var>) -> Dbm {
        let n = nodes.len();
        let mut m = vec![INF; n * n];
        for i in 0..n {
            m[i * n + i] = 0;
        }
        Dbm {
            bottom: false,
            closed: true,
            nodes,
            m,
        }
    }

    /// Re-indexes onto a superset node list.
    fn extend_to(&self, nodes: &[Var]) -> Dbm {
        let mut out = Dbm::with_nodes(nodes.to_vec());
        let n = nodes.len();
        let map: Vec<usize> = self
            .nodes
            .iter()
            .map(|v| nodes.binary_search(v).expect("superset"))
            .collect();
        for (i, &ii) in map.iter().enumerate() {
            for (j, &jj) in map.iter().enumerate() {
                out.m[ii * n + jj] = self.at(i, j);
            }
        }
        out.closed = self.closed;
        out
    }

    fn ensure_nodes(&self, vs: &[Var]) -> Dbm {
        if vs.iter().all(|v| self.pos(*v).is_some()) {
            return self.clone();
        }
        let mut nodes: BTreeSet<Var> = self.nodes.iter().copied().collect();
        nodes.extend(vs.iter().copied());
        self.extend_to(&nodes.into_iter().collect::<Vec<_>>())
    }

    /// Floyd–Warshall closure with negative-cycle detection.
    fn close_in_place(&mut self) {
        if self.bottom || self.closed {
            return;
        }
        let n = self.n();
        for k in 0..n {
            for i in 0..n {
                let ik = self.m[i * n + k];
                if ik == INF {
                    continue;
                }
                for j in 0..n {
                    let kj = self.m[k * n + j];
                    if kj == INF {
                        continue;
                    }
                    let s = add_bound(ik, kj);
                    if s < self.m[i * n + j] {
                        self.m[i * n + j] = s;
                    }
                }
            }
        }
        if (0..n).any(|i| self.m[i * n + i] < 0) {
            *self = Dbm::bottom();
            return;
        }
        self.closed = true;
        self.prune();
    }

    fn canon(&self) -> std::borrow::Cow<'_, Dbm> {
        if self.closed || self.bottom {
            std::borrow::Cow::Borrowed(self)
        } else {
            std::borrow::Cow::Owned(self.closure())
        }
    }

    pub fn closure(&self) -> Dbm {
        let mut c = self.clone();
        c.close_in_place();
        c
    }

    /// Removes nodes without any finite off-diagonal bound.
    fn prune(&mut self) {
        let n = self.n();
        let keep: Vec<usize> = (0..n)
            .filter(|&i| (0..n).any(|j| j != i && (self.at(i, j) != INF || self.at(j, i) != INF)))
            .collect();
        if keep.len() == n {
            return;
        }
        let k = keep.len();
        let mut m = vec![INF; k * k];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                m[a * k + b] = self.at(i, j);
            }
        }
        self.nodes = keep.iter().map(|&i| self.nodes[i]).collect();
        self.m = m;
    }

    /// Tightens `a − b ≤ k` on a closed value, propagating in O(n²).
    fn tighten(&mut self, a: Var, b: Var, k: i64) {
        debug_assert!(self.closed);
        if self.bottom {
            return;
        }
        if a == b {
            if k < 0 {
                *self = Dbm::bottom();
            }
            return;
        }
        if self.bound(a, b) <= k {
            return;
        }
        if add_bound(self.bound(b, a), k) < 0 {
            *self = Dbm::bottom();
            return;
        }
        *self = self.ensure_nodes(&[a, b]);
        let n = self.n();
        let p = self.pos(a).expect("present");
        let q = self.pos(b).expect("present");
        let col_p: Vec<i64> = (0..n).map(|i| self.m[i * n + p]).collect();
        let row_q: Vec<i64> = (0..n).map(|j| self.m[q * n + j]).collect();
        for i in 0..n {
            if col_p[i] == INF {
                continue;
            }
            let via = add_bound(col_p[i], k);
            for j in 0..n {
                if row_q[j] == INF {
                    continue;
                }
                let s = add_bound(via, row_q[j]);
                if s < self.m[i * n + j] {
                    self.m[i * n + j] = s;
                }
            }
        }
    }

    fn node_of(v: Option<Var>) -> Var {
        v.unwrap_or(Var::ZERO)
    }

    fn itv(&self, v: Var) -> Itv {
        let hi = self.bound(v, Var::ZERO);
        let lo = self.bound(Var::ZERO, v);
        Itv {
            lo: (lo != INF).then(|| -lo),
            hi: (hi != INF).then_some(hi),
        }
    }

    fn operand_itv(&self, o: Operand) -> Itv {
        match o {
            Operand::Const(c) => Itv::point(c),
            Operand::Var(w) => self.itv(w),
        }
    }

    fn point(&self, o: Operand) -> Option<i64> {
        let i = self.operand_itv(o);
        match (i.lo, i.hi) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        }
    }

    fn set_equal_offset(&self, v: Var, w: Var, c: i64) -> Dbm {
        // v = w + c
        self.add_diff(DiffCons::diff(v, w, c))
            .add_diff(DiffCons::diff(w, v, c.checked_neg().unwrap_or(INF)))
    }

    fn set_range(&self, v: Var, r: Itv) -> Dbm {
        let mut out = self.clone();
        if let Some(hi) = r.hi {
            out = out.add_diff(DiffCons::upper(v, hi));
        }
        if let Some(lo) = r.lo {
            out = out.add_diff(DiffCons::lower(v, lo));
        }
        out
    }
}

impl ScalarDomain for Dbm {
    const NAME: &'static str = "dbm";

    fn top() -> Dbm {
        Dbm::with_nodes(Vec::new())
    }

    fn bottom() -> Dbm {
        Dbm {
            bottom: true,
            closed: true,
            nodes: Vec::new(),
            m: Vec::new(),
        }
    }

    fn is_bottom(&self) -> bool {
        self.bottom
    }

    fn is_top(&self) -> bool {
        !self.bottom && self.canon().nodes.is_empty()
    }

    fn join(&self, other: &Dbm) -> Dbm {
        if self.bottom {
            return other.closure();
        }
        if other.bottom {
            return self.closure();
        }
        let a = self.canon();
        let b = other.canon();
        if a.bottom {
            return b.into_owned();
        }
        if b.bottom {
            return a.into_owned();
        }
        let nodes: Vec<Var> = a
            .nodes
            .iter()
            .copied()
            .filter(|v| b.pos(*v).is_some())
            .collect();
        let mut out = Dbm::with_nodes(nodes);
        let n = out.n();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let (x, y) = (out.nodes[i], out.nodes[j]);
                    out.m[i * n + j] = a.bound(x, y).max(b.bound(x, y));
                }
            }
        }
        out.prune();
        out
    }

    fn meet(&self, other: &Dbm) -> Dbm {
        if self.bottom || other.bottom {
            return Dbm::bottom();
        }
        let (big, small) = if self.n() >= other.n() {
            (self.closure(), other)
        } else {
            (other.closure(), self)
        };
        let mut out = big;
        for c in small.diff_constraints() {
            out.tighten(Self::node_of(c.pos), Self::node_of(c.neg), c.bound);
            if out.bottom {
                break;
            }
        }
        out
    }

    fn leq(&self, other: &Dbm) -> bool {
        let a = self.canon();
        if a.bottom {
            return true;
        }
        let b = other.canon();
        if b.bottom {
            return false;
        }
        let n = b.n();
        for i in 0..n {
            for j in 0..n {
                let k = b.at(i, j);
                if i != j && k != INF && a.bound(b.nodes[i], b.nodes[j]) > k {
                    return false;
                }
            }
        }
        true
    }

    fn widen(&self, other: &Dbm) -> Dbm {
        if self.bottom {
            return other.clone();
        }
        let y = other.canon();
        if y.bottom {
            return self.clone();
        }
        let mut out = self.clone();
        let n = out.n();
        for i in 0..n {
            for j in 0..n {
                let k = out.m[i * n + j];
                if i != j && k != INF && y.bound(out.nodes[i], out.nodes[j]) > k {
                    out.m[i * n + j] = INF;
                }
            }
        }
        // the widened value is deliberately left unclosed
        out.closed = false;
        out.prune();
        out
    }

    fn meet_lazy(&self, other: &Dbm) -> Dbm {
        if self.bottom || other.bottom {
            return Dbm::bottom();
        }
        let mut nodes: BTreeSet<Var> = self.nodes.iter().copied().collect();
        nodes.extend(other.nodes.iter().copied());
        let nodes: Vec<Var> = nodes.into_iter().collect();
        let mut out = self.extend_to(&nodes);
        let b = other.extend_to(&nodes);
        let mut changed = false;
        for (x, y) in out.m.iter_mut().zip(&b.m) {
            if *y < *x {
                *x = *y;
                changed = true;
            }
        }
        out.closed = self.closed && !changed;
        out
    }

    fn add_diff(&self, c: DiffCons) -> Dbm {
        let mut out = self.closure();
        out.tighten(Self::node_of(c.pos), Self::node_of(c.neg), c.bound);
        out
    }

    fn implies_diff(&self, c: &DiffCons) -> bool {
        let a = self.canon();
        a.bottom || a.bound(Self::node_of(c.pos), Self::node_of(c.neg)) <= c.bound
    }

    fn project(&self, v: Var) -> Dbm {
        let mut a = self.closure();
        if a.bottom || a.pos(v).is_none() {
            return a;
        }
        let keep: Vec<Var> = a.nodes.iter().copied().filter(|w| *w != v).collect();
        let n = a.n();
        let k = keep.len();
        let mut m = vec![INF; k * k];
        let idx: Vec<usize> = (0..n).filter(|&i| a.nodes[i] != v).collect();
        for (x, &i) in idx.iter().enumerate() {
            for (y, &j) in idx.iter().enumerate() {
                m[x * k + y] = a.at(i, j);
            }
        }
        a.nodes = keep;
        a.m = m;
        a.prune();
        a
    }

    fn project_all(&self, vs: &[Var]) -> Dbm {
        let mut a = self.closure();
        if a.bottom || !vs.iter().any(|v| a.pos(*v).is_some()) {
            return a;
        }
        let idx: Vec<usize> = (0..a.n()).filter(|&i| !vs.contains(&a.nodes[i])).collect();
        let k = idx.len();
        let mut m = vec![INF; k * k];
        for (x, &i) in idx.iter().enumerate() {
            for (y, &j) in idx.iter().enumerate() {
                m[x * k + y] = a.at(i, j);
            }
        }
        a.nodes = idx.iter().map(|&i| a.nodes[i]).collect();
        a.m = m;
        a.prune();
        a
    }

    fn assign(&self, v: Var, rhs: &Rhs) -> Dbm {
        debug_assert!(!rhs.mentions(v), "assign target occurs in rhs");
        let base = self.project(v);
        if base.bottom {
            return base;
        }
        match *rhs {
            Rhs::Const(k) => base.set_range(v, Itv::point(k)),
            Rhs::Copy(w) => base.set_equal_offset(v, w, 0),
            Rhs::Havoc => base,
            Rhs::Neg(w) => {
                let r = eval_interval(super::BinOp::Sub, Itv::point(0), base.itv(w));
                base.set_range(v, r)
            }
            Rhs::Bin(op, a, b) => {
                use super::BinOp::*;
                let exact = match (op, a, b) {
                    (_, Operand::Const(x), Operand::Const(y)) => {
                        return match op.apply(x, y) {
                            Some(k) => base.set_range(v, Itv::point(k)),
                            None => base,
                        };
                    }
                    (Add, Operand::Var(w), o) | (Add, o, Operand::Var(w)) => {
                        base.point(o).map(|c| (w, c))
                    }
                    (Sub, Operand::Var(w), o) => base.point(o).and_then(|c| c.checked_neg()).map(|c| (w, c)),
                    _ => None,
                };
                match exact {
                    Some((w, c)) => base.set_equal_offset(v, w, c),
                    None => {
                        let r = eval_interval(op, base.operand_itv(a), base.operand_itv(b));
                        base.set_range(v, r)
                    }
                }
            }
        }
    }

    fn diff_constraints(&self) -> Vec<DiffCons> {
        let a = self.canon();
        if a.bottom {
            return vec![DiffCons::new(None, None, -1)];
        }
        let n = a.n();
        let opt = |v: Var| (!v.is_zero()).then_some(v);
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let k = a.at(i, j);
                if i != j && k != INF {
                    out.push(DiffCons::new(opt(a.nodes[i]), opt(a.nodes[j]), k));
                }
            }
        }
        out
    }

    fn restrict(&self, keep: &dyn Fn(&DiffCons) -> bool) -> Dbm {
        let mut a = self.closure();
        if a.bottom {
            return a;
        }
        let n = a.n();
        let opt = |v: Var| (!v.is_zero()).then_some(v);
        let mut dropped = false;
        for i in 0..n {
            for j in 0..n {
                let k = a.m[i * n + j];
                if i != j && k != INF && !keep(&DiffCons::new(opt(a.nodes[i]), opt(a.nodes[j]), k)) {
                    a.m[i * n + j] = INF;
                    dropped = true;
                }
            }
        }
        if dropped {
            a.closed = false;
            a.close_in_place();
        }
        a
    }

    fn support(&self) -> BTreeSet<Var> {
        self.canon()
            .nodes
            .iter()
            .copied()
            .filter(|v| !v.is_zero())
            .collect()
    }

    fn mentions(&self, v: Var) -> bool {
        self.canon().pos(v).is_some()
    }

    fn size(&self) -> usize {
        let n = self.n();
        self.m.iter().filter(|&&k| k != INF).count().saturating_sub(n)
    }

    fn lower_bound(&self, v: Var) -> Option<i64> {
        self.canon().itv(v).lo
    }

    fn upper_bound(&self, v: Var) -> Option<i64> {
        self.canon().itv(v).hi
    }

    fn contains_point(&self, value: &dyn Fn(Var) -> Option<i64>) -> bool {
        let a = self.closure();
        if a.bottom {
            return false;
        }
        let val = |v: Var| if v.is_zero() { Some(0) } else { value(v) };
        // fully assigned constraints are checked directly; the rest by meet
        let mut partial = false;
        let n = a.n();
        for i in 0..n {
            for j in 0..n {
                let k = a.at(i, j);
                if i == j || k == INF {
                    continue;
                }
                match (val(a.nodes[i]), val(a.nodes[j])) {
                    (Some(x), Some(y)) => {
                        if (x as i128) - (y as i128) > k as i128 {
                            return false;
                        }
                    }
                    _ => partial = true,
                }
            }
        }
        if !partial {
            return true;
        }
        let mut b = a;
        for v in b.nodes.clone() {
            if let (false, Some(k)) = (v.is_zero(), value(v)) {
                b.tighten(v, Var::ZERO, k);
                b.tighten(Var::ZERO, v, -k);
            }
        }
        !b.bottom
    }
}
