//! Non-relational interval domain.

use std::collections::BTreeMap;

use super::{BinOp, DiffCons, Operand, Rhs, ScalarDomain};
use crate::var::Var;

/// An integer interval; `None` is an infinite end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Itv {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Itv {
    pub const TOP: Itv = Itv { lo: None, hi: None };

    pub fn point(k: i64) -> Itv {
        Itv {
            lo: Some(k),
            hi: Some(k),
        }
    }

    fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(l), Some(h)) if l > h)
    }

    fn is_top(&self) -> bool {
        self.lo.is_none() && self.hi.is_none()
    }

    fn hull(&self, o: &Itv) -> Itv {
        Itv {
            lo: self.lo.zip(o.lo).map(|(a, b)| a.min(b)),
            hi: self.hi.zip(o.hi).map(|(a, b)| a.max(b)),
        }
    }

    fn intersect(&self, o: &Itv) -> Itv {
        let pick = |a: Option<i64>, b: Option<i64>, f: fn(i64, i64) -> i64| match (a, b) {
            (Some(x), Some(y)) => Some(f(x, y)),
            (x, None) | (None, x) => x,
        };
        Itv {
            lo: pick(self.lo, o.lo, i64::max),
            hi: pick(self.hi, o.hi, i64::min),
        }
    }

    fn contains(&self, o: &Itv) -> bool {
        let lo_ok = match (self.lo, o.lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a <= b,
        };
        let hi_ok = match (self.hi, o.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => b <= a,
        };
        lo_ok && hi_ok
    }
}

/// Interval arithmetic; overflowing ends become infinite.
pub(crate) fn eval_interval(op: BinOp, a: Itv, b: Itv) -> Itv {
    match op {
        BinOp::Add => Itv {
            lo: a.lo.zip(b.lo).and_then(|(x, y)| x.checked_add(y)),
            hi: a.hi.zip(b.hi).and_then(|(x, y)| x.checked_add(y)),
        },
        BinOp::Sub => Itv {
            lo: a.lo.zip(b.hi).and_then(|(x, y)| x.checked_sub(y)),
            hi: a.hi.zip(b.lo).and_then(|(x, y)| x.checked_sub(y)),
        },
        BinOp::Mul => match (a.lo, a.hi, b.lo, b.hi) {
            (Some(al), Some(ah), Some(bl), Some(bh)) => {
                let ps = [al.checked_mul(bl), al.checked_mul(bh), ah.checked_mul(bl), ah.checked_mul(bh)];
                if ps.iter().any(Option::is_none) {
                    return Itv::TOP;
                }
                let ps = ps.map(Option::unwrap);
                Itv {
                    lo: ps.iter().min().copied(),
                    hi: ps.iter().max().copied(),
                }
            }
            _ => Itv::TOP,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    bottom: bool,
    env: BTreeMap<Var, Itv>,
}

impl Interval {
    pub fn get(&self, v: Var) -> Itv {
        self.env.get(&v).copied().unwrap_or(Itv::TOP)
    }

    fn set(mut self, v: Var, i: Itv) -> Interval {
        if self.bottom {
            return self;
        }
        if i.is_empty() {
            return Interval::bottom();
        }
        if i.is_top() {
            self.env.remove(&v);
        } else {
            self.env.insert(v, i);
        }
        self
    }

    fn side(&self, v: Option<Var>) -> Itv {
        v.map_or(Itv::point(0), |v| self.get(v))
    }

    fn operand(&self, o: Operand) -> Itv {
        match o {
            Operand::Const(c) => Itv::point(c),
            Operand::Var(w) => self.get(w),
        }
    }
}

impl ScalarDomain for Interval {
    const NAME: &'static str = "interval";

    fn top() -> Interval {
        Interval {
            bottom: false,
            env: BTreeMap::new(),
        }
    }

    fn bottom() -> Interval {
        Interval {
            bottom: true,
            env: BTreeMap::new(),
        }
    }

    fn is_bottom(&self) -> bool {
        self.bottom
    }

    fn is_top(&self) -> bool {
        !self.bottom && self.env.is_empty()
    }

    fn join(&self, other: &Interval) -> Interval {
        if self.bottom {
            return other.clone();
        }
        if other.bottom {
            return self.clone();
        }
        let mut out = Interval::top();
        for (v, a) in &self.env {
            if let Some(b) = other.env.get(v) {
                out = out.set(*v, a.hull(b));
            }
        }
        out
    }

    fn meet(&self, other: &Interval) -> Interval {
        if self.bottom || other.bottom {
            return Interval::bottom();
        }
        let mut out = self.clone();
        for (v, b) in &other.env {
            let a = out.get(*v);
            out = out.set(*v, a.intersect(b));
        }
        out
    }

    fn leq(&self, other: &Interval) -> bool {
        if self.bottom {
            return true;
        }
        if other.bottom {
            return false;
        }
        other.env.iter().all(|(v, b)| b.contains(&self.get(*v)))
    }

    fn widen(&self, other: &Interval) -> Interval {
        if self.bottom {
            return other.clone();
        }
        if other.bottom {
            return self.clone();
        }
        let mut out = Interval::top();
        for (v, a) in &self.env {
            let b = other.get(*v);
            let lo = match (a.lo, b.lo) {
                (Some(x), Some(y)) if y >= x => Some(x),
                _ => None,
            };
            let hi = match (a.hi, b.hi) {
                (Some(x), Some(y)) if y <= x => Some(x),
                _ => None,
            };
            out = out.set(*v, Itv { lo, hi });
        }
        out
    }

    fn add_diff(&self, c: DiffCons) -> Interval {
        if self.bottom {
            return self.clone();
        }
        // pos − neg ≤ k:  pos ≤ hi(neg) + k,  neg ≥ lo(pos) − k
        let p = self.side(c.pos);
        let n = self.side(c.neg);
        let mut out = self.clone();
        if c.pos == c.neg {
            return if c.bound < 0 { Interval::bottom() } else { out };
        }
        match c.pos {
            Some(pv) => {
                let hi = n.hi.and_then(|h| h.checked_add(c.bound));
                out = out.set(pv, p.intersect(&Itv { lo: None, hi }));
            }
            None => {
                // −neg ≤ k
                if let Some(nv) = c.neg {
                    out = out.set(nv, n.intersect(&Itv { lo: c.bound.checked_neg(), hi: None }));
                }
                return out;
            }
        }
        if let Some(nv) = c.neg {
            let lo = p.lo.and_then(|l| l.checked_sub(c.bound));
            let cur = out.get(nv);
            out = out.set(nv, cur.intersect(&Itv { lo, hi: None }));
        }
        out
    }

    fn implies_diff(&self, c: &DiffCons) -> bool {
        if self.bottom {
            return true;
        }
        if c.pos == c.neg {
            return c.bound >= 0;
        }
        let p = self.side(c.pos);
        let n = self.side(c.neg);
        match (p.hi, n.lo) {
            (Some(h), Some(l)) => (h as i128) - (l as i128) <= c.bound as i128,
            _ => false,
        }
    }

    fn assume_ne(&self, x: Var, k: i64) -> Interval {
        let mut i = self.get(x);
        if i.lo == Some(k) {
            i.lo = k.checked_add(1);
        }
        if i.hi == Some(k) {
            i.hi = k.checked_sub(1);
        }
        self.clone().set(x, i)
    }

    fn project(&self, v: Var) -> Interval {
        let mut out = self.clone();
        out.env.remove(&v);
        out
    }

    fn assign(&self, v: Var, rhs: &Rhs) -> Interval {
        if self.bottom {
            return self.clone();
        }
        let r = match *rhs {
            Rhs::Const(k) => Itv::point(k),
            Rhs::Copy(w) => self.get(w),
            Rhs::Neg(w) => eval_interval(BinOp::Sub, Itv::point(0), self.get(w)),
            Rhs::Bin(op, a, b) => eval_interval(op, self.operand(a), self.operand(b)),
            Rhs::Havoc => Itv::TOP,
        };
        self.project(v).set(v, r)
    }

    fn diff_constraints(&self) -> Vec<DiffCons> {
        if self.bottom {
            return vec![DiffCons::new(None, None, -1)];
        }
        let mut out = Vec::new();
        for (v, i) in &self.env {
            if let Some(h) = i.hi {
                out.push(DiffCons::upper(*v, h));
            }
            if let Some(l) = i.lo {
                out.push(DiffCons::lower(*v, l));
            }
        }
        out
    }

    fn mentions(&self, v: Var) -> bool {
        self.env.contains_key(&v)
    }

    fn size(&self) -> usize {
        self.env.len()
    }

    fn lower_bound(&self, v: Var) -> Option<i64> {
        self.get(v).lo
    }

    fn upper_bound(&self, v: Var) -> Option<i64> {
        self.get(v).hi
    }

    fn contains_point(&self, value: &dyn Fn(Var) -> Option<i64>) -> bool {
        if self.bottom {
            return false;
        }
        self.env.iter().all(|(v, i)| match value(*v) {
            Some(x) => i.lo.map_or(true, |l| l <= x) && i.hi.map_or(true, |h| x <= h),
            None => true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn itv(lo: i64, hi: i64) -> Itv {
        Itv {
            lo: Some(lo),
            hi: Some(hi),
        }
    }

    #[test]
    fn widening_jumps_to_infinity() {
        let i = Var::new("i");
        let a = Interval::top().set(i, itv(0, 1));
        let b = Interval::top().set(i, itv(0, 2));
        assert_eq!(a.widen(&b).get(i), Itv { lo: Some(0), hi: None });
        assert_eq!(a.widen(&a), a);
    }

    #[test]
    fn relational_constraint_trims_bounds() {
        let (x, y) = (Var::new("x"), Var::new("y"));
        let s = Interval::top().set(y, itv(0, 5)).add_diff(DiffCons::diff(x, y, -1));
        assert_eq!(s.get(x).hi, Some(4));
        assert!(s.implies_diff(&DiffCons::upper(x, 4)));
        let bot = Interval::top().set(x, itv(3, 3)).add_diff(DiffCons::upper(x, 2));
        assert!(bot.is_bottom());
    }

    #[test]
    fn arithmetic() {
        assert_eq!(eval_interval(BinOp::Mul, itv(-2, 3), itv(1, 2)), itv(-4, 6));
        assert_eq!(eval_interval(BinOp::Sub, itv(0, 1), itv(1, 1)), itv(-1, 0));
        let x = Var::new("x");
        let s = Interval::top().set(x, itv(5, 5)).assign(x, &Rhs::Havoc);
        assert!(s.is_top());
    }
}
