//! The array content graph domain.
//!
//! A [`ContentState`] pairs a scalar value `φ` with a square matrix `Ψ` of
//! scalar values indexed by segment-bound [`Vertex`]es. Entry `ψ(i, j)`
//! describes every array cell with index in `[i, j)`; inside an entry the
//! segment variables (`a` for array `A`) stand for the cell contents and
//! `idx` for the cell index.
//!
//! In [`Mode::Naive`] each entry stores its full value. In [`Mode::Sparse`]
//! entries store a relaxed value `ψ̈` from which the full value is recovered
//! as `φ ⊓ ⟦i < j⟧ ⊓ ψ̈`; entries that carry nothing beyond that are kept as
//! `⊤`, so rows and columns are mostly empty.

mod normalize;
mod render;

use std::fmt;
use std::sync::Arc;

use crate::relax::{relax_value, RelaxMode};
use crate::scalar::{DiffCons, ScalarDomain};
use crate::var::Var;

pub use normalize::{NormStats, NormalizeError};

/// A segment-bound base: an index-relevant variable or an integer constant.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Base {
    Const(i64),
    Var(Var),
}

/// `base` or `base + 1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub base: Base,
    pub plus: bool,
}

impl Vertex {
    pub fn var(v: Var) -> Vertex {
        Vertex {
            base: Base::Var(v),
            plus: false,
        }
    }

    pub fn konst(c: i64) -> Vertex {
        Vertex {
            base: Base::Const(c),
            plus: false,
        }
    }

    pub fn succ(self) -> Vertex {
        Vertex { plus: true, ..self }
    }

    /// The vertex as `var + offset`.
    pub fn term(self) -> (Option<Var>, i64) {
        let off = self.plus as i64;
        match self.base {
            Base::Var(v) => (Some(v), off),
            Base::Const(c) => (None, c + off),
        }
    }

    /// Integer value under a scalar store.
    pub fn meaning(self, sigma: impl Fn(Var) -> Option<i64>) -> Option<i64> {
        match self.term() {
            (Some(v), off) => sigma(v).map(|x| x + off),
            (None, c) => Some(c),
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.base {
            Base::Var(v) => write!(f, "{v}")?,
            Base::Const(c) => write!(f, "{c}")?,
        }
        if self.plus {
            f.write_str("+")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A difference constraint between terms, after deciding trivial cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decided {
    True,
    False,
    Cons(DiffCons),
}

/// `(x + xo) − (y + yo) ≤ k` where `None` is the constant 0.
pub fn term_diff(x: (Option<Var>, i64), y: (Option<Var>, i64), k: i64) -> Decided {
    let bound = k.checked_sub(x.1).and_then(|b| b.checked_add(y.1));
    let Some(bound) = bound else {
        return Decided::True;
    };
    if x.0 == y.0 {
        return if bound >= 0 { Decided::True } else { Decided::False };
    }
    Decided::Cons(DiffCons::new(x.0, y.0, bound))
}

/// `m(p) − m(q) ≤ k` over vertex meanings.
pub fn vertex_diff(p: Vertex, q: Vertex, k: i64) -> Decided {
    term_diff(p.term(), q.term(), k)
}

/// Meets `d` with a decided constraint.
pub fn meet_decided<D: ScalarDomain>(d: &D, c: Decided) -> D {
    match c {
        Decided::True => d.clone(),
        Decided::False => D::bottom(),
        Decided::Cons(c) => d.add_diff(c),
    }
}

/// Sound entailment of a decided constraint.
pub fn implies_decided<D: ScalarDomain>(d: &D, c: Decided) -> bool {
    match c {
        Decided::True => true,
        Decided::False => d.is_bottom(),
        Decided::Cons(c) => d.implies_diff(&c),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    Naive,
    Sparse,
}

/// Per-analysis settings carried by every state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub mode: Mode,
    pub relax: RelaxMode,
    /// Multiplier on the normalization step budget.
    pub budget_factor: usize,
    /// Number of scalar variables, used to size the budget.
    pub scalars: usize,
    /// Test-only mutation: treat every weak update as a no-op.
    pub skip_weak_updates: bool,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            mode: Mode::Naive,
            relax: RelaxMode::Cheap,
            budget_factor: 1,
            scalars: 0,
            skip_weak_updates: false,
        }
    }
}

/// Fixed-width bit set over vertex positions.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub(crate) struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, k: usize, on: bool) {
        let (w, b) = (k / 64, k % 64);
        if on {
            self.0[w] |= 1 << b;
        } else {
            self.0[w] &= !(1 << b);
        }
    }

    pub(crate) fn get(&self, k: usize) -> bool {
        self.0[k / 64] >> (k % 64) & 1 == 1
    }

    /// Positions set in both.
    pub(crate) fn and_iter<'a>(&'a self, o: &'a Bits) -> impl Iterator<Item = usize> + 'a {
        self.0
            .iter()
            .zip(&o.0)
            .enumerate()
            .flat_map(|(w, (a, b))| {
                let mut x = a & b;
                std::iter::from_fn(move || {
                    if x == 0 {
                        return None;
                    }
                    let t = x.trailing_zeros() as usize;
                    x &= x - 1;
                    Some(w * 64 + t)
                })
            })
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// An element `⟨φ, Ψ⟩` of the content domain.
#[derive(Clone, Debug)]
pub struct ContentState<D: ScalarDomain> {
    pub(crate) phi: D,
    pub(crate) verts: Vec<Vertex>,
    pub(crate) psi: Vec<D>,
    pub(crate) ui: Arc<Vec<Var>>,
    pub(crate) cfg: Config,
    /// non-⊤ entries per row and per column
    pub(crate) rows: Vec<Bits>,
    pub(crate) cols: Vec<Bits>,
}

impl<D: ScalarDomain> ContentState<D> {
    fn raw(phi: D, verts: Vec<Vertex>, ui: Arc<Vec<Var>>, cfg: Config) -> Self {
        let n = verts.len();
        let mut s = ContentState {
            phi,
            psi: vec![D::top(); n * n],
            verts,
            ui,
            cfg,
            rows: vec![Bits::new(n); n],
            cols: vec![Bits::new(n); n],
        };
        for i in 0..n {
            for j in 0..n {
                if s.structural(i, j) {
                    s.set(i, j, D::bottom());
                }
            }
        }
        s
    }

    /// The greatest state over `verts`, already normalized.
    ///
    /// `ui` lists the segment variables and `idx`.
    pub fn top(verts: Vec<Vertex>, ui: Vec<Var>, cfg: Config) -> Self {
        let mut s = Self::raw(D::top(), verts, Arc::new(ui), cfg);
        s.normalize().expect("normalizing the top state cannot exhaust the budget");
        s
    }

    /// The canonical bottom state over `verts`.
    pub fn bottom(verts: Vec<Vertex>, ui: Vec<Var>, cfg: Config) -> Self {
        let mut s = Self::raw(D::bottom(), verts, Arc::new(ui), cfg);
        s.make_bottom();
        s
    }

    /// Builds a state from explicit entries, then normalizes it.
    ///
    /// Entries not listed are `⊤`. In sparse mode the given values are
    /// relaxed first.
    pub fn from_entries(
        phi: D,
        verts: Vec<Vertex>,
        ui: Vec<Var>,
        cfg: Config,
        entries: &[(Vertex, Vertex, D)],
    ) -> Result<Self, NormalizeError> {
        let mut s = Self::raw(phi, verts, Arc::new(ui), cfg);
        for (p, q, d) in entries {
            let i = s.index_of(*p).expect("vertex in state");
            let j = s.index_of(*q).expect("vertex in state");
            let v = s.store_value(i, j, d.clone());
            let v = v.meet(&s.psi[i * s.n() + j]);
            s.set(i, j, v);
        }
        s.normalize()?;
        Ok(s)
    }

    pub(crate) fn make_bottom(&mut self) {
        self.phi = D::bottom();
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                self.set(i, j, D::bottom());
            }
        }
    }

    pub fn n(&self) -> usize {
        self.verts.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.verts
    }

    pub fn phi(&self) -> &D {
        &self.phi
    }

    pub fn config(&self) -> Config {
        self.cfg
    }

    pub fn segment_vars(&self) -> &[Var] {
        &self.ui
    }

    pub fn is_bottom(&self) -> bool {
        self.phi.is_bottom()
    }

    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.verts.iter().position(|w| *w == v)
    }

    /// `(v⁺, v)` and the diagonal are empty by construction.
    pub(crate) fn structural(&self, i: usize, j: usize) -> bool {
        let (p, q) = (self.verts[i], self.verts[j]);
        i == j || (p.plus && !q.plus && p.base == q.base)
    }

    /// The stored entry (relaxed in sparse mode).
    pub fn stored(&self, i: usize, j: usize) -> &D {
        &self.psi[i * self.n() + j]
    }

    /// Replaces `φ`; the caller normalizes afterwards.
    pub(crate) fn set_phi(&mut self, phi: D) {
        self.phi = phi;
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, d: D) {
        let top = d.is_top();
        self.rows[i].set(j, !top);
        self.cols[j].set(i, !top);
        let n = self.n();
        self.psi[i * n + j] = d;
    }

    /// `⟦i < j⟧` on vertex meanings.
    pub fn lt(&self, i: usize, j: usize) -> Decided {
        vertex_diff(self.verts[i], self.verts[j], -1)
    }

    /// `φ ⊓ ⟦i < j⟧`.
    pub fn boundary(&self, i: usize, j: usize) -> D {
        meet_decided(&self.phi, self.lt(i, j))
    }

    /// The full entry value `ψ(i, j)`.
    pub fn full(&self, i: usize, j: usize) -> D {
        let e = self.stored(i, j);
        match self.cfg.mode {
            Mode::Naive => e.clone(),
            Mode::Sparse => {
                if e.is_bottom() {
                    return D::bottom();
                }
                let b = self.boundary(i, j);
                if e.is_top() {
                    b
                } else {
                    b.meet(e)
                }
            }
        }
    }

    /// Full value of the entry between two vertices.
    pub fn entry(&self, p: Vertex, q: Vertex) -> Option<D> {
        Some(self.full(self.index_of(p)?, self.index_of(q)?))
    }

    /// Converts a full value into what is stored for `(i, j)`.
    pub(crate) fn store_value(&self, i: usize, j: usize, d: D) -> D {
        match self.cfg.mode {
            Mode::Naive => d,
            Mode::Sparse => {
                if d.is_bottom() {
                    return d;
                }
                relax_value(&self.phi, &d, self.lt(i, j), &self.ui, self.cfg.relax)
            }
        }
    }

    /// Number of non-⊤ entries.
    pub fn nontop_entries(&self) -> usize {
        self.rows.iter().map(Bits::count).sum()
    }

    fn same_shape(&self, o: &Self) {
        assert_eq!(self.verts, o.verts, "content states over different vertex sets");
    }

    /// Rebuilds every entry from its full value under a new scalar
    /// component. `f` returns the new full value, or `None` to keep the
    /// entry as is. Sparse `⊤` entries are only visited when `visit_top`.
    pub(crate) fn transform(
        &mut self,
        phi_after: D,
        visit_top: bool,
        f: impl Fn(&Self, usize, usize, D) -> Option<D>,
    ) {
        let n = self.n();
        let mut out: Vec<(usize, usize, D)> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.structural(i, j) {
                    continue;
                }
                let sparse_top = self.cfg.mode == Mode::Sparse && self.stored(i, j).is_top();
                if sparse_top && !visit_top {
                    continue;
                }
                if let Some(v) = f(self, i, j, self.full(i, j)) {
                    out.push((i, j, v));
                }
            }
        }
        self.phi = phi_after;
        for (i, j, v) in out {
            let v = self.store_value(i, j, v);
            self.set(i, j, v);
        }
    }

    /// Resets rows and columns of `v` and `v⁺` to `⊤` and projects `v`
    /// everywhere else; `φ` becomes `phi_after`.
    pub(crate) fn kill(&mut self, v: Var, phi_after: D) {
        let hit = |s: &Self, k: usize| s.verts[k].base == Base::Var(v);
        self.transform(phi_after, false, |s, i, j, full| {
            if hit(s, i) || hit(s, j) {
                Some(D::top())
            } else if full.mentions(v) {
                Some(full.project(v))
            } else if s.cfg.mode == Mode::Sparse {
                // relaxing against the new φ still drops stale facts
                Some(full)
            } else {
                None
            }
        });
    }

    /// Adds `v` and `v⁺` right after the vertices of `after` (or at the end).
    pub(crate) fn add_base(&mut self, v: Var, after: Option<Var>) {
        let at = after
            .and_then(|a| {
                self.verts
                    .iter()
                    .rposition(|w| w.base == Base::Var(a))
                    .map(|k| k + 1)
            })
            .unwrap_or(self.n());
        let mut verts = self.verts.clone();
        verts.insert(at, Vertex::var(v).succ());
        verts.insert(at, Vertex::var(v));
        let mut s = Self::raw(self.phi.clone(), verts, self.ui.clone(), self.cfg);
        let map: Vec<usize> = (0..self.n()).map(|k| if k < at { k } else { k + 2 }).collect();
        for i in 0..self.n() {
            for j in 0..self.n() {
                s.set(map[i], map[j], self.stored(i, j).clone());
            }
        }
        *self = s;
    }

    /// Drops the vertices of `v` and projects `v` from every value.
    pub(crate) fn eliminate(&mut self, v: Var) {
        let phi_after = self.phi.project(v);
        self.kill(v, phi_after);
        let keep: Vec<usize> = (0..self.n())
            .filter(|&k| self.verts[k].base != Base::Var(v))
            .collect();
        if keep.len() == self.n() {
            return;
        }
        let verts = keep.iter().map(|&k| self.verts[k]).collect();
        let mut s = Self::raw(self.phi.clone(), verts, self.ui.clone(), self.cfg);
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                s.set(a, b, self.stored(i, j).clone());
            }
        }
        *self = s;
    }

    /// Pointwise combination on entries, with `top_absorbs` meaning that a
    /// sparse `⊤` on either side yields `⊤`.
    fn pointwise(
        &self,
        o: &Self,
        phi: D,
        top_absorbs: bool,
        f: impl Fn(&D, &D) -> D,
    ) -> Self {
        self.same_shape(o);
        let n = self.n();
        let mut s = Self::raw(phi, self.verts.clone(), self.ui.clone(), self.cfg);
        for i in 0..n {
            for j in 0..n {
                if self.structural(i, j) {
                    continue;
                }
                let v = match self.cfg.mode {
                    Mode::Naive => f(self.stored(i, j), o.stored(i, j)),
                    Mode::Sparse => {
                        let (a, b) = (self.stored(i, j), o.stored(i, j));
                        if top_absorbs && (a.is_top() || b.is_top()) {
                            if a.is_bottom() {
                                b.clone()
                            } else if b.is_bottom() {
                                a.clone()
                            } else {
                                D::top()
                            }
                        } else {
                            f(a, b)
                        }
                    }
                };
                s.set(i, j, v);
            }
        }
        s
    }

    /// Least upper bound, normalized.
    pub fn join(&self, o: &Self) -> Result<Self, NormalizeError> {
        if self.is_bottom() {
            return Ok(o.clone());
        }
        if o.is_bottom() {
            return Ok(self.clone());
        }
        let phi = self.phi.join(&o.phi);
        let mut s = match self.cfg.mode {
            Mode::Naive => self.pointwise(o, phi, false, |a, b| a.join(b)),
            Mode::Sparse => {
                let mut s = self.pointwise(o, phi, true, |_, _| D::top());
                let n = self.n();
                for i in 0..n {
                    for j in 0..n {
                        let (a, b) = (self.stored(i, j), o.stored(i, j));
                        if self.structural(i, j) || a.is_top() || b.is_top() {
                            continue;
                        }
                        let v = self.full(i, j).join(&o.full(i, j));
                        let v = s.store_value(i, j, v);
                        s.set(i, j, v);
                    }
                }
                s
            }
        };
        s.normalize()?;
        Ok(s)
    }

    /// Greatest lower bound, normalized.
    pub fn meet(&self, o: &Self) -> Result<Self, NormalizeError> {
        let phi = self.phi.meet(&o.phi);
        let mut s = self.pointwise(o, phi, false, |a, b| a.meet(b));
        s.normalize()?;
        Ok(s)
    }

    /// Extrapolation at loop heads. Not normalized; only the boundary
    /// constraints are re-injected.
    pub fn widen(&self, o: &Self) -> Self {
        if self.is_bottom() {
            return o.clone();
        }
        if o.is_bottom() {
            return self.clone();
        }
        let phi = self.phi.widen(&o.phi);
        let mut s = self.pointwise(o, phi, true, |a, b| a.widen(b));
        if s.cfg.mode == Mode::Naive {
            let n = s.n();
            for i in 0..n {
                for j in 0..n {
                    if s.structural(i, j) {
                        continue;
                    }
                    let v = s.stored(i, j).meet_lazy(&s.boundary(i, j));
                    s.set(i, j, v);
                }
            }
        }
        s
    }

    /// Pointwise order on full values.
    pub fn leq(&self, o: &Self) -> bool {
        self.same_shape(o);
        if self.is_bottom() {
            return true;
        }
        if o.is_bottom() || !self.phi.leq(&o.phi) {
            return false;
        }
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                if self.structural(i, j) {
                    continue;
                }
                let (a, b) = (self.stored(i, j), o.stored(i, j));
                let ok = match self.cfg.mode {
                    Mode::Naive => a.leq(b) || a.meet(&self.cell_context(i, j)).leq(b),
                    Mode::Sparse => {
                        b.is_top() && o.lt(i, j) != Decided::False || a.is_bottom() || {
                            let (x, y) = (self.full(i, j), o.full(i, j));
                            x.leq(&y) || x.meet(&self.cell_context(i, j)).leq(&y)
                        }
                    }
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    /// Mutual order.
    pub fn equivalent(&self, o: &Self) -> bool {
        self.leq(o) && o.leq(self)
    }
}
