//! Normalization: the fixpoint of the four closure rules.
//!
//! 1. `ψij ⊑ ψik ⊔ ψkj`, applied in the safe form
//!    `ψij := (ψij ⊓ ψik) ⊔ (ψij ⊓ ψkj)`.
//! 2. `ψij ⊑ φ ⊓ ⟦i < j⟧`.
//! 3. If `φ ⊨ i < j` then `φ ⊑ ∃U.ψij`.
//! 4. If `ψij = ⊥` then `φ ⊑ ⟦i ≥ j⟧`.

use std::collections::VecDeque;

use super::{implies_decided, meet_decided, ContentState, Decided, Mode};
use crate::relax::relax_value;
use crate::scalar::ScalarDomain;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error("normalization exceeded its budget of {budget} descending steps")]
    Budget { budget: usize },
}

/// Work done by one normalization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NormStats {
    /// Strictly descending entry updates.
    pub steps: usize,
    /// Scalar component refinements.
    pub phi_updates: usize,
}

struct Queue {
    q: VecDeque<(usize, usize)>,
    queued: Vec<bool>,
    n: usize,
}

impl Queue {
    fn push(&mut self, i: usize, j: usize) {
        let k = i * self.n + j;
        if !self.queued[k] {
            self.queued[k] = true;
            self.q.push_back((i, j));
        }
    }

    fn pop(&mut self) -> Option<(usize, usize)> {
        let (i, j) = self.q.pop_front()?;
        self.queued[i * self.n + j] = false;
        Some((i, j))
    }
}

impl<D: ScalarDomain> ContentState<D> {
    /// Step budget for one normalization: entries times squared universe.
    pub fn budget(&self) -> usize {
        let u = self.cfg.scalars + self.ui.len() + 2;
        (self.n() * self.n() * u * u).max(64) * self.cfg.budget_factor.max(1)
    }

    /// Brings the state to normal form.
    pub fn normalize(&mut self) -> Result<NormStats, NormalizeError> {
        let r = self.normalize_inner();
        if let Ok(st) = &r {
            crate::engine::count_norm_steps(st.steps);
        }
        r
    }

    fn normalize_inner(&mut self) -> Result<NormStats, NormalizeError> {
        let mut stats = NormStats::default();
        if self.phi.is_bottom() {
            self.make_bottom();
            return Ok(stats);
        }
        let n = self.n();
        let budget = self.budget();
        let mut queue = Queue {
            q: VecDeque::new(),
            queued: vec![false; n * n],
            n,
        };
        for i in 0..n {
            for j in 0..n {
                if !self.structural(i, j) {
                    queue.push(i, j);
                }
            }
        }
        loop {
            self.boundary_pass(&mut queue, &mut stats, budget)?;
            self.closure_pass(&mut queue, &mut stats, budget)?;
            match self.lift_pass() {
                None => {
                    self.make_bottom();
                    return Ok(stats);
                }
                Some(false) => return Ok(stats),
                Some(true) => stats.phi_updates += 1,
            }
        }
    }

    fn descend(
        &mut self,
        i: usize,
        j: usize,
        v: D,
        queue: &mut Queue,
        stats: &mut NormStats,
        budget: usize,
    ) -> Result<(), NormalizeError> {
        self.set(i, j, v);
        stats.steps += 1;
        if stats.steps > budget {
            return Err(NormalizeError::Budget { budget });
        }
        queue.push(i, j);
        let n = self.n();
        for q in 0..n {
            if self.rows[j].get(q) {
                queue.push(i, q);
            }
        }
        for p in 0..n {
            if self.cols[i].get(p) {
                queue.push(p, j);
            }
        }
        Ok(())
    }

    /// Rule 2; in sparse mode only empty boundaries are materialized.
    fn boundary_pass(
        &mut self,
        queue: &mut Queue,
        stats: &mut NormStats,
        budget: usize,
    ) -> Result<(), NormalizeError> {
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                if self.structural(i, j) {
                    continue;
                }
                let e = self.stored(i, j);
                if e.is_bottom() {
                    continue;
                }
                let lt = self.lt(i, j);
                let new = match self.cfg.mode {
                    Mode::Naive => {
                        let b = meet_decided(&self.phi, lt);
                        if e.leq(&b) {
                            continue;
                        }
                        e.meet(&b)
                    }
                    Mode::Sparse => {
                        if !self.full(i, j).is_bottom() {
                            continue;
                        }
                        D::bottom()
                    }
                };
                self.descend(i, j, new, queue, stats, budget)?;
            }
        }
        Ok(())
    }

    /// Rule 1 to saturation.
    fn closure_pass(
        &mut self,
        queue: &mut Queue,
        stats: &mut NormStats,
        budget: usize,
    ) -> Result<(), NormalizeError> {
        let sparse = self.cfg.mode == Mode::Sparse;
        while let Some((i, j)) = queue.pop() {
            if self.structural(i, j) {
                continue;
            }
            let mids: Vec<usize> = self.rows[i]
                .and_iter(&self.cols[j])
                .filter(|&k| k != i && k != j)
                .collect();
            for k in mids {
                let cur = self.stored(i, j);
                if cur.is_bottom() {
                    break;
                }
                let (ik, kj) = (self.stored(i, k), self.stored(k, j));
                if cur.leq(ik) || cur.leq(kj) {
                    continue;
                }
                let mut new = cur.meet(ik).join(&cur.meet(kj));
                if sparse {
                    new = relax_value(&self.phi, &new, self.lt(i, j), &self.ui, self.cfg.relax);
                }
                if cur.leq(&new) {
                    continue;
                }
                if sparse && meet_decided(&self.phi, self.lt(i, j)).meet(&new).is_bottom() {
                    new = D::bottom();
                }
                self.descend(i, j, new, queue, stats, budget)?;
            }
        }
        Ok(())
    }

    /// Rules 3 and 4. Returns `None` when `φ` becomes `⊥`, otherwise
    /// whether `φ` changed.
    fn lift_pass(&mut self) -> Option<bool> {
        let n = self.n();
        let mut phi = self.phi.clone();
        for i in 0..n {
            for j in 0..n {
                if self.structural(i, j) {
                    continue;
                }
                let e = self.stored(i, j);
                let lt = self.lt(i, j);
                if e.is_bottom() {
                    let ge = match lt {
                        Decided::True => Decided::False,
                        Decided::False => Decided::True,
                        Decided::Cons(c) => Decided::Cons(c.negate()),
                    };
                    phi = meet_decided(&phi, ge);
                } else if !e.is_top() && implies_decided(&phi, lt) {
                    let lifted = e.project_all(&self.ui);
                    if !phi.leq(&lifted) {
                        phi = phi.meet(&lifted);
                    }
                }
                if phi.is_bottom() {
                    return None;
                }
            }
        }
        if self.phi.leq(&phi) {
            return Some(false);
        }
        self.phi = phi;
        Some(true)
    }
}
