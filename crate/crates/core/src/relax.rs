//! Relaxation of content entries, and constraint resolution for linear
//! constraint sets.
//!
//! A relaxed entry `ψ̈` keeps only what `ψ` says beyond `φ ⊓ ⟦i < j⟧`, so
//! most entries of a sparse state are `⊤`. The full value is recovered as
//! `φ ⊓ ⟦i < j⟧ ⊓ ψ̈`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::content::{meet_decided, vertex_diff, Decided, Vertex};
use crate::scalar::{DiffCons, LinCons, Rel, ScalarDomain};
use crate::var::Var;

/// Which constraints of the closed entry survive relaxation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum RelaxMode {
    /// Constraints mentioning a segment variable or `idx`.
    #[default]
    Cheap,
    /// Constraints not implied by `φ ⊓ ⟦i < j⟧`.
    Exact,
}

/// A relaxed entry as an explicit constraint set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelaxedEntry {
    pub constraints: BTreeSet<LinCons>,
}

impl RelaxedEntry {
    /// The entry as a scalar value.
    pub fn value<D: ScalarDomain>(&self) -> D {
        self.constraints.iter().fold(D::top(), |d, c| d.assume(c))
    }
}

/// Relaxes `psi` given the boundary `lt` (the constraint `i < j`).
pub fn relax_value<D: ScalarDomain>(
    phi: &D,
    psi: &D,
    lt: Decided,
    ui: &[Var],
    mode: RelaxMode,
) -> D {
    if psi.is_bottom() {
        return D::bottom();
    }
    match mode {
        RelaxMode::Cheap => psi.restrict(&|c: &DiffCons| c.vars().any(|v| ui.contains(&v))),
        RelaxMode::Exact => {
            let ctx = meet_decided(phi, lt);
            psi.restrict(&|c: &DiffCons| !ctx.implies_diff(c))
        }
    }
}

/// `φ ⊙ ψ` for the entry `(i, j)`.
pub fn relax_dbm<D: ScalarDomain>(
    phi: &D,
    psi: &D,
    i: Vertex,
    j: Vertex,
    ui: &[Var],
    mode: RelaxMode,
) -> RelaxedEntry {
    let r = relax_value(phi, psi, vertex_diff(i, j, -1), ui, mode);
    RelaxedEntry {
        constraints: r.constraints().into_iter().collect(),
    }
}

/// Filters a constraint list against `φ ⊓ ⟦i < j⟧` without closing it
/// first, so consequences through the boundary are lost.
pub fn relax_unclosed<D: ScalarDomain>(
    phi: &D,
    cs: &[DiffCons],
    i: Vertex,
    j: Vertex,
) -> D {
    let ctx = meet_decided(phi, vertex_diff(i, j, -1));
    cs.iter()
        .filter(|c| !ctx.implies_diff(c))
        .fold(D::top(), |d, c| d.add_diff(*c))
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("`{0}` has no opposite-sign occurrence")]
    NotResolvable(Var),
}

/// Eliminates `v` between two inequalities where `v` occurs with opposite
/// signs. Equalities are read as `≥`.
pub fn resolve(c1: &LinCons, c2: &LinCons, v: Var) -> Result<LinCons, ResolveError> {
    let (k1, k2) = (c1.coeff(v), c2.coeff(v));
    if k1.is_zero() || k2.is_zero() || k1.is_positive() == k2.is_positive() {
        return Err(ResolveError::NotResolvable(v));
    }
    let ratio = -BigRational::new(k1, k2);
    let q = |k: &BigInt| BigRational::from_integer(k.clone());
    let mut terms: BTreeMap<Var, BigRational> = c1.terms().iter().map(|(x, k)| (*x, q(k))).collect();
    for (x, k) in c2.terms() {
        *terms.entry(*x).or_insert_with(BigRational::zero) += &ratio * q(k);
    }
    terms.retain(|_, k| !k.is_zero());
    let bound = q(c1.bound()) + &ratio * q(c2.bound());
    if terms.is_empty() {
        return Err(ResolveError::NotResolvable(v));
    }
    Ok(LinCons::from_rationals(&terms, Rel::Ge, &bound).expect("nonzero terms"))
}

/// `(sign, variable)`, with `true` for positive.
pub type SignedVar = (bool, Var);

/// State of the resolution closure.
#[derive(Clone, Debug, Default)]
pub struct ResolutionState {
    /// Sign pairs already resolved through.
    pub r: BTreeSet<SignedVar>,
    /// Accumulated interesting constraints.
    pub interesting: BTreeSet<LinCons>,
    /// Remaining constraints.
    pub rest: BTreeSet<LinCons>,
    pool: Vec<LinCons>,
}

fn sign_pairs(c: &LinCons) -> impl Iterator<Item = SignedVar> + '_ {
    c.terms().iter().map(|(v, k)| (k.is_positive(), *v))
}

impl ResolutionState {
    pub fn new(interesting: &[LinCons], other: &[LinCons]) -> ResolutionState {
        let split = |cs: &[LinCons]| -> BTreeSet<LinCons> {
            cs.iter().flat_map(|c| c.as_inequalities()).collect()
        };
        let interesting = split(interesting);
        let rest: BTreeSet<LinCons> = split(other).difference(&interesting).cloned().collect();
        let r = interesting.iter().flat_map(sign_pairs).collect();
        ResolutionState {
            r,
            interesting,
            pool: rest.iter().cloned().collect(),
            rest,
        }
    }

    /// One resolution round. Returns whether anything was added.
    pub fn step(&mut self) -> bool {
        let mut grew = false;
        for c in &self.pool {
            let hooks: Vec<Var> = c
                .terms()
                .iter()
                .filter(|(v, k)| self.r.contains(&(!k.is_positive(), **v)))
                .map(|(v, _)| *v)
                .collect();
            for v in hooks {
                for (s, w) in sign_pairs(c).filter(|p| p.1 != v) {
                    let new_pair = self.r.insert((s, w));
                    let new_cons = self.interesting.insert(c.clone());
                    grew |= new_pair || new_cons;
                }
            }
        }
        self.rest.retain(|c| !self.interesting.contains(c));
        grew
    }

    pub fn run(mut self) -> BTreeSet<LinCons> {
        while self.step() {}
        self.interesting
    }
}

/// Collects the constraints of `other` reachable by resolution from
/// `interesting`.
pub fn trans_star(interesting: &[LinCons], other: &[LinCons]) -> BTreeSet<LinCons> {
    ResolutionState::new(interesting, other).run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Dbm;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    fn ge(terms: &[(&str, i64)], m: i64) -> LinCons {
        let t: Vec<(Var, i64)> = terms.iter().map(|(n, k)| (v(n), *k)).collect();
        LinCons::from_ints(&t, Rel::Ge, m).unwrap()
    }

    fn lt(x: &str, y: &str) -> DiffCons {
        DiffCons::diff(v(x), v(y), -1)
    }

    fn eq(d: Dbm, x: &str, y: &str) -> Dbm {
        d.add_diff(DiffCons::diff(v(x), v(y), 0)).add_diff(DiffCons::diff(v(y), v(x), 0))
    }

    fn ui() -> Vec<Var> {
        vec![v("a"), Var::idx()]
    }

    #[test]
    fn resolve_worked_example() {
        let c1 = ge(&[("x", 1), ("y", 1)], 7);
        let c2 = ge(&[("z", 1), ("y", -2)], 2);
        let c3 = ge(&[("w", 1), ("y", 2)], 3);
        assert_eq!(resolve(&c1, &c2, v("y")).unwrap(), ge(&[("x", 2), ("z", 1)], 16));
        assert_eq!(resolve(&c1, &c3, v("y")), Err(ResolveError::NotResolvable(v("y"))));
        let d = resolve(&ge(&[("a", 1), ("y", -1)], 0), &ge(&[("y", 1), ("z", -1)], 0), v("y"));
        assert_eq!(d.unwrap(), ge(&[("a", 1), ("z", -1)], 0));
    }

    #[test]
    fn trans_star_worked_example() {
        let c0 = ge(&[("a", 1), ("y", -1)], 0);
        let c1 = ge(&[("y", 1), ("z", -1)], 0);
        let c2 = ge(&[("z", 1), ("w", 1)], 0);
        let c3 = ge(&[("x", 1), ("y", -1)], 0);
        let out = trans_star(&[c0.clone()], &[c1.clone(), c2.clone(), c3]);
        assert_eq!(out, [c0, c1, c2].into_iter().collect());
    }

    #[test]
    fn trans_star_trivial_cases() {
        assert!(trans_star(&[], &[ge(&[("b", 1)], 0)]).is_empty());
        let a = ge(&[("a", 1)], 0);
        assert_eq!(trans_star(&[a.clone()], &[ge(&[("b", 1)], 0)]), [a].into_iter().collect());
    }

    #[test]
    fn cheap_relaxation_keeps_closure_consequence() {
        // φ = x<y, ψkj = φ ⊓ k<j ∧ y=a
        let phi = Dbm::top().add_diff(lt("x", "y"));
        let psi = eq(phi.add_diff(lt("k", "j")), "y", "a");
        let (k, j) = (Vertex::var(v("k")), Vertex::var(v("j")));
        for mode in [RelaxMode::Cheap, RelaxMode::Exact] {
            let r: Dbm = relax_dbm(&phi, &psi, k, j, &ui(), mode).value();
            assert!(r.implies_diff(&lt("x", "a")), "{mode:?}");
            assert!(r.implies_diff(&DiffCons::diff(v("y"), v("a"), 0)));
            let back = phi.add_diff(lt("k", "j")).meet(&r);
            assert!(back.leq(&psi) && psi.leq(&back), "{mode:?}");
        }
    }

    #[test]
    fn boundary_only_entry_relaxes_to_top() {
        let phi = Dbm::top().add_diff(lt("x", "y"));
        let psi = phi.add_diff(lt("i", "j"));
        let (i, j) = (Vertex::var(v("i")), Vertex::var(v("j")));
        for mode in [RelaxMode::Cheap, RelaxMode::Exact] {
            assert!(relax_dbm(&phi, &psi, i, j, &ui(), mode).constraints.is_empty());
        }
    }

    #[test]
    fn relaxed_join_without_closure_loses_fact() {
        // φ = x<y; ψik ⊇ x<a, ψkj ⊇ y=a
        let phi = Dbm::top().add_diff(lt("x", "y"));
        let (i, k, j) = (Vertex::var(v("i")), Vertex::var(v("k")), Vertex::var(v("j")));
        let ik: Dbm = relax_unclosed(&phi, &[lt("i", "k"), lt("x", "a")], i, k);
        let a_eq_y = [lt("k", "j"), DiffCons::diff(v("y"), v("a"), 0), DiffCons::diff(v("a"), v("y"), 0)];
        let kj: Dbm = relax_unclosed(&phi, &a_eq_y, k, j);
        assert!(!ik.join(&kj).implies_diff(&lt("x", "a")));
        let psi_kj = eq(phi.add_diff(lt("k", "j")), "y", "a");
        let kj: Dbm = relax_value(&phi, &psi_kj, vertex_diff(k, j, -1), &ui(), RelaxMode::Cheap);
        assert!(ik.join(&kj).implies_diff(&lt("x", "a")));
    }
}
