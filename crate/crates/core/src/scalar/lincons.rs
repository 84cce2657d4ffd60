//! Linear constraints `k·x ⋈ m` with exact integer coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::var::Var;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Ge,
    Gt,
    Eq,
}

/// A linear constraint `Σ k_v·v  rel  bound`.
///
/// Constructors canonicalize: strict inequalities become non-strict over the
/// integers, and coefficients are divided by their gcd (rounding the bound
/// up for `≥`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinCons {
    terms: BTreeMap<Var, BigInt>,
    bound: BigInt,
    rel: Rel,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinConsError {
    #[error("constraint has no nonzero coefficient")]
    Trivial,
}

impl LinCons {
    pub fn new<I>(terms: I, rel: Rel, bound: impl Into<BigInt>) -> Result<LinCons, LinConsError>
    where
        I: IntoIterator<Item = (Var, BigInt)>,
    {
        let mut map: BTreeMap<Var, BigInt> = BTreeMap::new();
        for (v, k) in terms {
            *map.entry(v).or_insert_with(BigInt::zero) += k;
        }
        map.retain(|_, k| !k.is_zero());
        if map.is_empty() {
            return Err(LinConsError::Trivial);
        }
        let mut c = LinCons {
            terms: map,
            bound: bound.into(),
            rel,
        };
        c.canonicalize();
        Ok(c)
    }

    /// Convenience constructor from small integer coefficients.
    pub fn from_ints(terms: &[(Var, i64)], rel: Rel, bound: i64) -> Result<LinCons, LinConsError> {
        LinCons::new(terms.iter().map(|&(v, k)| (v, BigInt::from(k))), rel, bound)
    }

    /// Builds `Σ k_v·v ≥ m` from rational data, scaling to integers.
    pub fn from_rationals(
        terms: &BTreeMap<Var, BigRational>,
        rel: Rel,
        bound: &BigRational,
    ) -> Result<LinCons, LinConsError> {
        let mut lcm = BigInt::one();
        for q in terms.values().chain(std::iter::once(bound)) {
            lcm = lcm.lcm(q.denom());
        }
        let scale = BigRational::from_integer(lcm);
        let ints = terms
            .iter()
            .map(|(v, q)| (*v, (q * &scale).to_integer()))
            .collect::<Vec<_>>();
        LinCons::new(ints, rel, (bound * &scale).to_integer())
    }

    fn canonicalize(&mut self) {
        if self.rel == Rel::Gt {
            self.rel = Rel::Ge;
            self.bound += 1;
        }
        let g = self
            .terms
            .values()
            .fold(BigInt::zero(), |acc, k| acc.gcd(k));
        if g.is_one() {
            return;
        }
        match self.rel {
            Rel::Ge => {
                self.bound = self.bound.div_ceil(&g);
            }
            Rel::Eq => {
                // an infeasible equality keeps its unreduced form
                if !(&self.bound % &g).is_zero() {
                    return;
                }
                self.bound = &self.bound / &g;
            }
            Rel::Gt => unreachable!(),
        }
        for k in self.terms.values_mut() {
            *k = &*k / &g;
        }
    }

    pub fn terms(&self) -> &BTreeMap<Var, BigInt> {
        &self.terms
    }

    pub fn bound(&self) -> &BigInt {
        &self.bound
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn coeff(&self, v: Var) -> BigInt {
        self.terms.get(&v).cloned().unwrap_or_default()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.terms.keys().copied()
    }

    pub fn mentions(&self, v: Var) -> bool {
        self.terms.contains_key(&v)
    }

    /// Splits an equality into its two inequalities.
    pub fn as_inequalities(&self) -> Vec<LinCons> {
        match self.rel {
            Rel::Ge | Rel::Gt => vec![self.clone()],
            Rel::Eq => {
                let neg = self.terms.iter().map(|(v, k)| (*v, -k.clone()));
                vec![
                    LinCons::new(self.terms.clone(), Rel::Ge, self.bound.clone())
                        .expect("nonzero terms"),
                    LinCons::new(neg, Rel::Ge, -self.bound.clone()).expect("nonzero terms"),
                ]
            }
        }
    }

    /// Evaluates the constraint at an integer point; unbound variables read as 0.
    pub fn holds_at(&self, value: impl Fn(Var) -> Option<i64>) -> Option<bool> {
        let mut lhs = BigInt::zero();
        for (v, k) in &self.terms {
            lhs += k * BigInt::from(value(*v)?);
        }
        Some(match self.rel {
            Rel::Ge => lhs >= self.bound,
            Rel::Gt => lhs > self.bound,
            Rel::Eq => lhs == self.bound,
        })
    }
}

impl fmt::Display for LinCons {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|(v, _)| v.name());
        for (n, (v, k)) in terms.into_iter().enumerate() {
            let neg = k.is_negative();
            let mag = k.abs();
            match (n, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}{v}")?;
            }
        }
        let op = match self.rel {
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Eq => "=",
        };
        write!(f, " {op} {}", self.bound)
    }
}

impl fmt::Debug for LinCons {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟦{self}⟧")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    #[test]
    fn gcd_canonicalization_rounds_up() {
        let c = LinCons::from_ints(&[(v("x"), 2), (v("y"), 4)], Rel::Ge, 5).unwrap();
        assert_eq!(c.to_string(), "x + 2y >= 3");
    }

    #[test]
    fn strict_becomes_nonstrict() {
        let c = LinCons::from_ints(&[(v("x"), 1), (v("y"), -1)], Rel::Gt, 0).unwrap();
        assert_eq!(c.rel(), Rel::Ge);
        assert_eq!(c.bound(), &BigInt::from(1));
    }

    #[test]
    fn trivial_rejected() {
        assert_eq!(
            LinCons::from_ints(&[(v("x"), 1), (v("x"), -1)], Rel::Ge, 0),
            Err(LinConsError::Trivial)
        );
    }

    #[test]
    fn rationals_scaled() {
        let mut t = BTreeMap::new();
        t.insert(v("x"), BigRational::from_integer(1.into()));
        t.insert(v("z"), BigRational::new(1.into(), 2.into()));
        let c = LinCons::from_rationals(&t, Rel::Ge, &BigRational::from_integer(8.into())).unwrap();
        assert_eq!(c.to_string(), "2x + z >= 16");
    }
}
