//! Orderings of segment bounds that a partitioning analysis of `init_rand_m`
//! has to tell apart.
//!
//! The symbols are `0`, `n` and `i_k`, `i_k⁺` for each cursor. An ordering
//! is a weak order, written as its equivalence classes in increasing order.
//! It is feasible when `0 ≤ n`, `0 ≤ i_k ≤ n`, and every `p⁺` sits in the
//! class right after `p`, since no integer lies strictly between `p` and
//! `p + 1`.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OrderingProblem {
    pub m: usize,
    /// Also track `0⁺`, the bound of the first element.
    pub distinguish_zero: bool,
}

impl OrderingProblem {
    pub fn new(m: usize, distinguish_zero: bool) -> OrderingProblem {
        assert!(m >= 1, "at least one cursor");
        OrderingProblem { m, distinguish_zero }
    }

    /// Symbol names in insertion order.
    pub fn symbols(&self) -> Vec<String> {
        let mut s = vec!["0".to_string(), "n".to_string()];
        if self.distinguish_zero {
            s.push("0+".into());
        }
        for k in 1..=self.m {
            s.push(format!("i{k}"));
            s.push(format!("i{k}+"));
        }
        s
    }

    fn constraints(&self) -> Vec<Rule> {
        const ZERO: usize = 0;
        const N: usize = 1;
        let mut r = vec![Rule::Le(ZERO, N)];
        let mut next = 2;
        if self.distinguish_zero {
            r.push(Rule::Succ(ZERO, next));
            next += 1;
        }
        for _ in 0..self.m {
            r.extend([Rule::Le(ZERO, next), Rule::Le(next, N), Rule::Succ(next, next + 1)]);
            next += 2;
        }
        r
    }
}

#[derive(Clone, Copy, Debug)]
enum Rule {
    Le(usize, usize),
    /// The second symbol is in the class right after the first.
    Succ(usize, usize),
}

impl Rule {
    fn holds(self, rank: &[u8]) -> bool {
        let known = |a: usize| a < rank.len();
        match self {
            Rule::Le(a, b) => !known(a) || !known(b) || rank[a] <= rank[b],
            Rule::Succ(a, b) => !known(a) || !known(b) || rank[b] == rank[a] + 1,
        }
    }
}

/// A feasible ordering: the class rank of each symbol, ranks contiguous from
/// zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ordering {
    pub rank: Vec<u8>,
}

impl Ordering {
    pub fn classes(&self) -> usize {
        self.rank.iter().max().map_or(0, |&r| r as usize + 1)
    }

    pub fn display<'a>(&'a self, prob: &OrderingProblem) -> impl fmt::Display + 'a {
        Shown(self, prob.symbols())
    }
}

struct Shown<'a>(&'a Ordering, Vec<String>);

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for c in 0..self.0.classes() {
            let members: Vec<&str> = (0..self.0.rank.len())
                .filter(|&s| self.0.rank[s] as usize == c)
                .map(|s| self.1[s].as_str())
                .collect();
            if c > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{{{}}}", members.join(", "))?;
        }
        f.write_str("]")
    }
}

/// Every way of placing one more symbol: into an existing class, or as a
/// new class in any gap.
fn insertions(rank: &[u8]) -> impl Iterator<Item = Vec<u8>> + '_ {
    let classes = rank.iter().max().map_or(0, |&r| r + 1);
    let join = (0..classes).map(move |c| {
        let mut r = rank.to_vec();
        r.push(c);
        r
    });
    let split = (0..=classes).map(move |g| {
        let mut r: Vec<u8> = rank.iter().map(|&x| if x >= g { x + 1 } else { x }).collect();
        r.push(g);
        r
    });
    join.chain(split)
}

/// All feasible orderings, built by inserting symbols one at a time and
/// discarding placements that break a constraint.
pub fn orderings(prob: &OrderingProblem) -> BTreeSet<Ordering> {
    let rules = prob.constraints();
    let mut cur: BTreeSet<Vec<u8>> = [vec![0u8]].into_iter().collect();
    for _ in 1..prob.symbols().len() {
        let mut next = BTreeSet::new();
        for r in &cur {
            for cand in insertions(r) {
                if rules.iter().all(|rule| rule.holds(&cand)) {
                    next.insert(cand);
                }
            }
        }
        cur = next;
    }
    cur.into_iter().map(|rank| Ordering { rank }).collect()
}

pub fn count_orderings(prob: &OrderingProblem) -> u64 {
    orderings(prob).len() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts distinct order patterns of concrete integer valuations.
    fn by_values(prob: &OrderingProblem) -> usize {
        let m = prob.m;
        let top = 2 * m as i64 + 3;
        let mut pats = BTreeSet::new();
        for n in 0..=top {
            let mut iv = vec![0i64; m];
            loop {
                let mut vals = vec![0, n];
                if prob.distinguish_zero {
                    vals.push(1);
                }
                for &i in &iv {
                    vals.extend([i, i + 1]);
                }
                let mut sorted = vals.clone();
                sorted.sort();
                sorted.dedup();
                let pat: Vec<usize> = vals.iter().map(|v| sorted.binary_search(v).unwrap()).collect();
                pats.insert(pat);
                let mut k = 0;
                while k < m && iv[k] == n {
                    iv[k] = 0;
                    k += 1;
                }
                if k == m {
                    break;
                }
                iv[k] += 1;
            }
        }
        pats.len()
    }

    #[test]
    fn single_cursor_table() {
        let p = OrderingProblem::new(1, false);
        let shown: BTreeSet<String> = orderings(&p).iter().map(|o| o.display(&p).to_string()).collect();
        let want = [
            "[{0, n, i1}, {i1+}]",
            "[{0}, {n, i1}, {i1+}]",
            "[{0, i1}, {n, i1+}]",
            "[{0}, {i1}, {n, i1+}]",
            "[{0, i1}, {i1+}, {n}]",
            "[{0}, {i1}, {i1+}, {n}]",
        ];
        assert_eq!(shown, want.iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn agrees_with_integer_valuations() {
        for m in 1..=3 {
            for dz in [false, true] {
                let p = OrderingProblem::new(m, dz);
                assert_eq!(count_orderings(&p) as usize, by_values(&p), "m={m} dz={dz}");
            }
        }
    }

    #[test]
    fn small_progressions() {
        let c = |m, dz| count_orderings(&OrderingProblem::new(m, dz));
        assert_eq!([c(1, false), c(2, false), c(3, false)], [6, 30, 222]);
        assert_eq!([c(1, true), c(2, true), c(3, true)], [9, 45, 333]);
    }
}
