//! Symmetric-group calculus: permutations, exact Weingarten functions,
//! replica permutation operators, and the chain partition sums that govern
//! Haar-averaged (pseudo) frame potentials.

mod chain;
mod decompose;
mod operators;
mod weingarten;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use chain::{lower_bound_1dw, stat_model_sum_approx, stat_model_sum_exact};
pub use decompose::{decompose_permutation, Decomposition};
pub use operators::{
    boundary_operator, boundary_set, haar_moment_operator, permutation_operator, q_inner_product,
};
pub use weingarten::{weingarten_exact, WeingartenTable};

/// Largest `n` accepted by [`enumerate_group`].
pub const MAX_GROUP_N: usize = 8;

/// A permutation in one-line notation: index `i` maps to `mapping[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &v in &mapping {
            if v >= n || seen[v] {
                return Err(Error::invalid(format!("{mapping:?} is not a bijection")));
            }
            seen[v] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    /// The transposition of `a` and `b` in `S_n`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::IndexOutOfRange {
                what: "transposition",
                index: a.max(b),
                size: n,
            });
        }
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.swap(a, b);
        Ok(Self { mapping })
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Function composition `self ∘ rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Permutation) -> Permutation {
        assert_eq!(
            self.len(),
            rhs.len(),
            "composing permutations of different degree"
        );
        Permutation {
            mapping: rhs.mapping.iter().map(|&j| self.mapping[j]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.mapping.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { mapping: inv }
    }

    /// Block-diagonal sum: `self` on the first indices, `other` shifted after.
    pub fn direct_sum(&self, other: &Permutation) -> Permutation {
        let n = self.len();
        let mut mapping = self.mapping.clone();
        mapping.extend(other.mapping.iter().map(|&v| v + n));
        Permutation { mapping }
    }

    /// Lexicographic rank in `S_n`, matching the order of [`enumerate_group`].
    pub fn rank(&self) -> usize {
        let n = self.len();
        let mut rank = 0;
        for i in 0..n {
            let smaller = self.mapping[i + 1..]
                .iter()
                .filter(|&&v| v < self.mapping[i])
                .count();
            rank = rank * (n - i) + smaller;
        }
        rank
    }

    /// Sizes of the cycles, in order of their smallest element.
    pub fn cycle_type(&self) -> Vec<usize> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.mapping[j];
                len += 1;
            }
            out.push(len);
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.mapping.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

pub fn cycle_count(p: &Permutation) -> usize {
    p.cycle_type().len()
}

/// All `n!` elements of `S_n` in lexicographic order.
pub fn enumerate_group(n: usize) -> Result<Vec<Permutation>> {
    if n > MAX_GROUP_N {
        return Err(Error::CapExceeded {
            what: "symmetric group degree",
            requested: n as u128,
            cap: MAX_GROUP_N as u128,
        });
    }
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(factorial(n) as usize);
    loop {
        out.push(Permutation {
            mapping: cur.clone(),
        });
        if !next_permutation(&mut cur) {
            return Ok(out);
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub(crate) fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn group_sizes_and_order() {
        assert_eq!(enumerate_group(0).unwrap().len(), 1);
        assert_eq!(enumerate_group(1).unwrap(), vec![Permutation::identity(1)]);
        assert_eq!(enumerate_group(2).unwrap().len(), 2);
        let s4 = enumerate_group(4).unwrap();
        assert_eq!(s4.len(), 24);
        assert!(s4.windows(2).all(|w| w[0] < w[1]));
        for (i, p) in s4.iter().enumerate() {
            assert_eq!(p.rank(), i);
        }
        assert!(matches!(enumerate_group(9), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn cycle_counts() {
        assert_eq!(cycle_count(&Permutation::identity(5)), 5);
        assert_eq!(
            cycle_count(&Permutation::transposition(3, 0, 2).unwrap()),
            2
        );
        assert_eq!(cycle_count(&Permutation::new(vec![1, 2, 0]).unwrap()), 1);
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
    }

    fn perm_strategy(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|m| Permutation::new(m).unwrap())
    }

    proptest! {
        #[test]
        fn inverse_composes_to_identity(p in perm_strategy(6)) {
            prop_assert!(p.compose(&p.inverse()).is_identity());
            prop_assert!(p.inverse().compose(&p).is_identity());
        }

        #[test]
        fn conjugation_preserves_cycles(p in perm_strategy(6), q in perm_strategy(6)) {
            let c = q.compose(&p).compose(&q.inverse());
            prop_assert_eq!(cycle_count(&c), cycle_count(&p));
        }

        #[test]
        fn cycle_type_sums_to_degree(p in perm_strategy(7)) {
            prop_assert_eq!(p.cycle_type().iter().sum::<usize>(), 7);
        }
    }
}
