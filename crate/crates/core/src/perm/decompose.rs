use serde::{Deserialize, Serialize};

use super::Permutation;
use crate::{Error, Result};

/// `σ = ω ∘ (π_1 ⊕ π_2)` with `ω` a product of `r` disjoint swaps between the
/// first and last `m` indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub omega: Permutation,
    pub pi1: Permutation,
    pub pi2: Permutation,
    pub r: usize,
}

impl Decomposition {
    pub fn recompose(&self) -> Permutation {
        self.omega.compose(&self.pi1.direct_sum(&self.pi2))
    }
}

/// Split `sigma ∈ S_{2m}` into cross-block swaps and block permutations.
/// Crossing indices are paired in increasing order, which makes the
/// decomposition unique.
pub fn decompose_permutation(sigma: &Permutation, m: usize) -> Result<Decomposition> {
    if sigma.len() != 2 * m {
        return Err(Error::DimensionMismatch {
            expected: 2 * m,
            got: sigma.len(),
            context: "permutation degree vs 2m",
        });
    }
    let image_first: Vec<usize> = (0..m).map(|i| sigma.apply(i)).collect();
    let leaves: Vec<usize> = (0..m).filter(|j| !image_first.contains(j)).collect();
    let mut enters: Vec<usize> = image_first.iter().copied().filter(|&j| j >= m).collect();
    enters.sort_unstable();
    let mut omega: Vec<usize> = (0..2 * m).collect();
    for (&a, &b) in leaves.iter().zip(&enters) {
        omega.swap(a, b);
    }
    let omega = Permutation::new(omega)?;
    let block = omega.compose(sigma);
    let pi1 = Permutation::new(block.mapping()[..m].to_vec())?;
    let pi2 = Permutation::new(block.mapping()[m..].iter().map(|v| v - m).collect())?;
    Ok(Decomposition {
        omega,
        pi1,
        pi2,
        r: leaves.len(),
    })
}
