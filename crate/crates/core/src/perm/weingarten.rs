use nalgebra::{DMatrix, DVector};

use super::{cycle_count, enumerate_group, Permutation};
use crate::{Error, Result};

/// Largest replica count accepted by [`weingarten_exact`].
pub const MAX_WEINGARTEN_N: usize = 6;

/// Exact unitary Weingarten function `Wg(σ; d)` on `S_n`, tabulated by
/// lexicographic rank.
#[derive(Debug, Clone)]
pub struct WeingartenTable {
    pub n: usize,
    pub d: f64,
    perms: Vec<Permutation>,
    wg: Vec<f64>,
}

impl WeingartenTable {
    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    /// `Wg(p)`
    pub fn get(&self, p: &Permutation) -> f64 {
        self.wg[p.rank()]
    }

    /// `Wg(σ⁻¹π)`
    pub fn between(&self, sigma: &Permutation, pi: &Permutation) -> f64 {
        self.get(&sigma.inverse().compose(pi))
    }

    /// Values in lexicographic order of the group.
    pub fn values(&self) -> &[f64] {
        &self.wg
    }
}

/// Gram matrix `G(σ,π) = d^{cycles(σ⁻¹π)}` over `perms`.
pub(crate) fn gram_matrix(perms: &[Permutation], d: f64) -> DMatrix<f64> {
    let n = perms.len();
    let inv: Vec<Permutation> = perms.iter().map(Permutation::inverse).collect();
    DMatrix::from_fn(n, n, |i, j| {
        d.powi(cycle_count(&inv[i].compose(&perms[j])) as i32)
    })
}

/// Weingarten values from inverting the Gram matrix. Requires `d > n − 1`.
pub fn weingarten_exact(n: usize, d: f64) -> Result<WeingartenTable> {
    if n > MAX_WEINGARTEN_N {
        return Err(Error::CapExceeded {
            what: "Weingarten replica count",
            requested: n as u128,
            cap: MAX_WEINGARTEN_N as u128,
        });
    }
    if !(d > n as f64 - 1.0) {
        return Err(Error::Singular("Weingarten Gram matrix requires d > n - 1"));
    }
    let perms = enumerate_group(n)?;
    let gram = gram_matrix(&perms, d);
    // Row of G^{-1} at the identity: Σ_π G(σ,π) Wg(π) = δ_{σ,e}.
    let mut rhs = DVector::zeros(perms.len());
    rhs[0] = 1.0;
    let wg = gram
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("Weingarten Gram matrix"))?;
    Ok(WeingartenTable {
        n,
        d,
        perms,
        wg: wg.iter().copied().collect(),
    })
}
