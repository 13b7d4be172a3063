use std::collections::HashSet;

use nalgebra::DMatrix;

use super::{enumerate_group, Permutation};
use crate::quantum::{DensityMatrix, UnitaryMatrix};
use crate::{Error, Result, C64};

/// Largest replica-space dimension materialised as a dense matrix.
pub const MAX_REPLICA_DIM: usize = 4096;

fn replica_dim(d: usize, n: usize) -> Result<usize> {
    let dim = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > MAX_REPLICA_DIM as u128 {
        return Err(Error::CapExceeded {
            what: "replica space dimension",
            requested: dim,
            cap: MAX_REPLICA_DIM as u128,
        });
    }
    Ok(dim as usize)
}

fn digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn undigits(ds: impl DoubleEndedIterator<Item = usize>, d: usize) -> usize {
    ds.rev().fold(0, |acc, x| acc * d + x)
}

/// Operator of `p` on `(C^d)^{⊗n}`: `|i_1..i_n> ↦ |i_{p(1)}..i_{p(n)}>`.
/// Replica 0 is the least significant base-`d` digit.
pub fn permutation_operator(p: &Permutation, d: usize) -> Result<UnitaryMatrix> {
    let n = p.len();
    let dim = replica_dim(d, n)?;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for col in 0..dim {
        let i = digits(col, d, n);
        let row = undigits((0..n).map(|k| i[p.apply(k)]), d);
        m[(row, col)] = C64::new(1.0, 0.0);
    }
    Ok(UnitaryMatrix::from_matrix_unchecked(m))
}

/// Haar moment `Σ_{π∈S_K} π̂ / Π_{i<K}(d+i)`, the normalised projector onto
/// the symmetric subspace.
pub fn haar_moment_operator(d: usize, k: usize) -> Result<DensityMatrix> {
    let dim = replica_dim(d, k)?;
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    for p in enumerate_group(k)? {
        acc += permutation_operator(&p, d)?.into_matrix();
    }
    let norm: f64 = (0..k).map(|i| (d + i) as f64).product();
    Ok(DensityMatrix::from_matrix_unchecked(
        acc / C64::new(norm, 0.0),
    ))
}

fn check_replicas(n: usize, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::invalid("boundary operator needs K >= 1"));
    }
    Ok(n + k)
}

/// Ket-side label of each of the `2m` replicas: `false` for the first
/// outcome string `z`, `true` for `z'`.
fn ket_labels(n: usize, k: usize) -> Vec<bool> {
    let m = n + k;
    (0..2 * m)
        .map(|j| !(j < n || (m..m + k).contains(&j)))
        .collect()
}

/// The measurement boundary operator on `2m = 2(n+K)` replicas of `C^{d_B}`:
/// `Σ_{z,z'} |z^n z'^K z^K z'^n><z^n z^K z'^K z'^n|`.
pub fn boundary_operator(n: usize, k: usize, d_b: usize) -> Result<DMatrix<C64>> {
    let m = check_replicas(n, k)?;
    let dim = replica_dim(d_b, 2 * m)?;
    let labels = ket_labels(n, k);
    let mut q = DMatrix::<C64>::zeros(dim, dim);
    for z in 0..d_b {
        for zp in 0..d_b {
            let bra = undigits((0..2 * m).map(|j| if j < m { z } else { zp }), d_b);
            let ket = undigits(labels.iter().map(|&l| if l { zp } else { z }), d_b);
            q[(ket, bra)] += C64::new(1.0, 0.0);
        }
    }
    Ok(q)
}

/// The cross swap `τ_K` exchanging replicas `n..m` with `m..m+K`.
fn tau(n: usize, k: usize) -> Permutation {
    let m = n + k;
    let mut mapping: Vec<usize> = (0..2 * m).collect();
    for j in 0..k {
        mapping.swap(n + j, m + j);
    }
    Permutation::new(mapping).expect("swap product is a bijection")
}

/// The permutations maximising the overlap with the boundary operator:
/// `(π_1 ⊕ π_2) ∘ τ_K` for all `π_1, π_2 ∈ S_m`.
pub fn boundary_set(n: usize, k: usize) -> Result<HashSet<Permutation>> {
    let m = check_replicas(n, k)?;
    let sm = enumerate_group(m)?;
    let t = tau(n, k);
    let mut out = HashSet::with_capacity(sm.len() * sm.len());
    for p1 in &sm {
        for p2 in &sm {
            out.insert(p1.direct_sum(p2).compose(&t));
        }
    }
    Ok(out)
}

/// `tr(σ̂† Q)` for the boundary operator on `d_B`-dimensional replicas.
pub fn q_inner_product(sigma: &Permutation, n: usize, k: usize, d_b: usize) -> Result<f64> {
    let m = check_replicas(n, k)?;
    if sigma.len() != 2 * m {
        return Err(Error::DimensionMismatch {
            expected: 2 * m,
            got: sigma.len(),
            context: "permutation degree vs 2(n+K)",
        });
    }
    let d_b = d_b as f64;
    let hit = boundary_set(n, k)?.contains(sigma);
    Ok(if hit { d_b * d_b } else { d_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::cycle_count;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_and_swap_operators() {
        let e = permutation_operator(&Permutation::identity(2), 2).unwrap();
        assert_eq!(e, UnitaryMatrix::identity(4));
        let s = permutation_operator(&Permutation::transposition(2, 0, 1).unwrap(), 2).unwrap();
        assert_eq!(s, UnitaryMatrix::swap());
    }

    #[test]
    fn operator_trace_counts_cycles() {
        for n in 1..=4 {
            for p in enumerate_group(n).unwrap() {
                let tr = permutation_operator(&p, 2).unwrap().matrix().trace().re;
                assert_abs_diff_eq!(tr, 2f64.powi(cycle_count(&p) as i32));
            }
        }
    }

    #[test]
    fn operator_is_anti_homomorphism() {
        let s3 = enumerate_group(3).unwrap();
        for a in &s3 {
            for b in &s3 {
                let lhs = permutation_operator(a, 2).unwrap().matrix()
                    * permutation_operator(b, 2).unwrap().matrix();
                let rhs = permutation_operator(&b.compose(a), 2).unwrap();
                assert_eq!(&lhs, rhs.matrix());
            }
        }
    }

    #[test]
    fn haar_moment_properties() {
        let r = haar_moment_operator(3, 1).unwrap();
        assert_abs_diff_eq!(r.matrix()[(1, 1)].re, 1.0 / 3.0, epsilon = 1e-15);
        let r = haar_moment_operator(2, 2).unwrap();
        assert_abs_diff_eq!(r.matrix().trace().re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.purity(), 1.0 / 3.0, epsilon = 1e-14);
        // Normalised projector: (3 ρ)^2 = 3 ρ.
        let p = r.matrix() * C64::new(3.0, 0.0);
        assert!((&p * &p - &p).norm() < 1e-12);
    }

    #[test]
    fn boundary_inner_products_single_pair() {
        let e = Permutation::identity(2);
        let s = Permutation::transposition(2, 0, 1).unwrap();
        assert_eq!(q_inner_product(&e, 0, 1, 3).unwrap(), 3.0);
        assert_eq!(q_inner_product(&s, 0, 1, 3).unwrap(), 9.0);
    }

    fn brute_q(sigma: &Permutation, n: usize, k: usize, d_b: usize) -> f64 {
        let q = boundary_operator(n, k, d_b).unwrap();
        let op = permutation_operator(sigma, d_b).unwrap();
        (op.matrix().adjoint() * q).trace().re
    }

    #[test]
    fn boundary_set_matches_explicit_trace() {
        for (n, k) in [(0, 1), (1, 1), (0, 2), (2, 1), (1, 2), (0, 3)] {
            let set = boundary_set(n, k).unwrap();
            let m = n + k;
            assert_eq!(set.len() as u128, crate::perm::factorial(m).pow(2));
            for sigma in enumerate_group(2 * m).unwrap() {
                let expect = brute_q(&sigma, n, k, 2);
                let got = q_inner_product(&sigma, n, k, 2).unwrap();
                assert_eq!(got, expect, "sigma={sigma} n={n} k={k}");
            }
        }
    }

    #[test]
    fn n1_k1_members_are_tau_times_blocks() {
        let t = tau(1, 1);
        for p1 in enumerate_group(2).unwrap() {
            for p2 in enumerate_group(2).unwrap() {
                let op = permutation_operator(&t, 2).unwrap().matrix()
                    * permutation_operator(&p1.direct_sum(&p2), 2)
                        .unwrap()
                        .matrix();
                let q = boundary_operator(1, 1, 2).unwrap();
                assert_abs_diff_eq!((op.adjoint() * q).trace().re, 4.0);
            }
        }
    }
}
