//! Haar-averaged pseudo frame potentials as sums over chains of replica
//! permutations, one (or two) per time step.

use super::{boundary_set, cycle_count, enumerate_group, factorial, weingarten_exact, Permutation};
use crate::stats::NeumaierSum;
use crate::{Error, Result};

/// Term-count cap shared by both chain sums.
pub const MAX_CHAIN_TERMS: u128 = 100_000_000;

struct Chain {
    perms: Vec<Permutation>,
    /// `cycles(σ_i⁻¹ σ_j)`
    rel_cycles: Vec<Vec<u32>>,
    /// `tr(σ̂ Q)` on the ancilla replicas.
    q: Vec<f64>,
    d_a: f64,
}

fn replicas(n: i64, k: usize) -> Result<(usize, usize, usize)> {
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    let m = n + k as i64;
    if m < 1 {
        return Err(Error::invalid(format!("n + K = {m} must be positive")));
    }
    if m == 1 {
        // Replica-continued arguments collapse onto a single swap boundary.
        return Ok((1, 0, 1));
    }
    if n < 0 {
        return Err(Error::invalid(format!(
            "n = {n} must be non-negative when n + K > 1"
        )));
    }
    Ok((m as usize, n as usize, k))
}

fn check_dims(t: usize, d_a: usize, d_b: usize) -> Result<()> {
    if t == 0 || d_a == 0 || d_b == 0 {
        return Err(Error::invalid("t, d_A and d_B must be positive"));
    }
    Ok(())
}

fn check_terms(what: &'static str, base: u128, exponent: usize) -> Result<()> {
    let count = base.checked_pow(exponent as u32).unwrap_or(u128::MAX);
    if count > MAX_CHAIN_TERMS {
        return Err(Error::CapExceeded {
            what,
            requested: count,
            cap: MAX_CHAIN_TERMS,
        });
    }
    Ok(())
}

impl Chain {
    fn new(m: usize, n: usize, k: usize, d_a: usize, d_b: usize) -> Result<Self> {
        let perms = enumerate_group(2 * m)?;
        let inv: Vec<Permutation> = perms.iter().map(Permutation::inverse).collect();
        let rel_cycles = inv
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| cycle_count(&a.compose(b)) as u32)
                    .collect()
            })
            .collect();
        let set = boundary_set(n, k)?;
        let d_b = d_b as f64;
        let q = inv
            .iter()
            .map(|p| if set.contains(p) { d_b * d_b } else { d_b })
            .collect();
        Ok(Self {
            perms,
            rel_cycles,
            q,
            d_a: d_a as f64,
        })
    }

    fn len(&self) -> usize {
        self.perms.len()
    }

    /// `Σ_j d_A^{cycles(σ_i⁻¹σ_j)} v_j` for each `i`.
    fn contract_a(&self, v: &[f64]) -> Vec<f64> {
        self.rel_cycles
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .map(|(&c, x)| self.d_a.powi(c as i32) * x)
                    .collect::<NeumaierSum>()
                    .value()
            })
            .collect()
    }

    /// Final boundary `Σ_j d_A^{cycles(σ_j)} v_j`.
    fn close(&self, v: &[f64]) -> f64 {
        self.rel_cycles[0]
            .iter()
            .zip(v)
            .map(|(&c, x)| self.d_a.powi(c as i32) * x)
            .collect::<NeumaierSum>()
            .value()
    }
}

/// Exact Haar average of the pseudo frame potential `F^{(n,K)}` after `t`
/// steps: the double sum over `(σ_i, π_i) ∈ S_{2m}²` per step weighted by
/// `Wg(σ_i⁻¹π_i; d_A d_B)`, with `m = n + K ≤ 2`.
///
/// The chain is contracted step by step, which evaluates every one of the
/// `(2m)!^{2t}` terms without enumerating them individually.
pub fn stat_model_sum_exact(n: i64, k: usize, t: usize, d_a: usize, d_b: usize) -> Result<f64> {
    check_dims(t, d_a, d_b)?;
    let (m, n, k) = replicas(n, k)?;
    if 2 * m > 4 {
        return Err(Error::CapExceeded {
            what: "exact chain replicas",
            requested: 2 * m as u128,
            cap: 4,
        });
    }
    check_terms("exact chain terms", factorial(2 * m), 2 * t)?;
    let chain = Chain::new(m, n, k, d_a, d_b)?;
    let wg = weingarten_exact(2 * m, (d_a * d_b) as f64)?;
    let size = chain.len();
    let w: Vec<Vec<f64>> = (0..size)
        .map(|i| {
            let si = chain.perms[i].inverse();
            (0..size)
                .map(|j| wg.get(&si.compose(&chain.perms[j])))
                .collect()
        })
        .collect();
    // Pure input state: tr(σ̂† ρ^{⊗2m}) = 1 for every σ.
    let mut a = vec![1.0; size];
    let mut v = vec![0.0; size];
    for step in 0..t {
        if step > 0 {
            a = chain.contract_a(&v);
        }
        for (j, vj) in v.iter_mut().enumerate() {
            let s: NeumaierSum = (0..size).map(|i| w[i][j] * a[i]).collect();
            *vj = chain.q[j] * s.value();
        }
    }
    Ok(chain.close(&v))
}

/// Leading-order chain sum with `Wg(σ⁻¹π) → δ_{σπ} d^{-2m}`: one
/// permutation per step, `m = n + K ≤ 3`.
pub fn stat_model_sum_approx(n: i64, k: usize, t: usize, d_a: usize, d_b: usize) -> Result<f64> {
    check_dims(t, d_a, d_b)?;
    let (m, n, k) = replicas(n, k)?;
    if 2 * m > 6 {
        return Err(Error::CapExceeded {
            what: "approximate chain replicas",
            requested: 2 * m as u128,
            cap: 6,
        });
    }
    check_terms("approximate chain terms", factorial(2 * m), t)?;
    let chain = Chain::new(m, n, k, d_a, d_b)?;
    let wg_e = ((d_a * d_b) as f64).powi(-2 * m as i32);
    let mut v: Vec<f64> = chain.q.iter().map(|q| q * wg_e).collect();
    for _ in 1..t {
        let a = chain.contract_a(&v);
        v = a.iter().zip(&chain.q).map(|(x, q)| x * q * wg_e).collect();
    }
    Ok(chain.close(&v))
}

/// Three-term 1-domain-wall lower bound on the approximate chain sum:
///
/// `d^{-2mt} Γ^{2t} [d_B^t + d_B^{2t} F_H + d_B^{2t-1} (R − 1) F_H]`
///
/// with `Γ = Π_{i<m}(d_A + i)`, `F_H` the Haar frame potential of order `K`
/// on `d_A`, and `R − 1 = 1 + Σ_{r=1}^{K-1} C(K,r) Π_{j<r}(d_A+K-1-j)/(d_A+j)`.
/// `n` may be negative as long as `m = n + K ≥ 1`.
pub fn lower_bound_1dw(n: i64, k: usize, t: usize, d_a: usize, d_b: usize) -> Result<f64> {
    check_dims(t, d_a, d_b)?;
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    let m = n + k as i64;
    if m < 1 {
        return Err(Error::invalid(format!("n + K = {m} must be positive")));
    }
    let (da, db, tf) = (d_a as f64, d_b as f64, t as f64);
    let ln_gamma: f64 = (0..m).map(|i| (da + i as f64).ln()).sum();
    let f_haar: f64 = (0..k).map(|i| (i as f64 + 1.0) / (da + i as f64)).product();
    let mut r_minus_one = 1.0;
    let mut binom = 1.0;
    for r in 1..k {
        binom *= (k - r + 1) as f64 / r as f64;
        let ratio: f64 = (0..r)
            .map(|j| (da + (k - 1 - j) as f64) / (da + j as f64))
            .product();
        r_minus_one += binom * ratio;
    }
    let prefactor =
        (2.0 * tf * ln_gamma - 2.0 * m as f64 * tf * (da * db).ln() + 2.0 * tf * db.ln()).exp();
    Ok(prefactor * (db.powf(-tf) + f_haar + r_minus_one * f_haar / db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn theorem1(t: usize, da: f64, db: f64) -> f64 {
        let fh = 1.0 / da;
        let a = (da - 1.0) * (da * db - 1.0) / (da * da * db + 1.0);
        let lam = (da * da - 1.0) * db / (da * da * db * db - 1.0);
        a * lam.powi(t as i32) + da * da * (db + 1.0) / (da * da * db + 1.0) * fh
    }

    #[test]
    fn exact_first_order_matches_transfer_solution() {
        for (da, db) in [(2, 2), (2, 4), (4, 2), (3, 5)] {
            for t in 1..=4 {
                let got = stat_model_sum_exact(0, 1, t, da, db).unwrap();
                assert_relative_eq!(got, theorem1(t, da as f64, db as f64), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn exact_single_step_is_dt_value() {
        let (da, db) = (2.0, 2.0);
        let d2 = (da * db) * (da * db);
        let dt = db * (da * da - 1.0) / (d2 - 1.0) + da * da * (db * db - 1.0) / (d2 - 1.0) / da;
        assert_relative_eq!(
            stat_model_sum_exact(0, 1, 1, 2, 2).unwrap(),
            dt,
            max_relative = 1e-12
        );
    }

    #[test]
    fn approx_tracks_exact_at_large_dimension() {
        let exact = theorem1(2, 64.0, 4.0);
        let approx = stat_model_sum_approx(0, 1, 2, 64, 4).unwrap();
        assert!((approx / exact - 1.0).abs() < 0.02, "{approx} vs {exact}");
    }

    #[test]
    fn approx_relaxes_monotonically_at_large_dimension() {
        let vals: Vec<f64> = (1..=10)
            .map(|t| stat_model_sum_approx(0, 1, t, 64, 4).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]), "{vals:?}");
        let tail = (vals[9] - vals[8]).abs() / vals[9];
        assert!(tail < 1e-3, "{vals:?}");
    }

    #[test]
    fn approx_grows_slowly_at_small_dimension() {
        // The leading-order Weingarten weights are not normalised, so the
        // transfer matrix has spectral radius slightly above one.
        let vals: Vec<f64> = (1..=8)
            .map(|t| stat_model_sum_approx(0, 1, t, 4, 2).unwrap())
            .collect();
        assert!(vals[2] < vals[0] && vals[7] > vals[2], "{vals:?}");
    }

    #[test]
    fn bound_below_approx_sum() {
        for (n, k) in [(0i64, 1usize), (1, 1), (0, 2), (1, 2), (0, 3), (2, 1)] {
            for (da, db) in [(2, 2), (4, 2), (8, 4), (16, 2)] {
                for t in 2..=2 {
                    let lb = lower_bound_1dw(n, k, t, da, db).unwrap();
                    let ap = stat_model_sum_approx(n, k, t, da, db).unwrap();
                    assert!(
                        lb <= ap * (1.0 + 1e-12),
                        "n={n} k={k} da={da} db={db}: {lb} > {ap}"
                    );
                }
            }
        }
    }

    #[test]
    fn caps_enforced() {
        assert!(matches!(
            stat_model_sum_exact(1, 2, 1, 4, 4),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            stat_model_sum_exact(0, 2, 3, 4, 4),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            stat_model_sum_approx(0, 2, 6, 4, 4),
            Err(Error::CapExceeded { .. })
        ));
        assert!(stat_model_sum_exact(0, 1, 1, 1, 1).is_err());
    }
}
