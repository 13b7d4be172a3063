use serde::{Deserialize, Serialize};

use super::kernel::pair_sums;
use crate::protocols::{EnsembleMode, ProjectedEnsemble};
use crate::quantum::StateVector;
use crate::rng::RngStream;
use crate::stats::{mean_stderr, NeumaierSum};
use crate::{Error, Result};
use rand::seq::SliceRandom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    Exact,
    UStatistic,
    BlockedUStatistic,
}

/// A frame potential value with its statistical error.
///
/// `stderr` is zero for exact sums. For the U-statistic it is the delete-one
/// jackknife error, which is undefined (NaN) with only two samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramePotentialEstimate {
    pub k: u32,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub mode: EstimatorMode,
}

/// `1 / C(d+K-1, K)`, the Haar frame potential.
pub fn haar_frame_potential(d: usize, k: u32) -> f64 {
    assert!(d >= 1 && k >= 1, "dimension and order must be positive");
    (0..k as usize).fold(1.0, |acc, i| acc * (i + 1) as f64 / (d + i) as f64)
}

/// `F / F_Haar - 1`.
pub fn relative_deviation(est: &FramePotentialEstimate, d: usize) -> f64 {
    est.value / haar_frame_potential(d, est.k) - 1.0
}

fn check_orders(ks: &[u32]) -> Result<()> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::invalid(
            "frame potential orders must be non-empty and >= 1",
        ));
    }
    Ok(())
}

fn check_dims(states: &[StateVector]) -> Result<()> {
    if let Some(first) = states.first() {
        for s in states {
            if s.dim() != first.dim() {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    got: s.dim(),
                    context: "frame potential states",
                });
            }
        }
    }
    Ok(())
}

/// Full double sum `Σ p_z p_z' |<ψ_z|ψ_z'>|^{2K}` over an exact ensemble.
pub fn frame_potential_exact(ens: &ProjectedEnsemble, k: u32) -> Result<FramePotentialEstimate> {
    if ens.mode() != EnsembleMode::Exact {
        return Err(Error::WrongMode(
            "exact frame potential needs an enumerated ensemble; use the U-statistic",
        ));
    }
    Ok(exact_sums(ens.states(), ens.weights(), &[k], ens.len() as u64)?[0])
}

fn exact_sums(
    states: &[StateVector],
    p: &[f64],
    ks: &[u32],
    n: u64,
) -> Result<Vec<FramePotentialEstimate>> {
    check_orders(ks)?;
    check_dims(states)?;
    if states.is_empty() {
        return Err(Error::EmptyTargets("frame potential of an empty ensemble"));
    }
    let sums = pair_sums(states, p, ks);
    let diag: NeumaierSum = p.iter().map(|w| w * w).collect();
    Ok(ks
        .iter()
        .zip(&sums.rows)
        .map(|(&k, rows)| {
            let mut acc = diag;
            for (w, r) in p.iter().zip(rows) {
                acc.add(w * r);
            }
            FramePotentialEstimate {
                k,
                value: acc.value(),
                stderr: 0.0,
                n_samples: n,
                mode: EstimatorMode::Exact,
            }
        })
        .collect())
}

/// Unbiased estimate from equally weighted samples: the mean of
/// `|<ψ_i|ψ_j>|^{2K}` over ordered pairs `i ≠ j`.
pub fn frame_potential_mc(samples: &[StateVector], k: u32) -> Result<FramePotentialEstimate> {
    let counts = vec![1; samples.len()];
    Ok(frame_potential_weighted(samples, &counts, &[k])?[0])
}

/// U-statistic over `Σ counts` samples where `states[a]` occurs `counts[a]`
/// times, for several orders at once.
pub fn frame_potential_weighted(
    states: &[StateVector],
    counts: &[u64],
    ks: &[u32],
) -> Result<Vec<FramePotentialEstimate>> {
    check_orders(ks)?;
    check_dims(states)?;
    if states.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: states.len(),
            got: counts.len(),
            context: "sample multiplicities",
        });
    }
    let n: u64 = counts.iter().sum();
    if n < 2 {
        return Err(Error::invalid("the U-statistic needs at least two samples"));
    }
    let c: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let sums = pair_sums(states, &c, ks);
    let nf = n as f64;
    Ok(ks
        .iter()
        .zip(&sums.rows)
        .map(|(&k, rows)| {
            // ρ_a: sum over the other n-1 samples for one copy of state a.
            let rho: Vec<f64> = rows.iter().zip(&c).map(|(r, ca)| r + ca - 1.0).collect();
            let total: f64 = c
                .iter()
                .zip(&rho)
                .map(|(ca, r)| ca * r)
                .collect::<NeumaierSum>()
                .value();
            let value = total / (nf * (nf - 1.0));
            let stderr = if n < 3 {
                f64::NAN
            } else {
                let denom = (nf - 1.0) * (nf - 2.0);
                let loo: Vec<f64> = rho.iter().map(|r| (total - 2.0 * r) / denom).collect();
                let mean = c
                    .iter()
                    .zip(&loo)
                    .map(|(ca, u)| ca * u)
                    .collect::<NeumaierSum>()
                    .value()
                    / nf;
                let ss = c
                    .iter()
                    .zip(&loo)
                    .map(|(ca, u)| ca * (u - mean).powi(2))
                    .collect::<NeumaierSum>()
                    .value();
                ((nf - 1.0) / nf * ss).sqrt()
            };
            FramePotentialEstimate {
                k,
                value,
                stderr,
                n_samples: n,
                mode: EstimatorMode::UStatistic,
            }
        })
        .collect())
}

/// Mean of complete U-statistics over disjoint random blocks of about
/// `block` samples each.
///
/// Every block value is unbiased, so the mean is too; its error is the
/// spread of block values over `sqrt(blocks)`. The cost is `n·block` pairs
/// instead of `n²`. With a single block this is the complete U-statistic.
pub fn frame_potential_blocked(
    states: &[StateVector],
    counts: &[u64],
    ks: &[u32],
    block: usize,
    seed: u64,
) -> Result<Vec<FramePotentialEstimate>> {
    if states.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: states.len(),
            got: counts.len(),
            context: "sample multiplicities",
        });
    }
    if block < 2 {
        return Err(Error::invalid(
            "U-statistic blocks need at least two samples",
        ));
    }
    let n: u64 = counts.iter().sum();
    let n_blocks = (n as usize / block).max(1);
    if n_blocks == 1 {
        return frame_potential_weighted(states, counts, ks);
    }
    let mut labels: Vec<u32> = counts
        .iter()
        .enumerate()
        .flat_map(|(a, &c)| std::iter::repeat_n(a as u32, c as usize))
        .collect();
    labels.shuffle(&mut RngStream::new(seed, 0).rng());
    let n = labels.len();
    let mut per_block: Vec<Vec<FramePotentialEstimate>> = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let (lo, hi) = (b * n / n_blocks, (b + 1) * n / n_blocks);
        let mut chunk = labels[lo..hi].to_vec();
        chunk.sort_unstable();
        let mut sub_states = Vec::new();
        let mut sub_counts: Vec<u64> = Vec::new();
        for (i, &a) in chunk.iter().enumerate() {
            if i > 0 && chunk[i - 1] == a {
                *sub_counts.last_mut().expect("run started") += 1;
            } else {
                sub_states.push(states[a as usize].clone());
                sub_counts.push(1);
            }
        }
        per_block.push(frame_potential_weighted(&sub_states, &sub_counts, ks)?);
    }
    Ok(ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let vals: Vec<f64> = per_block.iter().map(|e| e[i].value).collect();
            let (value, stderr) = mean_stderr(&vals);
            FramePotentialEstimate {
                k,
                value,
                stderr,
                n_samples: n as u64,
                mode: EstimatorMode::BlockedUStatistic,
            }
        })
        .collect())
}

/// Frame potentials of an ensemble for several orders, exact or U-statistic
/// according to how the ensemble was produced.
pub fn frame_potentials(
    ens: &ProjectedEnsemble,
    ks: &[u32],
) -> Result<Vec<FramePotentialEstimate>> {
    match ens.counts() {
        None => exact_sums(ens.states(), ens.weights(), ks, ens.len() as u64),
        Some(counts) => frame_potential_weighted(ens.states(), counts, ks),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::haar_state;
    use crate::rng::RngStream;
    use crate::C64;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn qubit(a: C64, b: C64) -> StateVector {
        StateVector::normalized(vec![a, b]).unwrap()
    }

    fn four_state() -> ProjectedEnsemble {
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        let states = vec![qubit(o, z), qubit(z, o), qubit(o, o), qubit(o, -o)];
        ProjectedEnsemble::from_weighted(states.into_iter().map(|s| (0.25, s)).collect()).unwrap()
    }

    /// Direct double sum including the diagonal.
    fn naive(ens: &ProjectedEnsemble, k: u32) -> f64 {
        let mut acc = 0.0;
        for (p, a) in ens.weights().iter().zip(ens.states()) {
            for (q, b) in ens.weights().iter().zip(ens.states()) {
                acc += p * q * a.overlap(b).unwrap().powi(k as i32);
            }
        }
        acc
    }

    #[test]
    fn haar_values() {
        assert_eq!(haar_frame_potential(2, 1), 0.5);
        assert_abs_diff_eq!(haar_frame_potential(4, 2), 0.1, epsilon = 1e-15);
        assert_eq!(haar_frame_potential(1, 7), 1.0);
        assert_abs_diff_eq!(haar_frame_potential(16, 4), 1.0 / 3876.0, epsilon = 1e-18);
    }

    #[test]
    fn small_exact_ensembles() {
        let single =
            ProjectedEnsemble::from_weighted(vec![(1.0, StateVector::zero(2).unwrap())]).unwrap();
        for k in 1..5 {
            assert_abs_diff_eq!(
                frame_potential_exact(&single, k).unwrap().value,
                1.0,
                epsilon = 1e-14
            );
        }
        let pair = ProjectedEnsemble::from_weighted(vec![
            (0.5, StateVector::basis_state(1, 0).unwrap()),
            (0.5, StateVector::basis_state(1, 1).unwrap()),
        ])
        .unwrap();
        assert_abs_diff_eq!(
            frame_potential_exact(&pair, 3).unwrap().value,
            0.5,
            epsilon = 1e-14
        );
        let four = four_state();
        assert_abs_diff_eq!(
            frame_potential_exact(&four, 1).unwrap().value,
            0.5,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            frame_potential_exact(&four, 2).unwrap().value,
            0.375,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(naive(&four, 2), 0.375, epsilon = 1e-14);
    }

    #[test]
    fn exact_rejects_sampled_input() {
        let ens = ProjectedEnsemble::from_samples(vec![StateVector::zero(1).unwrap(); 3]).unwrap();
        assert!(matches!(
            frame_potential_exact(&ens, 1),
            Err(Error::WrongMode(_))
        ));
    }

    #[test]
    fn relative_deviation_examples() {
        let est = |value| FramePotentialEstimate {
            k: 1,
            value,
            stderr: 0.0,
            n_samples: 1,
            mode: EstimatorMode::Exact,
        };
        assert_eq!(relative_deviation(&est(0.5), 2), 0.0);
        assert_eq!(relative_deviation(&est(1.0), 2), 1.0);
        assert_abs_diff_eq!(relative_deviation(&est(0.5), 4), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn u_statistic_edge_cases() {
        let a = StateVector::basis_state(1, 0).unwrap();
        let b = StateVector::basis_state(1, 1).unwrap();
        let e = frame_potential_mc(&[a.clone(), b], 1).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.stderr.is_nan());
        let same = frame_potential_mc(&vec![a.clone(); 10], 3).unwrap();
        assert_abs_diff_eq!(same.value, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(same.stderr, 0.0, epsilon = 1e-14);
        assert!(frame_potential_mc(&[a], 1).is_err());
        assert!(frame_potential_mc(&[], 1).is_err());
    }

    #[test]
    fn multiplicities_match_expanded_samples() {
        let mut rng = RngStream::new(21, 0).rng();
        let distinct: Vec<_> = (0..6).map(|_| haar_state(2, &mut rng).unwrap()).collect();
        let counts = [1u64, 3, 2, 5, 1, 4];
        let expanded: Vec<_> = distinct
            .iter()
            .zip(counts)
            .flat_map(|(s, c)| std::iter::repeat_n(s.clone(), c as usize))
            .collect();
        let grouped = frame_potential_weighted(&distinct, &counts, &[1, 2, 3]).unwrap();
        for g in grouped {
            let flat = frame_potential_mc(&expanded, g.k).unwrap();
            assert_abs_diff_eq!(g.value, flat.value, epsilon = 1e-13);
            assert_abs_diff_eq!(g.stderr, flat.stderr, epsilon = 1e-13);
        }
    }

    #[test]
    fn jackknife_matches_naive_leave_one_out() {
        let mut rng = RngStream::new(22, 0).rng();
        let s: Vec<_> = (0..9).map(|_| haar_state(1, &mut rng).unwrap()).collect();
        let u = |idx: &[usize]| {
            let mut acc = 0.0;
            for &i in idx {
                for &j in idx {
                    if i != j {
                        acc += s[i].overlap(&s[j]).unwrap().powi(2);
                    }
                }
            }
            acc / (idx.len() * (idx.len() - 1)) as f64
        };
        let all: Vec<usize> = (0..9).collect();
        let loo: Vec<f64> = (0..9)
            .map(|i| u(&all.iter().copied().filter(|&j| j != i).collect::<Vec<_>>()))
            .collect();
        let mean = loo.iter().sum::<f64>() / 9.0;
        let jk = (8.0 / 9.0 * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt();
        let est = frame_potential_mc(&s, 2).unwrap();
        assert_abs_diff_eq!(est.value, u(&all), epsilon = 1e-14);
        assert_abs_diff_eq!(est.stderr, jk, epsilon = 1e-14);
    }

    #[test]
    fn haar_qubits_estimate_one_half() {
        let mut rng = RngStream::new(23, 0).rng();
        let s: Vec<_> = (0..50_000)
            .map(|_| haar_state(1, &mut rng).unwrap())
            .collect();
        let est = frame_potential_mc(&s, 1).unwrap();
        assert!((est.value - 0.5).abs() <= 3.0 * est.stderr, "{est:?}");
        assert!(est.stderr < 1e-2);
    }

    #[test]
    fn resampled_branches_match_exact_value() {
        use rand::distr::{weighted::WeightedIndex, Distribution};
        let mut rng = RngStream::new(24, 0).rng();
        let states: Vec<_> = (0..12).map(|_| haar_state(2, &mut rng).unwrap()).collect();
        let raw: Vec<f64> = (0..12).map(|i| 1.0 + i as f64).collect();
        let tot: f64 = raw.iter().sum();
        let ens = ProjectedEnsemble::from_weighted(
            raw.iter()
                .zip(&states)
                .map(|(w, s)| (w / tot, s.clone()))
                .collect(),
        )
        .unwrap();
        let dist = WeightedIndex::new(&raw).unwrap();
        let mut counts = vec![0u64; 12];
        for _ in 0..100_000 {
            counts[dist.sample(&mut rng)] += 1;
        }
        for k in 1..=3 {
            let exact = frame_potential_exact(&ens, k).unwrap().value;
            let mc = frame_potential_weighted(&states, &counts, &[k]).unwrap()[0];
            assert!(
                (mc.value - exact).abs() <= 3.0 * mc.stderr,
                "K={k}: {mc:?} vs {exact}"
            );
        }
    }

    #[test]
    fn blocked_estimate_is_consistent_with_complete_one() {
        let mut rng = RngStream::new(25, 0).rng();
        let distinct: Vec<_> = (0..40).map(|_| haar_state(2, &mut rng).unwrap()).collect();
        let counts: Vec<u64> = (0..40).map(|i| 50 + (i % 7) * 20).collect();
        let full = frame_potential_weighted(&distinct, &counts, &[1, 2]).unwrap();
        let blocked = frame_potential_blocked(&distinct, &counts, &[1, 2], 400, 3).unwrap();
        for (f, b) in full.iter().zip(&blocked) {
            assert_eq!(b.mode, EstimatorMode::BlockedUStatistic);
            assert_eq!(b.n_samples, f.n_samples);
            assert!((f.value - b.value).abs() < 3.0 * b.stderr, "{f:?} {b:?}");
        }
        let again = frame_potential_blocked(&distinct, &counts, &[1, 2], 400, 3).unwrap();
        assert_eq!(blocked, again);
        let single = frame_potential_blocked(&distinct, &counts, &[1], 1_000_000, 3).unwrap();
        assert_eq!(single[0], full[0]);
    }

    fn random_ensemble(seed: u64, n_q: usize, m: usize) -> ProjectedEnsemble {
        let mut rng = RngStream::new(seed, 1).rng();
        let raw: Vec<f64> = (0..m)
            .map(|i| ((i * 7919 + seed as usize) % 13 + 1) as f64)
            .collect();
        let tot: f64 = raw.iter().sum();
        ProjectedEnsemble::from_weighted(
            raw.iter()
                .map(|w| (w / tot, haar_state(n_q, &mut rng).unwrap()))
                .collect(),
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn exact_is_bounded_monotone_and_above_haar(seed in 0u64..1000, n_q in 1usize..4, m in 1usize..40) {
            let ens = random_ensemble(seed, n_q, m);
            let d = 1usize << n_q;
            let fs = frame_potentials(&ens, &[1, 2, 3, 4]).unwrap();
            for (i, f) in fs.iter().enumerate() {
                prop_assert!((f.value - naive(&ens, f.k)).abs() < 1e-12);
                prop_assert!(f.value <= 1.0 + 1e-12);
                prop_assert!(f.value >= haar_frame_potential(d, f.k) - 1e-9);
                if i > 0 {
                    prop_assert!(f.value <= fs[i - 1].value + 1e-12);
                }
            }
        }
    }
}
