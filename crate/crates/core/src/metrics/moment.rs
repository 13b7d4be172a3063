use nalgebra::DMatrix;

use crate::perm::haar_moment_operator;
use crate::protocols::ProjectedEnsemble;
use crate::quantum::DensityMatrix;
use crate::{Error, Result, C64};

/// Largest `d^K` for which moment operators are built explicitly.
pub const MAX_MOMENT_DIM: usize = 4096;

fn moment_dim(d: usize, k: u32) -> Result<usize> {
    let dim = (d as u128).checked_pow(k).unwrap_or(u128::MAX);
    if k == 0 {
        return Err(Error::invalid("moment order must be >= 1"));
    }
    if dim > MAX_MOMENT_DIM as u128 {
        return Err(Error::CapExceeded {
            what: "moment operator dimension",
            requested: dim,
            cap: MAX_MOMENT_DIM as u128,
        });
    }
    Ok(dim as usize)
}

/// `Σ_z p_z (|ψ_z><ψ_z|)^{⊗K}` on `d^K` dimensions; replica 0 is the least
/// significant factor.
pub fn moment_operator(ens: &ProjectedEnsemble, k: u32) -> Result<DensityMatrix> {
    let d = 1usize << ens.n_data();
    let dim = moment_dim(d, k)?;
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    for (p, s) in ens.states().iter().zip(ens.weights()).map(|(s, p)| (*p, s)) {
        let amps = s.amplitudes();
        let v: Vec<C64> = (0..dim)
            .map(|mut i| {
                let mut z = C64::new(1.0, 0.0);
                for _ in 0..k {
                    z *= amps[i % d];
                    i /= d;
                }
                z
            })
            .collect();
        for c in 0..dim {
            let vc = v[c].conj() * p;
            if vc == C64::new(0.0, 0.0) {
                continue;
            }
            for (r, vr) in v.iter().enumerate() {
                acc[(r, c)] += vr * vc;
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(acc))
}

/// Normalised Schatten-`p` distance `‖ρ_E - ρ_Haar‖_p / ‖ρ_Haar‖_p` for
/// `p ∈ {1, 2}`.
pub fn moment_distance(ens: &ProjectedEnsemble, k: u32, p_order: u32) -> Result<f64> {
    if !(p_order == 1 || p_order == 2) {
        return Err(Error::invalid(format!(
            "Schatten order must be 1 or 2, got {p_order}"
        )));
    }
    let rho = moment_operator(ens, k)?;
    let haar = haar_moment_operator(1 << ens.n_data(), k as usize)?;
    let diff = rho.matrix() - haar.matrix();
    Ok(match p_order {
        2 => diff.norm() / haar.matrix().norm(),
        _ => {
            let ev = diff.symmetric_eigenvalues();
            ev.iter().map(|x| x.abs()).sum::<f64>()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{frame_potential_exact, haar_frame_potential, relative_deviation};
    use crate::quantum::{haar_state, StateVector};
    use crate::rng::RngStream;
    use approx::assert_abs_diff_eq;

    fn random_ensemble(seed: u64, n_q: usize, m: usize) -> ProjectedEnsemble {
        let mut rng = RngStream::new(seed, 3).rng();
        let p = 1.0 / m as f64;
        ProjectedEnsemble::from_weighted(
            (0..m)
                .map(|_| (p, haar_state(n_q, &mut rng).unwrap()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_state_gives_rank_one_projector() {
        let mut rng = RngStream::new(1, 3).rng();
        let s = haar_state(1, &mut rng).unwrap();
        let ens = ProjectedEnsemble::from_weighted(vec![(1.0, s)]).unwrap();
        let rho = moment_operator(&ens, 2).unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);
        let ev = rho.eigenvalues();
        assert_abs_diff_eq!(
            ev.iter().cloned().fold(f64::MIN, f64::max),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn purity_equals_frame_potential() {
        for (seed, n_q, m, kmax) in [(1u64, 1usize, 5usize, 4u32), (2, 2, 7, 3), (3, 3, 4, 2)] {
            let ens = random_ensemble(seed, n_q, m);
            for k in 1..=kmax {
                let rho = moment_operator(&ens, k).unwrap();
                let tr: C64 = rho.matrix().trace();
                assert_abs_diff_eq!(tr.re, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(
                    rho.purity(),
                    frame_potential_exact(&ens, k).unwrap().value,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn haar_moment_purity_is_haar_frame_potential() {
        for (d, k) in [(2usize, 1u32), (2, 3), (4, 2), (8, 2)] {
            let h = haar_moment_operator(d, k as usize).unwrap();
            assert_abs_diff_eq!(h.purity(), haar_frame_potential(d, k), epsilon = 1e-12);
        }
    }

    #[test]
    fn schatten_two_distance_is_root_deviation() {
        for seed in 0..5 {
            let ens = random_ensemble(seed, 1, 8);
            for k in 1..=3 {
                let delta = relative_deviation(&frame_potential_exact(&ens, k).unwrap(), 2);
                let dist = moment_distance(&ens, k, 2).unwrap();
                assert_abs_diff_eq!(dist * dist, delta, epsilon = 1e-9);
            }
        }
        let single =
            ProjectedEnsemble::from_weighted(vec![(1.0, StateVector::zero(1).unwrap())]).unwrap();
        assert_abs_diff_eq!(
            moment_distance(&single, 1, 2).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // Trace distance from a pure state to I/2 is 1.
        assert_abs_diff_eq!(
            moment_distance(&single, 1, 1).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn two_design_has_zero_distance() {
        // The six Pauli eigenstates form a qubit 3-design.
        let o = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        let states = [[o, z], [z, o], [o, o], [o, -o], [o, i], [o, -i]];
        let ens = ProjectedEnsemble::from_weighted(
            states
                .iter()
                .map(|a| (1.0 / 6.0, StateVector::normalized(a.to_vec()).unwrap()))
                .collect(),
        )
        .unwrap();
        for k in 1..=3 {
            assert_abs_diff_eq!(moment_distance(&ens, k, 2).unwrap(), 0.0, epsilon = 1e-7);
            assert_abs_diff_eq!(moment_distance(&ens, k, 1).unwrap(), 0.0, epsilon = 1e-7);
        }
        assert!(moment_distance(&ens, 4, 2).unwrap() > 1e-3);
    }

    #[test]
    fn caps_and_orders() {
        let ens = random_ensemble(0, 4, 2);
        assert!(matches!(
            moment_operator(&ens, 4),
            Err(Error::CapExceeded { .. })
        ));
        let small = random_ensemble(0, 2, 2);
        assert!(moment_operator(&small, 6).is_ok());
        assert!(moment_distance(&ens, 1, 3).is_err());
    }
}
