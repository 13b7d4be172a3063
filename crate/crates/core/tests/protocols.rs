use std::collections::HashMap;

use approx::assert_abs_diff_eq;
use hdtlab::protocols::{
    build_step_unitary, run_dt, run_exact_with_isometries, run_hdt_exact, run_hdt_sampled,
    run_with_reference, ProtocolConfig, SamplingMode, StepIsometry, UnitarySource,
};
use hdtlab::quantum::{DensityMatrix, StateVector, UnitaryMatrix};
use hdtlab::stats::chi_square_p_value;
use hdtlab::C64;

fn haar_cfg(n_a: usize, n_b: usize, steps: usize, mode: SamplingMode, seed: u64) -> ProtocolConfig {
    ProtocolConfig::haar(n_a, n_b, steps, mode, seed).unwrap()
}

fn assert_state_eq(a: &StateVector, b: &StateVector, tol: f64) {
    assert_eq!(a.dim(), b.dim());
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        assert!((x - y).norm() < tol, "{x} vs {y}");
    }
}

#[test]
fn identity_step_keeps_zero_state() {
    let v = StepIsometry::from_unitary(2, 2, &UnitaryMatrix::identity(4)).unwrap();
    let ens = run_exact_with_isometries(&[v]).unwrap();
    assert_eq!(ens.len(), 1);
    assert_eq!(ens[0].n_distinct(), 1);
    assert_abs_diff_eq!(ens[0].weights()[0], 1.0);
    assert_eq!(ens[0].states()[0], StateVector::zero(1).unwrap());
}

#[test]
fn bell_step_gives_two_basis_branches() {
    // Hadamard on the data qubit, then CNOT from data (qubit 0) to ancilla.
    let h_on_a = UnitaryMatrix::hadamard().kron_high(&UnitaryMatrix::identity(2));
    let u = UnitaryMatrix::cnot().compose(&h_on_a).unwrap();
    let v = StepIsometry::from_unitary(2, 2, &u).unwrap();
    let ens = &run_exact_with_isometries(&[v]).unwrap()[0];
    assert_eq!(ens.n_distinct(), 2);
    for (b, (w, s)) in ens.entries().enumerate() {
        assert_abs_diff_eq!(w, 0.5, epsilon = 1e-14);
        assert_state_eq(s, &StateVector::basis_state(1, b).unwrap(), 1e-14);
    }
}

#[test]
fn exact_probabilities_are_complete() {
    let cfg = haar_cfg(2, 2, 3, SamplingMode::Exact, 17);
    for (t, ens) in run_hdt_exact(&cfg).unwrap().iter().enumerate() {
        assert_abs_diff_eq!(ens.total_probability(), 1.0, epsilon = 1e-9);
        assert_eq!(ens.n_distinct(), 4usize.pow(t as u32 + 1));
        for s in ens.states() {
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn exact_mode_cap_is_enforced() {
    let cfg = haar_cfg(1, 3, 6, SamplingMode::Exact, 1);
    assert!(matches!(
        run_hdt_exact(&cfg),
        Err(hdtlab::Error::CapExceeded { .. })
    ));
    let sampled = haar_cfg(1, 3, 6, SamplingMode::MonteCarlo { shots: 5 }, 1);
    assert!(matches!(
        run_hdt_exact(&sampled),
        Err(hdtlab::Error::WrongMode(_))
    ));
}

#[test]
fn dt_is_first_hdt_step() {
    let cfg = haar_cfg(2, 3, 4, SamplingMode::Exact, 5);
    let dt = run_dt(&cfg).unwrap();
    let mut one = cfg.clone();
    one.steps = 1;
    assert_eq!(dt, run_hdt_exact(&one).unwrap().remove(0));
    assert_abs_diff_eq!(dt.total_probability(), 1.0, epsilon = 1e-12);
}

#[test]
fn dt_without_ancilla_is_single_state() {
    let cfg = haar_cfg(3, 0, 1, SamplingMode::Exact, 8);
    let dt = run_dt(&cfg).unwrap();
    assert_eq!(dt.n_distinct(), 1);
    let u = build_step_unitary(&cfg, 0).unwrap();
    let expect = StateVector::zero(3)
        .unwrap()
        .apply_unitary(&u, &[0, 1, 2])
        .unwrap();
    assert_state_eq(&dt.states()[0], &expect, 1e-12);
}

#[test]
fn single_shot_trajectory() {
    let cfg = haar_cfg(2, 1, 5, SamplingMode::MonteCarlo { shots: 1 }, 3);
    let ens = run_hdt_sampled(&cfg).unwrap();
    assert_eq!(ens.len(), 5);
    for e in &ens {
        assert_eq!(e.len(), 1);
        assert_abs_diff_eq!(e.states()[0].norm(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn sampling_is_deterministic() {
    let cfg = haar_cfg(2, 2, 4, SamplingMode::MonteCarlo { shots: 300 }, 21);
    assert_eq!(
        run_hdt_sampled(&cfg).unwrap(),
        run_hdt_sampled(&cfg).unwrap()
    );
    let other = cfg.for_realization(1);
    assert_ne!(
        run_hdt_sampled(&cfg).unwrap(),
        run_hdt_sampled(&other).unwrap()
    );
}

#[test]
fn sampled_histories_follow_exact_probabilities() {
    let exact_cfg = haar_cfg(2, 1, 2, SamplingMode::Exact, 99);
    let shots = 100_000;
    let mc_cfg = haar_cfg(2, 1, 2, SamplingMode::MonteCarlo { shots }, 99);
    let exact = run_hdt_exact(&exact_cfg).unwrap().pop().unwrap();
    let sampled = run_hdt_sampled(&mc_cfg).unwrap().pop().unwrap();
    let observed: HashMap<&Vec<u32>, u64> = sampled
        .histories()
        .iter()
        .zip(sampled.counts().unwrap())
        .map(|(h, &c)| (h, c))
        .collect();
    let mut chi2 = 0.0;
    for (h, &p) in exact.histories().iter().zip(exact.weights()) {
        let e = p * shots as f64;
        let o = *observed.get(h).unwrap_or(&0) as f64;
        chi2 += (o - e).powi(2) / e;
        // States along the same history agree between modes.
        if let Some(i) = sampled.histories().iter().position(|x| x == h) {
            let j = exact.histories().iter().position(|x| x == h).unwrap();
            assert_state_eq(&sampled.states()[i], &exact.states()[j], 1e-12);
        }
    }
    let p = chi_square_p_value(chi2, exact.n_distinct() as f64 - 1.0);
    assert!(p > 0.001, "chi2 = {chi2}, p = {p}");
}

#[test]
fn deferred_measurement_equivalence() {
    let (n_a, steps) = (2usize, 3usize);
    let cfg = haar_cfg(n_a, 1, steps, SamplingMode::Exact, 1234);
    let per_step = run_hdt_exact(&cfg).unwrap().pop().unwrap();

    let mut big = StateVector::zero(n_a + steps).unwrap();
    for t in 0..steps {
        let u = build_step_unitary(&cfg, t).unwrap();
        big = big.apply_unitary(&u, &[0, 1, n_a + t]).unwrap();
    }
    let targets: Vec<usize> = (n_a..n_a + steps).collect();
    let deferred = big.measure_enumerate(&targets).unwrap();
    assert_eq!(deferred.len(), per_step.n_distinct());
    for br in &deferred {
        let history: Vec<u32> = (0..steps).map(|j| ((br.outcome >> j) & 1) as u32).collect();
        let i = per_step
            .histories()
            .iter()
            .position(|h| *h == history)
            .unwrap();
        assert_abs_diff_eq!(per_step.weights()[i], br.prob, epsilon = 1e-12);
        assert_state_eq(&per_step.states()[i], &br.post_state, 1e-10);
    }
}

#[test]
fn hea_source_runs_and_is_deterministic() {
    let cfg = ProtocolConfig::new(
        2,
        1,
        3,
        UnitarySource::Hea {
            layers: 3,
            param_seed: 5,
        },
        SamplingMode::Exact,
    )
    .unwrap();
    let a = run_hdt_exact(&cfg).unwrap();
    assert_eq!(a, run_hdt_exact(&cfg).unwrap());
    assert_abs_diff_eq!(a[2].total_probability(), 1.0, epsilon = 1e-12);
}

#[test]
fn reference_run_preserves_average_reference_state() {
    let cfg = haar_cfg(2, 1, 3, SamplingMode::Exact, 77);
    let steps = run_with_reference(&cfg).unwrap();
    assert_eq!(steps.len(), 4);
    let start = &steps[0][0];
    let rho_a = start.joint.partial_trace(&[0, 1]).unwrap();
    assert_abs_diff_eq!(rho_a.purity(), 0.25, epsilon = 1e-12);
    for branches in &steps {
        let total: f64 = branches.iter().map(|b| b.prob).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        let mut avg = nalgebra::DMatrix::<C64>::zeros(4, 4);
        for b in branches {
            let r = b.joint.partial_trace(&[2, 3]).unwrap();
            avg += r.into_matrix() * C64::new(b.prob, 0.0);
        }
        let avg = DensityMatrix::new(avg).unwrap();
        assert_abs_diff_eq!(avg.purity(), 0.25, epsilon = 1e-10);
    }
}

#[test]
fn sampled_reference_matches_counts() {
    let cfg = haar_cfg(1, 1, 4, SamplingMode::MonteCarlo { shots: 500 }, 2);
    for branches in run_with_reference(&cfg).unwrap() {
        let n: u64 = branches.iter().map(|b| b.count.unwrap()).sum();
        assert_eq!(n, 500);
    }
}
