//! Entanglement-attack experiment: an `N_A`-qubit reference `R` starts
//! maximally entangled with the data register and the adversary holds the
//! data output. The figure of merit is the mutual information `I(R:A_out|z)`
//! averaged over measurement histories `z`, together with its Rényi-2 lower
//! bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::protocols::{run_with_reference_each, ProtocolConfig, ReferenceBranch, SamplingMode};
use crate::quantum::{DensityMatrix, StateVector};
use crate::stats::{mean_stderr, NeumaierSum};
use crate::{Error, Result, C64};

/// Default number of sampled histories beyond the exact horizon.
pub const DEFAULT_MI_SHOTS: usize = 20_000;
/// Default last step that is enumerated exactly.
pub const DEFAULT_MC_THRESHOLD: usize = 8;

/// Mutual information and its Rényi-2 bound, in bits, for a pure joint
/// state whose low half is the data output and high half the reference.
///
/// For a pure `R⊗A` state `I(R:A) = 2 S(ρ_A)`, bounded below by `2 S_2(ρ_A)`.
pub fn conditional_mi(joint: &StateVector) -> Result<(f64, f64)> {
    let n = joint.n_qubits();
    if n % 2 != 0 || n == 0 {
        return Err(Error::invalid(format!(
            "joint state must split evenly into data and reference, got {n} qubits"
        )));
    }
    let d = 1usize << (n / 2);
    let amps = joint.amplitudes();
    let mut rho = nalgebra::DMatrix::<C64>::zeros(d, d);
    for r in 0..d {
        let col = &amps[r * d..(r + 1) * d];
        for j in 0..d {
            let cj = col[j].conj();
            for i in 0..d {
                rho[(i, j)] += col[i] * cj;
            }
        }
    }
    let e = DensityMatrix::from_matrix_unchecked(rho).entropies();
    Ok((2.0 * e.von_neumann, 2.0 * e.renyi2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Dt,
    Hdt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiMode {
    Exact,
    Sampled,
}

/// History-averaged mutual information at one point of a sweep.
///
/// `avg_*` are means over realizations of the per-realization history
/// averages and `*_stderr` their standard errors across realizations.
/// `history_spread` is the per-realization standard deviation of
/// `I(R:A_out|z)` over histories, averaged over realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MIEstimate {
    pub protocol: ProtocolKind,
    /// Step `t` for HDT sweeps, `N_B` for DT sweeps.
    pub swept: usize,
    pub avg_mi: f64,
    pub avg_renyi_bound: f64,
    pub mi_stderr: f64,
    pub renyi_stderr: f64,
    pub history_spread: f64,
    pub n_histories: u64,
    pub realizations: usize,
    pub mode: MiMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiOptions {
    /// Steps up to this one are enumerated exactly when the ensemble mode is
    /// exact; later steps are sampled.
    pub mc_threshold: usize,
    /// Histories sampled per realization beyond the exact horizon.
    pub shots: usize,
}

impl Default for MiOptions {
    fn default() -> Self {
        Self {
            mc_threshold: DEFAULT_MC_THRESHOLD,
            shots: DEFAULT_MI_SHOTS,
        }
    }
}

/// Per-history values reduced for one realization at one step.
#[derive(Debug, Clone, Copy)]
struct StepStats {
    mi: f64,
    renyi: f64,
    spread: f64,
    n_histories: u64,
    mode: MiMode,
}

fn reduce_branches(branches: &[ReferenceBranch], mode: MiMode) -> Result<StepStats> {
    let vals: Vec<(f64, f64)> = branches
        .par_iter()
        .map(|b| conditional_mi(&b.joint))
        .collect::<Result<_>>()?;
    let weights: Vec<f64> = match mode {
        MiMode::Exact => branches.iter().map(|b| b.prob).collect(),
        MiMode::Sampled => {
            let total: u64 = branches.iter().map(|b| b.count.unwrap_or(1)).sum();
            branches
                .iter()
                .map(|b| b.count.unwrap_or(1) as f64 / total as f64)
                .collect()
        }
    };
    let wsum = |f: &dyn Fn(usize) -> f64| {
        (0..vals.len())
            .map(|i| weights[i] * f(i))
            .collect::<NeumaierSum>()
            .value()
    };
    let mi = wsum(&|i| vals[i].0);
    let renyi = wsum(&|i| vals[i].1);
    let var = wsum(&|i| (vals[i].0 - mi).powi(2)).max(0.0);
    let n_histories = match mode {
        MiMode::Exact => branches.len() as u64,
        MiMode::Sampled => branches.iter().map(|b| b.count.unwrap_or(1)).sum(),
    };
    Ok(StepStats {
        mi,
        renyi,
        spread: var.sqrt(),
        n_histories,
        mode,
    })
}

/// Largest step that can be enumerated under the configured caps.
fn exact_horizon(cfg: &ProtocolConfig, opts: &MiOptions) -> usize {
    if !matches!(cfg.mode, SamplingMode::Exact) {
        return 0;
    }
    let cap_steps = if cfg.n_ancilla == 0 {
        cfg.steps
    } else {
        cfg.exact_cap / cfg.n_ancilla
    };
    let wanted = opts.mc_threshold.min(cfg.steps);
    if cap_steps < wanted {
        log::info!(
            "exact enumeration capped at step {cap_steps} (cap {} measured qubits); sampling beyond",
            cfg.exact_cap
        );
    }
    wanted.min(cap_steps)
}

/// Per-step statistics `t = 0..=T` for a single realization.
fn realization_stats(cfg: &ProtocolConfig, opts: &MiOptions) -> Result<Vec<StepStats>> {
    let horizon = exact_horizon(cfg, opts);
    let mut out: Vec<StepStats> = Vec::with_capacity(cfg.steps + 1);
    if horizon > 0 {
        let mut exact = cfg.clone();
        exact.steps = horizon;
        exact.mode = SamplingMode::Exact;
        run_with_reference_each(&exact, |_, b| {
            out.push(reduce_branches(b, MiMode::Exact)?);
            Ok(())
        })?;
    }
    if horizon < cfg.steps {
        let mut sampled = cfg.clone();
        sampled.mode = match cfg.mode {
            SamplingMode::MonteCarlo { shots } => SamplingMode::MonteCarlo { shots },
            SamplingMode::Exact => SamplingMode::MonteCarlo { shots: opts.shots },
        };
        run_with_reference_each(&sampled, |step, b| {
            if out.len() <= step {
                out.push(reduce_branches(b, MiMode::Sampled)?);
            }
            Ok(())
        })?;
    }
    Ok(out)
}

fn combine(protocol: ProtocolKind, swept: usize, per_real: &[StepStats]) -> MIEstimate {
    let mis: Vec<f64> = per_real.iter().map(|s| s.mi).collect();
    let renyis: Vec<f64> = per_real.iter().map(|s| s.renyi).collect();
    let (avg_mi, mi_err) = mean_stderr(&mis);
    let (avg_renyi, renyi_err) = mean_stderr(&renyis);
    let spreads: Vec<f64> = per_real.iter().map(|s| s.spread).collect();
    let mode = if per_real.iter().all(|s| s.mode == MiMode::Exact) {
        MiMode::Exact
    } else {
        MiMode::Sampled
    };
    MIEstimate {
        protocol,
        swept,
        avg_mi,
        avg_renyi_bound: avg_renyi,
        mi_stderr: if per_real.len() > 1 { mi_err } else { 0.0 },
        renyi_stderr: if per_real.len() > 1 { renyi_err } else { 0.0 },
        history_spread: mean_stderr(&spreads).0,
        n_histories: per_real.iter().map(|s| s.n_histories).sum(),
        realizations: per_real.len(),
        mode,
    }
}

/// History-averaged mutual information at every step `t = 0..=T`, averaged
/// over `cfg.realizations` independent unitary sequences.
///
/// Exact-mode configurations enumerate histories up to `opts.mc_threshold`
/// (or the exact cap, whichever is smaller) and sample beyond it.
pub fn mi_sweep(cfg: &ProtocolConfig, opts: &MiOptions) -> Result<Vec<MIEstimate>> {
    cfg.validate()?;
    let per_real: Vec<Vec<StepStats>> = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| realization_stats(&cfg.for_realization(r), opts))
        .collect::<Result<_>>()?;
    let protocol = if cfg.steps == 1 {
        ProtocolKind::Dt
    } else {
        ProtocolKind::Hdt
    };
    Ok((0..=cfg.steps)
        .map(|t| {
            let col: Vec<StepStats> = per_real.iter().map(|r| r[t]).collect();
            combine(protocol, t, &col)
        })
        .collect())
}

/// Single-round protocol for each ancilla size, reported at the output.
pub fn dt_mi_sweep(
    n_data: usize,
    ancillas: &[usize],
    realizations: usize,
    seed: u64,
    opts: &MiOptions,
) -> Result<Vec<MIEstimate>> {
    ancillas
        .iter()
        .map(|&n_b| {
            let cfg = ProtocolConfig::haar(n_data, n_b, 1, SamplingMode::Exact, seed)?
                .with_realizations(realizations)
                .with_dense_cap((n_data + n_b).max(crate::protocols::DEFAULT_DENSE_CAP));
            let mut est = mi_sweep(&cfg, opts)?.pop().expect("sweep has a final step");
            est.protocol = ProtocolKind::Dt;
            est.swept = n_b;
            Ok(est)
        })
        .collect()
}

/// Probability-weighted histogram of `I(R:A_out|z)` over `[0, 2N_A]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiDistribution {
    pub step: usize,
    pub bin_edges: Vec<f64>,
    pub mass: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
    /// `std_dev / mean`.
    pub concentration: f64,
    pub mode: MiMode,
}

/// Distribution of per-history mutual information at `step` for the first
/// realization of `cfg`.
pub fn mi_distribution(
    cfg: &ProtocolConfig,
    step: usize,
    bins: usize,
    opts: &MiOptions,
) -> Result<MiDistribution> {
    if step > cfg.steps {
        return Err(Error::IndexOutOfRange {
            what: "step",
            index: step,
            size: cfg.steps + 1,
        });
    }
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    let mut run = cfg.for_realization(0);
    run.steps = step.max(1);
    let exact = exact_horizon(&run, opts) >= step;
    if !exact {
        run.mode = match cfg.mode {
            SamplingMode::MonteCarlo { shots } => SamplingMode::MonteCarlo { shots },
            SamplingMode::Exact => SamplingMode::MonteCarlo { shots: opts.shots },
        };
    } else {
        run.mode = SamplingMode::Exact;
    }
    let mode = if exact {
        MiMode::Exact
    } else {
        MiMode::Sampled
    };
    let mut captured: Option<Vec<(f64, f64)>> = None;
    run_with_reference_each(&run, |t, branches| {
        if t == step {
            let total: u64 = branches.iter().map(|b| b.count.unwrap_or(1)).sum();
            let v = branches
                .iter()
                .map(|b| {
                    let w = match b.count {
                        Some(c) if mode == MiMode::Sampled => c as f64 / total as f64,
                        _ => b.prob,
                    };
                    Ok((w, conditional_mi(&b.joint)?.0))
                })
                .collect::<Result<_>>()?;
            captured = Some(v);
        }
        Ok(())
    })?;
    let vals = captured.expect("requested step was visited");
    let top = 2.0 * cfg.n_data as f64;
    let mut mass = vec![0.0; bins];
    for &(w, x) in &vals {
        let b = ((x / top * bins as f64) as usize).min(bins - 1);
        mass[b] += w;
    }
    let mean: f64 = vals
        .iter()
        .map(|(w, x)| w * x)
        .collect::<NeumaierSum>()
        .value();
    let var: f64 = vals
        .iter()
        .map(|(w, x)| w * (x - mean).powi(2))
        .collect::<NeumaierSum>()
        .value();
    let std_dev = var.max(0.0).sqrt();
    Ok(MiDistribution {
        step,
        bin_edges: (0..=bins).map(|i| top * i as f64 / bins as f64).collect(),
        mass,
        mean,
        std_dev,
        concentration: if mean > 0.0 { std_dev / mean } else { f64::NAN },
        mode,
    })
}
