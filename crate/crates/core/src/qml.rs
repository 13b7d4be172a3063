//! Per-step training of hardware-efficient step unitaries.
//!
//! Step `t` minimises an interpolated loss on the average data state
//! `ρ_t`: a fidelity term pulling towards the initial state `|ψ0>` and a
//! superfidelity term pulling towards `I/d_A`, mixed by a monotone schedule
//! `q_t`. The average post-measurement state is the partial trace of the
//! pre-measurement state, so `ρ_t = tr_B(V_t ρ_{t-1} V_t†)` is evaluated
//! exactly from the previous average state.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::metrics::frame_potentials;
use crate::protocols::{run_sampled_with_isometries, HeaCircuit, StepIsometry};
use crate::quantum::{DensityMatrix, StateVector};
use crate::rng::{mix, RngStream};
use crate::stats::mean_stderr;
use crate::{Error, Result, C64};

/// `tr(ρσ) + sqrt((1 - tr ρ²)(1 - tr σ²))`.
pub fn superfidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
            context: "superfidelity arguments",
        });
    }
    let overlap = (rho.matrix().adjoint() * sigma.matrix()).trace().re;
    let mixed = ((1.0 - rho.purity()) * (1.0 - sigma.purity())).max(0.0);
    Ok(overlap + mixed.sqrt())
}

/// Monotone interpolation weights `q_0 ≤ q_1 ≤ … ≤ q_T` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSchedule {
    q: Vec<f64>,
}

impl TrainSchedule {
    /// `q_t = t / T`.
    pub fn linear(total_steps: usize) -> Result<Self> {
        if total_steps == 0 {
            return Err(Error::invalid("schedule needs at least one step"));
        }
        Self::from_values(
            (0..=total_steps)
                .map(|t| t as f64 / total_steps as f64)
                .collect(),
        )
    }

    /// Explicit values for `t = 0..=T`.
    pub fn from_values(q: Vec<f64>) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::invalid(
                "schedule needs values for t = 0..=T with T >= 1",
            ));
        }
        if q.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("schedule values must lie in [0, 1]"));
        }
        if q.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("schedule must be non-decreasing"));
        }
        Ok(Self { q })
    }

    pub fn total_steps(&self) -> usize {
        self.q.len() - 1
    }

    pub fn q(&self, t: usize) -> f64 {
        self.q[t.min(self.q.len() - 1)]
    }
}

/// `(1-q)(1 - <ψ0|ρ|ψ0>) + q(1 - F_sup(ρ, I/d))`.
pub fn loss(
    rho: &DensityMatrix,
    t: usize,
    schedule: &TrainSchedule,
    psi0: &StateVector,
) -> Result<f64> {
    let d = rho.dim() as f64;
    let q = schedule.q(t);
    let fid = rho.expectation(psi0)?;
    let sf_haar = 1.0 / d + ((d - 1.0) * (1.0 - rho.purity()).max(0.0) / d).sqrt();
    let value = (1.0 - q) * (1.0 - fid) + q * (1.0 - sf_haar);
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("loss at step {t} (q = {q})")));
    }
    Ok(value)
}

/// Average data state after one round: `tr_B(V ρ V†)` with `V` the
/// `d_A d_B × d_A` step isometry.
pub fn average_step(rho: &DensityMatrix, iso: &DMatrix<C64>) -> Result<DensityMatrix> {
    let d_a = rho.dim();
    if iso.ncols() != d_a || iso.nrows() % d_a != 0 {
        return Err(Error::DimensionMismatch {
            expected: d_a,
            got: iso.ncols(),
            context: "isometry input dimension",
        });
    }
    let d_b = iso.nrows() / d_a;
    let vr = iso * rho.matrix();
    let mut out = DMatrix::<C64>::zeros(d_a, d_a);
    for b in 0..d_b {
        let block = iso.rows(b * d_a, d_a);
        let vb = vr.rows(b * d_a, d_a);
        out += vb * block.adjoint();
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub learning_rate: f64,
    pub max_iters: usize,
    pub fd_step: f64,
    pub tolerance: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            max_iters: 500,
            fd_step: 1e-3,
            tolerance: 1e-6,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Central finite-difference gradient of `f` at `x`.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> Result<f64>, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = f(&p)?;
            p[i] = x[i] - h;
            let down = f(&p)?;
            p[i] = x[i];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub circuit: HeaCircuit,
    pub loss: f64,
    pub iterations: usize,
    /// Loss after every accepted update, starting from the initial value.
    pub accepted_losses: Vec<f64>,
}

/// Loss of step `t` as a function of the circuit parameters.
fn step_objective<'a>(
    rho_prev: &'a DensityMatrix,
    template: &'a HeaCircuit,
    schedule: &'a TrainSchedule,
    t: usize,
    psi0: &'a StateVector,
) -> impl Fn(&[f64]) -> Result<f64> + 'a {
    move |params: &[f64]| {
        let c = HeaCircuit::new(template.n_qubits, template.layers, params.to_vec())?;
        let rho = average_step(rho_prev, &c.columns(rho_prev.dim())?)?;
        loss(&rho, t, schedule, psi0)
    }
}

/// Adam with finite-difference gradients. A proposed update is accepted only
/// if it does not increase the loss; otherwise the rate is halved. Stops
/// after `max_iters` gradient evaluations or once an accepted update changes
/// the loss by less than `tolerance`.
pub fn train_step(
    rho_prev: &DensityMatrix,
    init: &HeaCircuit,
    schedule: &TrainSchedule,
    t: usize,
    psi0: &StateVector,
    opts: &OptimizerSettings,
) -> Result<StepOutcome> {
    if init.n_qubits < rho_prev.dim().trailing_zeros() as usize {
        return Err(Error::invalid("circuit is smaller than the data register"));
    }
    let f = step_objective(rho_prev, init, schedule, t, psi0);
    let mut theta = init.params.clone();
    let mut current = f(&theta)?;
    let mut accepted = vec![current];
    let n = theta.len();
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let mut lr = opts.learning_rate;
    let mut iterations = 0;
    let mut adam_t = 0i32;
    while iterations < opts.max_iters {
        iterations += 1;
        let g = fd_gradient(&f, &theta, opts.fd_step)?;
        if let Some(bad) = g.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "gradient component {bad} at step {t}"
            )));
        }
        adam_t += 1;
        let mut proposal = theta.clone();
        for i in 0..n {
            m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * g[i];
            v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * g[i] * g[i];
            let mh = m[i] / (1.0 - opts.beta1.powi(adam_t));
            let vh = v[i] / (1.0 - opts.beta2.powi(adam_t));
            proposal[i] -= lr * mh / (vh.sqrt() + opts.epsilon);
        }
        let next = f(&proposal)?;
        if next <= current {
            let delta = current - next;
            theta = proposal;
            current = next;
            accepted.push(current);
            if delta < opts.tolerance {
                break;
            }
        } else {
            lr *= 0.5;
            if lr < 1e-12 {
                break;
            }
        }
    }
    Ok(StepOutcome {
        circuit: HeaCircuit::new(init.n_qubits, init.layers, theta)?,
        loss: current,
        iterations,
        accepted_losses: accepted,
    })
}

/// Everything needed to train and evaluate a QML-enhanced run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_data: usize,
    pub n_ancilla: usize,
    pub schedule: TrainSchedule,
    /// HEA layers per step; `2 (N_A + N_B)` when absent.
    pub layers: Option<usize>,
    pub param_seed: u64,
    pub sample_seed: u64,
    pub optimizer: OptimizerSettings,
    /// Independent post-measurement ensembles used for evaluation.
    pub ensembles: usize,
    pub shots: usize,
}

impl TrainConfig {
    pub fn new(n_data: usize, n_ancilla: usize, total_steps: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            n_data,
            n_ancilla,
            schedule: TrainSchedule::linear(total_steps)?,
            layers: None,
            param_seed: seed,
            sample_seed: mix(seed, 0x514d_4c),
            optimizer: OptimizerSettings::default(),
            ensembles: 20,
            shots: 50_000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn layers(&self) -> usize {
        self.layers.unwrap_or(2 * (self.n_data + self.n_ancilla))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_data == 0 {
            return Err(Error::invalid("n_data must be at least 1"));
        }
        if self.layers() == 0 || self.ensembles == 0 || self.shots < 2 {
            return Err(Error::invalid(
                "layers, ensembles and shots (>= 2) must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub q: f64,
    pub loss: f64,
    pub iterations: usize,
    pub params: Vec<f64>,
}

/// Mean over ensembles and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averaged {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub n_data: usize,
    pub n_ancilla: usize,
    pub layers: usize,
    pub steps: Vec<StepRecord>,
    /// Purity of the exact final average state.
    pub final_purity: f64,
    pub f1: Averaged,
    pub f4: Averaged,
}

impl TrainReport {
    pub fn circuits(&self) -> Result<Vec<HeaCircuit>> {
        let n = self.n_data + self.n_ancilla;
        self.steps
            .iter()
            .map(|s| HeaCircuit::new(n, self.layers, s.params.clone()))
            .collect()
    }
}

/// Final-step `F^(1)` and `F^(4)` averaged over independent sampled
/// ensembles of the circuits' HDT process started from `|0>`.
pub fn evaluate_circuits(
    circuits: &[HeaCircuit],
    n_data: usize,
    ensembles: usize,
    shots: usize,
    sample_seed: u64,
) -> Result<(Averaged, Averaged)> {
    let d_a = 1usize << n_data;
    let isos: Vec<StepIsometry> = circuits
        .iter()
        .map(|c| StepIsometry::new(d_a, (1 << c.n_qubits) / d_a, c.columns(d_a)?))
        .collect::<Result<_>>()?;
    let last = isos.len();
    let mut f1 = Vec::with_capacity(ensembles);
    let mut f4 = Vec::with_capacity(ensembles);
    for e in 0..ensembles {
        run_sampled_with_isometries(&isos, shots, mix(sample_seed, e as u64), |step, ens| {
            if step == last {
                let fs = frame_potentials(&ens, &[1, 4])?;
                f1.push(fs[0].value);
                f4.push(fs[1].value);
            }
            Ok(())
        })?;
    }
    let avg = |xs: &[f64]| {
        let (mean, stderr) = mean_stderr(xs);
        Averaged {
            mean,
            stderr: if xs.len() > 1 { stderr } else { 0.0 },
        }
    };
    Ok((avg(&f1), avg(&f4)))
}

/// Trains every step in sequence, feeding the exact average state forward,
/// then evaluates the trained process on sampled ensembles.
pub fn train_hdt(cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    let n = cfg.n_data + cfg.n_ancilla;
    let layers = cfg.layers();
    let psi0 = StateVector::zero(cfg.n_data)?;
    let mut rho = psi0.density();
    let mut steps = Vec::with_capacity(cfg.schedule.total_steps());
    let mut circuits = Vec::with_capacity(cfg.schedule.total_steps());
    for t in 1..=cfg.schedule.total_steps() {
        let init = HeaCircuit::random(n, layers, &RngStream::new(cfg.param_seed, t as u64))?;
        let out = train_step(&rho, &init, &cfg.schedule, t, &psi0, &cfg.optimizer)?;
        rho = average_step(&rho, &out.circuit.columns(1 << cfg.n_data)?)?;
        log::debug!(
            "step {t}: loss {:.6} after {} iterations",
            out.loss,
            out.iterations
        );
        steps.push(StepRecord {
            step: t,
            q: cfg.schedule.q(t),
            loss: out.loss,
            iterations: out.iterations,
            params: out.circuit.params.clone(),
        });
        circuits.push(out.circuit);
    }
    let (f1, f4) = evaluate_circuits(
        &circuits,
        cfg.n_data,
        cfg.ensembles,
        cfg.shots,
        cfg.sample_seed,
    )?;
    Ok(TrainReport {
        n_data: cfg.n_data,
        n_ancilla: cfg.n_ancilla,
        layers,
        steps,
        final_purity: rho.purity(),
        f1,
        f4,
    })
}
