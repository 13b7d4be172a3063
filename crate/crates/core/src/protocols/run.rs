use rand::Rng;

use super::{build_step_isometry, ProjectedEnsemble, ProtocolConfig, SamplingMode, StepIsometry};
use crate::quantum::{StateVector, BRANCH_PRUNE};
use crate::rng::RngStream;
use crate::{Error, Result, C64};

/// One distinct history: its weight, outcomes, and normalised data block
/// (`d_A × cols`, column-major).
pub(crate) struct Node {
    pub history: Vec<u32>,
    pub prob: f64,
    pub amps: Vec<C64>,
    /// Trajectory ids sharing this history (sampled mode).
    pub members: Vec<u32>,
}

fn normalize(mut v: Vec<C64>, p: f64) -> Vec<C64> {
    let s = 1.0 / p.sqrt();
    for z in v.iter_mut() {
        *z *= s;
    }
    v
}

/// Enumerates every history with nonzero probability, calling `f(step, nodes)`
/// after each step (steps counted from 1).
pub(crate) fn exact_engine(
    steps: usize,
    provider: &dyn Fn(usize) -> Result<StepIsometry>,
    init: Vec<C64>,
    cols: usize,
    mut f: impl FnMut(usize, &[Node]) -> Result<()>,
) -> Result<()> {
    let mut nodes = vec![Node {
        history: Vec::new(),
        prob: 1.0,
        amps: init,
        members: Vec::new(),
    }];
    for step in 0..steps {
        let v = provider(step)?;
        let mut next = Vec::with_capacity(nodes.len() * v.d_ancilla());
        for node in &nodes {
            let (probs, blocks) = v.split(&node.amps, cols);
            for (b, (p, block)) in probs.into_iter().zip(blocks).enumerate() {
                if p <= BRANCH_PRUNE {
                    continue;
                }
                let mut history = node.history.clone();
                history.push(b as u32);
                next.push(Node {
                    history,
                    prob: node.prob * p,
                    amps: normalize(block, p),
                    members: Vec::new(),
                });
            }
        }
        nodes = next;
        f(step + 1, &nodes)?;
    }
    Ok(())
}

/// Stream for the Born draw of trajectory `traj` at `step`.
pub(crate) fn draw_stream(sample_seed: u64, traj: u32, step: usize) -> RngStream {
    RngStream::new(sample_seed, traj as u64).derive(step as u64)
}

/// Born-samples `shots` trajectories. Trajectories with identical histories
/// are propagated together; every trajectory still uses its own random
/// stream, so results do not depend on the grouping.
pub(crate) fn sampled_engine(
    steps: usize,
    provider: &dyn Fn(usize) -> Result<StepIsometry>,
    shots: usize,
    sample_seed: u64,
    init: Vec<C64>,
    cols: usize,
    mut f: impl FnMut(usize, &[Node]) -> Result<()>,
) -> Result<()> {
    if shots == 0 || shots > u32::MAX as usize {
        return Err(Error::invalid(format!("shots = {shots} out of range")));
    }
    let mut nodes = vec![Node {
        history: Vec::new(),
        prob: 1.0,
        amps: init,
        members: (0..shots as u32).collect(),
    }];
    for step in 0..steps {
        let v = provider(step)?;
        let mut next = Vec::new();
        for node in &nodes {
            let (probs, blocks) = v.split(&node.amps, cols);
            let total: f64 = probs.iter().sum();
            let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); probs.len()];
            for &traj in &node.members {
                let u: f64 = draw_stream(sample_seed, traj, step).rng().random::<f64>() * total;
                let mut acc = 0.0;
                let mut pick = None;
                for (b, &p) in probs.iter().enumerate() {
                    if p <= BRANCH_PRUNE {
                        continue;
                    }
                    acc += p;
                    pick = Some(b);
                    if u < acc {
                        break;
                    }
                }
                buckets[pick.expect("at least one branch has mass")].push(traj);
            }
            for (b, (members, block)) in buckets.into_iter().zip(blocks).enumerate() {
                if members.is_empty() {
                    continue;
                }
                let mut history = node.history.clone();
                history.push(b as u32);
                next.push(Node {
                    history,
                    prob: members.len() as f64 / shots as f64,
                    amps: normalize(block, probs[b]),
                    members,
                });
            }
        }
        nodes = next;
        f(step + 1, &nodes)?;
    }
    Ok(())
}

fn zero_data(d_a: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d_a];
    v[0] = C64::new(1.0, 0.0);
    v
}

fn node_states(n_data: usize, nodes: &[Node]) -> (Vec<Vec<u32>>, Vec<StateVector>) {
    (
        nodes.iter().map(|n| n.history.clone()).collect(),
        nodes
            .iter()
            .map(|n| StateVector::from_raw(n_data, n.amps.clone()))
            .collect(),
    )
}

fn to_exact(n_data: usize, nodes: &[Node]) -> ProjectedEnsemble {
    let (h, s) = node_states(n_data, nodes);
    ProjectedEnsemble::exact_parts(n_data, h, s, nodes.iter().map(|n| n.prob).collect())
}

fn to_sampled(n_data: usize, nodes: &[Node]) -> ProjectedEnsemble {
    let (h, s) = node_states(n_data, nodes);
    let counts = nodes.iter().map(|n| n.members.len() as u64).collect();
    ProjectedEnsemble::sampled_parts(n_data, h, s, counts)
}

fn check_isometries(isos: &[StepIsometry]) -> Result<usize> {
    let first = isos
        .first()
        .ok_or_else(|| Error::invalid("at least one step is required"))?;
    let d_a = first.d_data();
    if !d_a.is_power_of_two() || isos.iter().any(|v| v.d_data() != d_a) {
        return Err(Error::invalid(
            "steps must share a power-of-two data dimension",
        ));
    }
    Ok(d_a)
}

/// Exact ensembles for an explicit sequence of step isometries.
pub fn run_exact_with_isometries(isos: &[StepIsometry]) -> Result<Vec<ProjectedEnsemble>> {
    let d_a = check_isometries(isos)?;
    let n_data = d_a.trailing_zeros() as usize;
    let mut out = Vec::with_capacity(isos.len());
    let provider = |s: usize| Ok(isos[s].clone());
    exact_engine(isos.len(), &provider, zero_data(d_a), 1, |_, nodes| {
        out.push(to_exact(n_data, nodes));
        Ok(())
    })?;
    Ok(out)
}

/// Sampled ensembles for an explicit sequence of step isometries, calling
/// `f(step, ensemble)` for `step = 1..=T`.
pub fn run_sampled_with_isometries(
    isos: &[StepIsometry],
    shots: usize,
    sample_seed: u64,
    mut f: impl FnMut(usize, ProjectedEnsemble) -> Result<()>,
) -> Result<()> {
    let d_a = check_isometries(isos)?;
    let n_data = d_a.trailing_zeros() as usize;
    let provider = |s: usize| Ok(isos[s].clone());
    sampled_engine(
        isos.len(),
        &provider,
        shots,
        sample_seed,
        zero_data(d_a),
        1,
        |step, nodes| f(step, to_sampled(n_data, nodes)),
    )
}

/// Exact projected ensembles, handed to `f(step, ensemble)` for
/// `step = 1..=T` without retaining earlier steps.
pub fn run_hdt_exact_each(
    cfg: &ProtocolConfig,
    mut f: impl FnMut(usize, ProjectedEnsemble) -> Result<()>,
) -> Result<()> {
    if cfg.mode != SamplingMode::Exact {
        return Err(Error::WrongMode("exact enumeration needs mode = exact"));
    }
    cfg.check_exact_cap()?;
    cfg.check_dense_cap()?;
    let provider = |s: usize| build_step_isometry(cfg, s);
    exact_engine(
        cfg.steps,
        &provider,
        zero_data(cfg.d_data()),
        1,
        |step, nodes| f(step, to_exact(cfg.n_data, nodes)),
    )
}

pub fn run_hdt_exact(cfg: &ProtocolConfig) -> Result<Vec<ProjectedEnsemble>> {
    let mut out = Vec::with_capacity(cfg.steps);
    run_hdt_exact_each(cfg, |_, e| {
        out.push(e);
        Ok(())
    })?;
    Ok(out)
}

/// Sampled projected ensembles for `step = 1..=T`.
pub fn run_hdt_sampled_each(
    cfg: &ProtocolConfig,
    mut f: impl FnMut(usize, ProjectedEnsemble) -> Result<()>,
) -> Result<()> {
    let SamplingMode::MonteCarlo { shots } = cfg.mode else {
        return Err(Error::WrongMode("sampling needs mode = monte_carlo"));
    };
    cfg.check_dense_cap()?;
    let provider = |s: usize| build_step_isometry(cfg, s);
    sampled_engine(
        cfg.steps,
        &provider,
        shots,
        cfg.sample_seed,
        zero_data(cfg.d_data()),
        1,
        |step, nodes| f(step, to_sampled(cfg.n_data, nodes)),
    )
}

pub fn run_hdt_sampled(cfg: &ProtocolConfig) -> Result<Vec<ProjectedEnsemble>> {
    let mut out = Vec::with_capacity(cfg.steps);
    run_hdt_sampled_each(cfg, |_, e| {
        out.push(e);
        Ok(())
    })?;
    Ok(out)
}

/// Single-step DT ensemble (the first step of the configured process).
pub fn run_dt(cfg: &ProtocolConfig) -> Result<ProjectedEnsemble> {
    let mut one = cfg.clone();
    one.steps = 1;
    let mut out = match one.mode {
        SamplingMode::Exact => run_hdt_exact(&one)?,
        SamplingMode::MonteCarlo { .. } => run_hdt_sampled(&one)?,
    };
    Ok(out.remove(0))
}
