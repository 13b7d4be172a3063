use super::run::{exact_engine, sampled_engine, Node};
use super::{build_step_isometry, ProtocolConfig, SamplingMode};
use crate::quantum::StateVector;
use crate::{Result, C64};

/// Conditional joint state of reference `R` and data `A` for one history.
/// Data qubits are the low bits of `joint`, reference qubits the high bits.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceBranch {
    pub history: Vec<u32>,
    pub prob: f64,
    /// Number of trajectories with this history (sampled mode).
    pub count: Option<u64>,
    pub joint: StateVector,
}

fn branches(cfg: &ProtocolConfig, nodes: &[Node], sampled: bool) -> Vec<ReferenceBranch> {
    nodes
        .iter()
        .map(|n| ReferenceBranch {
            history: n.history.clone(),
            prob: n.prob,
            count: sampled.then_some(n.members.len() as u64),
            joint: StateVector::from_raw(2 * cfg.n_data, n.amps.clone()),
        })
        .collect()
}

/// Runs the process with `A` initially maximally entangled with an
/// `N_A`-qubit reference. Calls `f(step, branches)` for `step = 0..=T`.
pub fn run_with_reference_each(
    cfg: &ProtocolConfig,
    mut f: impl FnMut(usize, &[ReferenceBranch]) -> Result<()>,
) -> Result<()> {
    cfg.validate()?;
    let d_a = cfg.d_data();
    let amp = C64::new(1.0 / (d_a as f64).sqrt(), 0.0);
    let mut init = vec![C64::new(0.0, 0.0); d_a * d_a];
    for i in 0..d_a {
        init[i + d_a * i] = amp;
    }
    let sampled = matches!(cfg.mode, SamplingMode::MonteCarlo { .. });
    let start = ReferenceBranch {
        history: Vec::new(),
        prob: 1.0,
        count: match cfg.mode {
            SamplingMode::MonteCarlo { shots } => Some(shots as u64),
            SamplingMode::Exact => None,
        },
        joint: StateVector::from_raw(2 * cfg.n_data, init.clone()),
    };
    f(0, std::slice::from_ref(&start))?;
    cfg.check_dense_cap()?;
    let provider = |s: usize| build_step_isometry(cfg, s);
    match cfg.mode {
        SamplingMode::Exact => {
            cfg.check_exact_cap()?;
            exact_engine(cfg.steps, &provider, init, d_a, |step, nodes| {
                f(step, &branches(cfg, nodes, sampled))
            })
        }
        SamplingMode::MonteCarlo { shots } => sampled_engine(
            cfg.steps,
            &provider,
            shots,
            cfg.sample_seed,
            init,
            d_a,
            |step, nodes| f(step, &branches(cfg, nodes, sampled)),
        ),
    }
}

/// Collected form of [`run_with_reference_each`]; index `t` holds step `t`.
pub fn run_with_reference(cfg: &ProtocolConfig) -> Result<Vec<Vec<ReferenceBranch>>> {
    let mut out = Vec::with_capacity(cfg.steps + 1);
    run_with_reference_each(cfg, |_, b| {
        out.push(b.to_vec());
        Ok(())
    })?;
    Ok(out)
}
