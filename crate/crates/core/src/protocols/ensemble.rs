use serde::{Deserialize, Serialize};

use crate::quantum::StateVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleMode {
    Exact,
    Sampled,
}

/// Conditional data-register states with their weights.
///
/// Exact ensembles hold one entry per measurement history. Sampled ensembles
/// represent `shots` equally weighted trajectories; trajectories sharing a
/// history are stored once with a multiplicity (their states coincide
/// bit for bit).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedEnsemble {
    n_data: usize,
    mode: EnsembleMode,
    histories: Vec<Vec<u32>>,
    states: Vec<StateVector>,
    weights: Vec<f64>,
    counts: Vec<u64>,
    shots: u64,
}

impl ProjectedEnsemble {
    pub(crate) fn exact_parts(
        n_data: usize,
        histories: Vec<Vec<u32>>,
        states: Vec<StateVector>,
        weights: Vec<f64>,
    ) -> Self {
        Self {
            n_data,
            mode: EnsembleMode::Exact,
            histories,
            states,
            weights,
            counts: Vec::new(),
            shots: 0,
        }
    }

    pub(crate) fn sampled_parts(
        n_data: usize,
        histories: Vec<Vec<u32>>,
        states: Vec<StateVector>,
        counts: Vec<u64>,
    ) -> Self {
        let shots: u64 = counts.iter().sum();
        let weights = counts.iter().map(|&c| c as f64 / shots as f64).collect();
        Self {
            n_data,
            mode: EnsembleMode::Sampled,
            histories,
            states,
            weights,
            counts,
            shots,
        }
    }

    /// Exact ensemble from explicit `(probability, state)` pairs.
    pub fn from_weighted(entries: Vec<(f64, StateVector)>) -> Result<Self> {
        let n_data = check_uniform(entries.iter().map(|(_, s)| s))?;
        let (weights, states): (Vec<f64>, Vec<StateVector>) = entries.into_iter().unzip();
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 || weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::invalid(format!(
                "ensemble weights must be non-negative and sum to 1, got {total}"
            )));
        }
        let histories = vec![Vec::new(); states.len()];
        Ok(Self::exact_parts(n_data, histories, states, weights))
    }

    /// Uniformly weighted ensemble of independent samples.
    pub fn from_samples(states: Vec<StateVector>) -> Result<Self> {
        let n_data = check_uniform(states.iter())?;
        let histories = vec![Vec::new(); states.len()];
        let counts = vec![1; states.len()];
        Ok(Self::sampled_parts(n_data, histories, states, counts))
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn mode(&self) -> EnsembleMode {
        self.mode
    }

    /// Number of entries: histories (exact) or trajectories (sampled).
    pub fn len(&self) -> usize {
        match self.mode {
            EnsembleMode::Exact => self.states.len(),
            EnsembleMode::Sampled => self.shots as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_distinct(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// Probability mass per distinct state.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn histories(&self) -> &[Vec<u32>] {
        &self.histories
    }

    /// Multiplicities of distinct states (sampled mode only).
    pub fn counts(&self) -> Option<&[u64]> {
        match self.mode {
            EnsembleMode::Exact => None,
            EnsembleMode::Sampled => Some(&self.counts),
        }
    }

    pub fn total_probability(&self) -> f64 {
        crate::stats::stable_sum(self.weights.iter().copied())
    }

    /// Every entry with its weight; sampled ensembles yield one entry per
    /// trajectory with weight `1/shots`.
    pub fn entries(&self) -> Box<dyn Iterator<Item = (f64, &StateVector)> + '_> {
        match self.mode {
            EnsembleMode::Exact => Box::new(self.weights.iter().copied().zip(&self.states)),
            EnsembleMode::Sampled => {
                let w = 1.0 / self.shots as f64;
                Box::new(
                    self.counts
                        .iter()
                        .zip(&self.states)
                        .flat_map(move |(&c, s)| std::iter::repeat_n((w, s), c as usize)),
                )
            }
        }
    }
}

fn check_uniform<'a>(mut states: impl Iterator<Item = &'a StateVector>) -> Result<usize> {
    let first = states
        .next()
        .ok_or_else(|| Error::invalid("ensemble must not be empty"))?;
    let n = first.n_qubits();
    for s in states {
        if s.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.n_qubits(),
                context: "ensemble member size",
            });
        }
    }
    Ok(n)
}
