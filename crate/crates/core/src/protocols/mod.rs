//! Deep thermalization (one unitary, one measurement) and holographic deep
//! thermalization (repeated unitary, measure, reset) on a data register `A`
//! with an ancilla register `B`.
//!
//! Layout: data qubits are the low bits, ancilla qubits the high bits, so a
//! joint index is `a + d_A * b`.

mod ensemble;
mod hea;
mod reference;
mod run;
mod step;

use serde::{Deserialize, Serialize};

use crate::rng::mix;
use crate::{Error, Result};

pub use ensemble::{EnsembleMode, ProjectedEnsemble};
pub use hea::HeaCircuit;
pub use reference::{run_with_reference, run_with_reference_each, ReferenceBranch};
pub use run::{
    run_dt, run_exact_with_isometries, run_hdt_exact, run_hdt_exact_each, run_hdt_sampled,
    run_hdt_sampled_each, run_sampled_with_isometries,
};
pub use step::{build_step_isometry, build_step_unitary, StepIsometry};

/// Default cap on `n_ancilla * steps` for exact enumeration.
pub const DEFAULT_EXACT_CAP: usize = 16;
/// Default cap on `n_data + n_ancilla` for dense step operators.
pub const DEFAULT_DENSE_CAP: usize = 14;

/// Where the step unitaries come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitarySource {
    /// Independent Haar unitaries, deterministic in `(seed, step)`.
    HaarFixed { seed: u64 },
    /// Hardware-efficient ansatz with uniformly random angles drawn from
    /// `(param_seed, step)`.
    Hea { layers: usize, param_seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplingMode {
    Exact,
    MonteCarlo { shots: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub n_data: usize,
    pub n_ancilla: usize,
    pub steps: usize,
    pub unitary_source: UnitarySource,
    pub mode: SamplingMode,
    pub realizations: usize,
    /// Seed for Born-rule sampling of trajectories.
    pub sample_seed: u64,
    pub exact_cap: usize,
    pub dense_cap: usize,
}

impl ProtocolConfig {
    pub fn new(
        n_data: usize,
        n_ancilla: usize,
        steps: usize,
        unitary_source: UnitarySource,
        mode: SamplingMode,
    ) -> Result<Self> {
        let cfg = Self {
            n_data,
            n_ancilla,
            steps,
            unitary_source,
            mode,
            realizations: 1,
            sample_seed: 0,
            exact_cap: DEFAULT_EXACT_CAP,
            dense_cap: DEFAULT_DENSE_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Haar step unitaries with the same seed used for trajectory sampling.
    pub fn haar(
        n_data: usize,
        n_ancilla: usize,
        steps: usize,
        mode: SamplingMode,
        seed: u64,
    ) -> Result<Self> {
        let mut cfg = Self::new(
            n_data,
            n_ancilla,
            steps,
            UnitarySource::HaarFixed { seed },
            mode,
        )?;
        cfg.sample_seed = mix(seed, 0x5a4d_504c_4553);
        Ok(cfg)
    }

    pub fn with_realizations(mut self, realizations: usize) -> Self {
        self.realizations = realizations;
        self
    }

    pub fn with_sample_seed(mut self, seed: u64) -> Self {
        self.sample_seed = seed;
        self
    }

    pub fn with_dense_cap(mut self, cap: usize) -> Self {
        self.dense_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_data == 0 {
            return Err(Error::invalid("n_data must be at least 1"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps must be at least 1"));
        }
        if self.realizations == 0 {
            return Err(Error::invalid("realizations must be at least 1"));
        }
        if let SamplingMode::MonteCarlo { shots: 0 } = self.mode {
            return Err(Error::invalid("shots must be at least 1"));
        }
        if let UnitarySource::Hea { layers: 0, .. } = self.unitary_source {
            return Err(Error::invalid("HEA needs at least one layer"));
        }
        Ok(())
    }

    pub fn d_data(&self) -> usize {
        1 << self.n_data
    }

    pub fn d_ancilla(&self) -> usize {
        1 << self.n_ancilla
    }

    pub fn check_dense_cap(&self) -> Result<()> {
        let n = self.n_data + self.n_ancilla;
        if n > self.dense_cap {
            return Err(Error::CapExceeded {
                what: "dense step qubits",
                requested: n as u128,
                cap: self.dense_cap as u128,
            });
        }
        Ok(())
    }

    pub fn check_exact_cap(&self) -> Result<()> {
        let measured = self.n_ancilla * self.steps;
        if measured > self.exact_cap {
            return Err(Error::CapExceeded {
                what: "exactly enumerated measured qubits",
                requested: measured as u128,
                cap: self.exact_cap as u128,
            });
        }
        Ok(())
    }

    /// The same protocol with seeds for independent realization `r`.
    /// Realization 0 keeps the configured seeds.
    pub fn for_realization(&self, r: usize) -> Self {
        let mut out = self.clone();
        out.realizations = 1;
        if r == 0 {
            return out;
        }
        let r = r as u64;
        out.unitary_source = match &self.unitary_source {
            UnitarySource::HaarFixed { seed } => UnitarySource::HaarFixed {
                seed: mix(*seed, r),
            },
            UnitarySource::Hea { layers, param_seed } => UnitarySource::Hea {
                layers: *layers,
                param_seed: mix(*param_seed, r),
            },
        };
        out.sample_seed = mix(self.sample_seed, r);
        out
    }
}
