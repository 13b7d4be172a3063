use nalgebra::DMatrix;

use super::{HeaCircuit, ProtocolConfig, UnitarySource};
use crate::quantum::{haar_isometry, sample_haar_unitary, UnitaryMatrix};
use crate::rng::RngStream;
use crate::{Error, Result, C64};

/// The step unitary restricted to ancilla input `|0>`: a `d_A d_B × d_A`
/// isometry whose column `a` is `U |a>_A |0>_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepIsometry {
    d_a: usize,
    d_b: usize,
    m: DMatrix<C64>,
}

impl StepIsometry {
    pub fn new(d_a: usize, d_b: usize, m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != d_a * d_b || m.ncols() != d_a {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                got: m.nrows(),
                context: "step isometry shape",
            });
        }
        Ok(Self { d_a, d_b, m })
    }

    /// Columns of a full unitary on `A ⊗ B` with ancilla input `|0>`.
    pub fn from_unitary(d_a: usize, d_b: usize, u: &UnitaryMatrix) -> Result<Self> {
        if u.dim() != d_a * d_b {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                got: u.dim(),
                context: "step unitary dimension",
            });
        }
        Self::new(d_a, d_b, u.matrix().columns(0, d_a).into_owned())
    }

    pub fn d_data(&self) -> usize {
        self.d_a
    }

    pub fn d_ancilla(&self) -> usize {
        self.d_b
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    /// `out = V psi` for a data vector `psi`.
    #[inline]
    pub fn apply_into(&self, psi: &[C64], out: &mut [C64]) {
        let d = self.d_a * self.d_b;
        debug_assert_eq!(psi.len(), self.d_a);
        debug_assert_eq!(out.len(), d);
        out.fill(C64::new(0.0, 0.0));
        let data = self.m.as_slice();
        for (a, &p) in psi.iter().enumerate() {
            if p.re == 0.0 && p.im == 0.0 {
                continue;
            }
            let col = &data[a * d..(a + 1) * d];
            for (o, &v) in out.iter_mut().zip(col) {
                *o += v * p;
            }
        }
    }

    /// Applies the step to each of `cols` data columns (`amps` column-major,
    /// `d_A` rows) and splits by ancilla outcome. Returns per-outcome
    /// probability mass and unnormalised `d_A × cols` blocks.
    pub(crate) fn split(&self, amps: &[C64], cols: usize) -> (Vec<f64>, Vec<Vec<C64>>) {
        let (d_a, d_b) = (self.d_a, self.d_b);
        let d = d_a * d_b;
        let mut w = vec![C64::new(0.0, 0.0); d];
        let mut blocks = vec![vec![C64::new(0.0, 0.0); d_a * cols]; d_b];
        for c in 0..cols {
            self.apply_into(&amps[c * d_a..(c + 1) * d_a], &mut w);
            for (b, block) in blocks.iter_mut().enumerate() {
                block[c * d_a..(c + 1) * d_a].copy_from_slice(&w[b * d_a..(b + 1) * d_a]);
            }
        }
        let probs = blocks
            .iter()
            .map(|blk| blk.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        (probs, blocks)
    }
}

fn check_step(cfg: &ProtocolConfig, step: usize) -> Result<()> {
    if step >= cfg.steps {
        return Err(Error::IndexOutOfRange {
            what: "step",
            index: step,
            size: cfg.steps,
        });
    }
    cfg.check_dense_cap()
}

fn hea_circuit(
    cfg: &ProtocolConfig,
    layers: usize,
    param_seed: u64,
    step: usize,
) -> Result<HeaCircuit> {
    HeaCircuit::random(
        cfg.n_data + cfg.n_ancilla,
        layers,
        &RngStream::new(param_seed, step as u64),
    )
}

/// Dense step unitary on `A ⊗ B`.
pub fn build_step_unitary(cfg: &ProtocolConfig, step: usize) -> Result<UnitaryMatrix> {
    check_step(cfg, step)?;
    let dim = cfg.d_data() * cfg.d_ancilla();
    match &cfg.unitary_source {
        UnitarySource::HaarFixed { seed } => {
            sample_haar_unitary(dim, &RngStream::new(*seed, step as u64))
        }
        UnitarySource::Hea { layers, param_seed } => {
            hea_circuit(cfg, *layers, *param_seed, step)?.unitary()
        }
    }
}

/// The isometry of step `step`; its columns equal the first `d_A` columns of
/// [`build_step_unitary`] for the same configuration.
pub fn build_step_isometry(cfg: &ProtocolConfig, step: usize) -> Result<StepIsometry> {
    check_step(cfg, step)?;
    let (d_a, d_b) = (cfg.d_data(), cfg.d_ancilla());
    let m = match &cfg.unitary_source {
        UnitarySource::HaarFixed { seed } => haar_isometry(
            d_a * d_b,
            d_a,
            &mut RngStream::new(*seed, step as u64).rng(),
        )?,
        UnitarySource::Hea { layers, param_seed } => {
            hea_circuit(cfg, *layers, *param_seed, step)?.columns(d_a)?
        }
    };
    StepIsometry::new(d_a, d_b, m)
}
