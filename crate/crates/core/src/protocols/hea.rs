use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::quantum::{StateVector, UnitaryMatrix};
use crate::rng::RngStream;
use crate::{Error, Result, C64};

/// Layered hardware-efficient ansatz. Each layer applies `RX(θ)` then
/// `RY(θ')` on every qubit, followed by CZ gates on even bonds `(0,1), (2,3),
/// ...` and then odd bonds `(1,2), (3,4), ...` (open boundary).
///
/// `params[2 * (layer * n_qubits + q)]` is the RX angle of qubit `q` in
/// `layer`; the RY angle follows it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaCircuit {
    pub n_qubits: usize,
    pub layers: usize,
    pub params: Vec<f64>,
}

fn rx(theta: f64) -> [C64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        C64::new(c, 0.),
        C64::new(0., -s),
        C64::new(0., -s),
        C64::new(c, 0.),
    ]
}

fn ry(theta: f64) -> [C64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        C64::new(c, 0.),
        C64::new(-s, 0.),
        C64::new(s, 0.),
        C64::new(c, 0.),
    ]
}

impl HeaCircuit {
    pub fn n_params(n_qubits: usize, layers: usize) -> usize {
        2 * n_qubits * layers
    }

    pub fn new(n_qubits: usize, layers: usize, params: Vec<f64>) -> Result<Self> {
        let expected = Self::n_params(n_qubits, layers);
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: params.len(),
                context: "HEA parameter count",
            });
        }
        if n_qubits == 0 || layers == 0 {
            return Err(Error::invalid("HEA needs at least one qubit and one layer"));
        }
        if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("HEA parameter {bad}")));
        }
        Ok(Self {
            n_qubits,
            layers,
            params,
        })
    }

    pub fn zeros(n_qubits: usize, layers: usize) -> Result<Self> {
        Self::new(
            n_qubits,
            layers,
            vec![0.0; Self::n_params(n_qubits, layers)],
        )
    }

    /// Angles uniform in `[0, 2π)` drawn from `stream`.
    pub fn random(n_qubits: usize, layers: usize, stream: &RngStream) -> Result<Self> {
        let mut rng = stream.rng();
        let params = (0..Self::n_params(n_qubits, layers))
            .map(|_| rng.random::<f64>() * TAU)
            .collect();
        Self::new(n_qubits, layers, params)
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: state.n_qubits(),
                context: "HEA register size",
            });
        }
        let n = self.n_qubits;
        for layer in 0..self.layers {
            for q in 0..n {
                let base = 2 * (layer * n + q);
                state.apply_1q(&rx(self.params[base]), q)?;
                state.apply_1q(&ry(self.params[base + 1]), q)?;
            }
            for start in [0, 1] {
                for a in (start..n.saturating_sub(1)).step_by(2) {
                    state.apply_cz(a, a + 1)?;
                }
            }
        }
        Ok(())
    }

    /// The first `n_cols` columns of the circuit unitary.
    pub fn columns(&self, n_cols: usize) -> Result<DMatrix<C64>> {
        let dim = 1usize << self.n_qubits;
        if n_cols > dim {
            return Err(Error::invalid("more columns requested than the dimension"));
        }
        let mut m = DMatrix::<C64>::zeros(dim, n_cols);
        for c in 0..n_cols {
            let mut s = StateVector::basis_state(self.n_qubits, c)?;
            self.apply(&mut s)?;
            m.column_mut(c).copy_from_slice(s.amplitudes());
        }
        Ok(m)
    }

    pub fn unitary(&self) -> Result<UnitaryMatrix> {
        let m = self.columns(1 << self.n_qubits)?;
        Ok(UnitaryMatrix::from_matrix_unchecked(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_angles_fix_all_zero_state() {
        let c = HeaCircuit::zeros(4, 3).unwrap();
        let mut s = StateVector::zero(4).unwrap();
        c.apply(&mut s).unwrap();
        assert_eq!(s, StateVector::zero(4).unwrap());
        // Only CZ gates remain: a diagonal ±1 matrix.
        let u = c.unitary().unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let z = u.matrix()[(i, j)];
                if i == j {
                    assert!((z.norm() - 1.0).abs() < 1e-15 && z.im == 0.0);
                } else {
                    assert_eq!(z, C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn random_circuit_is_unitary() {
        let c = HeaCircuit::random(3, 2, &RngStream::new(1, 2)).unwrap();
        assert!(c.unitary().unwrap().is_unitary());
        assert_eq!(c.params.len(), 12);
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(HeaCircuit::new(2, 2, vec![0.0; 7]).is_err());
    }

    #[test]
    fn single_qubit_layer_matches_gates() {
        let c = HeaCircuit::new(1, 1, vec![0.3, 1.1]).unwrap();
        let expect = UnitaryMatrix::ry(1.1)
            .compose(&UnitaryMatrix::rx(0.3))
            .unwrap();
        let got = c.unitary().unwrap();
        assert!((got.matrix() - expect.matrix()).norm() < 1e-14);
    }
}
