use nalgebra::DMatrix;

use super::STATE_TOL;
use crate::{Error, Result, C64};

/// A square unitary matrix. Gate constructors act on qubits; other
/// constructions (e.g. replica permutations) may have any dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    m: DMatrix<C64>,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

impl UnitaryMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::invalid(format!(
                "unitary must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let u = Self { m };
        let dev = u.unitarity_deviation();
        if dev > STATE_TOL {
            return Err(Error::invalid(format!(
                "matrix is not unitary (deviation {dev:.3e})"
            )));
        }
        Ok(u)
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        Self { m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn pauli_x() -> Self {
        Self::from_rows(2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_rows(2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)])
    }

    /// exp(-i theta X / 2)
    pub fn rx(theta: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        Self::from_rows(2, &[c(co, 0.), c(0., -s), c(0., -s), c(co, 0.)])
    }

    /// exp(-i theta Y / 2)
    pub fn ry(theta: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        Self::from_rows(2, &[c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)])
    }

    /// Control on local qubit 0, target on local qubit 1.
    pub fn cnot() -> Self {
        Self::permutation(&[0, 3, 2, 1])
    }

    pub fn swap() -> Self {
        Self::permutation(&[0, 2, 1, 3])
    }

    pub fn cz() -> Self {
        let mut m = DMatrix::identity(4, 4);
        m[(3, 3)] = c(-1., 0.);
        Self { m }
    }

    /// Maps basis state `i` to `images[i]`.
    fn permutation(images: &[usize]) -> Self {
        let n = images.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &j) in images.iter().enumerate() {
            m[(j, i)] = c(1., 0.);
        }
        Self { m }
    }

    fn from_rows(n: usize, v: &[C64]) -> Self {
        Self {
            m: DMatrix::from_row_slice(n, n, v),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Number of qubits, if the dimension is a power of two.
    pub fn n_qubits(&self) -> Option<usize> {
        self.dim()
            .is_power_of_two()
            .then(|| self.dim().trailing_zeros() as usize)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    /// `self * rhs`: apply `rhs` first.
    pub fn compose(&self, rhs: &UnitaryMatrix) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rhs.dim(),
                context: "unitary product",
            });
        }
        Ok(Self {
            m: &self.m * &rhs.m,
        })
    }

    /// `high ⊗ self`, i.e. `self` acts on the low qubits.
    pub fn kron_high(&self, high: &UnitaryMatrix) -> Self {
        Self {
            m: high.m.kronecker(&self.m),
        }
    }

    /// Max-abs entry of U†U − I.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.m.adjoint() * &self.m;
        let n = p.nrows();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((p[(i, j)] - c(target, 0.)).norm());
            }
        }
        dev
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation() <= STATE_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::StateVector;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gates_are_unitary() {
        for g in [
            UnitaryMatrix::pauli_x(),
            UnitaryMatrix::hadamard(),
            UnitaryMatrix::cnot(),
            UnitaryMatrix::swap(),
            UnitaryMatrix::cz(),
            UnitaryMatrix::rx(0.37),
            UnitaryMatrix::ry(-1.2),
        ] {
            assert!(g.is_unitary());
        }
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        // |q1 q0> = |01>, control q0 = 1 -> |11>
        let s = StateVector::basis_state(2, 1).unwrap();
        let out = s.apply_unitary(&UnitaryMatrix::cnot(), &[0, 1]).unwrap();
        assert_eq!(out, StateVector::basis_state(2, 3).unwrap());
        let s = StateVector::basis_state(2, 2).unwrap();
        let out = s.apply_unitary(&UnitaryMatrix::cnot(), &[0, 1]).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn rotation_at_pi_matches_pauli() {
        let rx = UnitaryMatrix::rx(std::f64::consts::PI);
        let x = UnitaryMatrix::pauli_x();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    (rx.matrix()[(i, j)] - x.matrix()[(i, j)] * c(0., -1.)).norm(),
                    0.0,
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let m = DMatrix::from_element(2, 2, c(1., 0.));
        assert!(UnitaryMatrix::new(m).is_err());
        let m = DMatrix::from_element(2, 3, c(0., 0.));
        assert!(UnitaryMatrix::new(m).is_err());
        assert!(UnitaryMatrix::new(DMatrix::identity(3, 3)).is_ok());
    }

    #[test]
    fn kron_high_places_operands() {
        let u = UnitaryMatrix::identity(2).kron_high(&UnitaryMatrix::pauli_x());
        let s = StateVector::zero(2).unwrap();
        let out = s.apply_unitary(&u, &[0, 1]).unwrap();
        assert_eq!(out, StateVector::basis_state(2, 2).unwrap());
    }
}
