use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{StateVector, EIGEN_CLIP, STATE_TOL};
use crate::{Error, Result, C64};

/// A Hermitian, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

/// Entropies in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entropies {
    pub von_neumann: f64,
    pub renyi2: f64,
    pub purity: f64,
}

impl DensityMatrix {
    /// Validates squareness, Hermiticity and unit trace.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
                context: "density matrix must be square",
            });
        }
        let dev = hermitian_deviation(&m);
        if dev > STATE_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::invalid(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        Self { m }
    }

    pub fn from_pure(s: &StateVector) -> Self {
        s.density()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        m.fill_diagonal(C64::new(1.0 / dim as f64, 0.0));
        Self { m }
    }

    /// Probability-weighted mixture of pure states.
    pub fn mixture<'a>(items: impl IntoIterator<Item = (f64, &'a StateVector)>) -> Result<Self> {
        let mut m: Option<DMatrix<C64>> = None;
        for (p, s) in items {
            let v = nalgebra::DVector::from_column_slice(s.amplitudes());
            let term = (&v * v.adjoint()) * C64::new(p, 0.0);
            m = Some(match m {
                Some(acc) if acc.nrows() != term.nrows() => {
                    return Err(Error::DimensionMismatch {
                        expected: acc.nrows(),
                        got: term.nrows(),
                        context: "mixture components",
                    })
                }
                Some(acc) => acc + term,
                None => term,
            });
        }
        m.map(Self::new)
            .unwrap_or_else(|| Err(Error::invalid("empty mixture")))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    /// tr(rho^2), computed as the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// <psi|rho|psi>
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.dim(),
                context: "expectation value",
            });
        }
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Ok((v.adjoint() * &self.m * &v)[(0, 0)].re)
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn entropies(&self) -> Entropies {
        let von_neumann = self
            .eigenvalues()
            .into_iter()
            .filter(|&l| l > EIGEN_CLIP)
            .map(|l| -l * l.log2())
            .sum::<f64>()
            .max(0.0);
        let purity = self.purity();
        Entropies {
            von_neumann,
            renyi2: -purity.log2(),
            purity,
        }
    }
}

fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn maximally_mixed_entropy() {
        for n in 1..=4 {
            let e = DensityMatrix::maximally_mixed(1 << n).entropies();
            assert_abs_diff_eq!(e.von_neumann, n as f64, epsilon = 1e-10);
            assert_abs_diff_eq!(e.renyi2, n as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn pure_state_entropy_is_zero() {
        let e = StateVector::basis_state(2, 1)
            .unwrap()
            .density()
            .entropies();
        assert_abs_diff_eq!(e.von_neumann, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.purity, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5, 0.0),
                C64::new(0.3, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.5, 0.0),
            ],
        );
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rejects_bad_trace() {
        let m = DMatrix::from_diagonal_element(2, 2, C64::new(1.0, 0.0));
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn mixture_of_basis_states() {
        let a = StateVector::basis_state(1, 0).unwrap();
        let b = StateVector::basis_state(1, 1).unwrap();
        let rho = DensityMatrix::mixture([(0.25, &a), (0.75, &b)]).unwrap();
        assert_abs_diff_eq!(rho.expectation(&b).unwrap(), 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.purity(), 0.625, epsilon = 1e-14);
    }
}
