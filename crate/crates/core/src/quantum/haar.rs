use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{StateVector, UnitaryMatrix};
use crate::rng::RngStream;
use crate::{Error, Result, C64};

/// Haar-random isometry: the first `cols` columns of a Haar unitary on `dim`.
///
/// Entries are drawn column by column from a complex Ginibre ensemble and
/// orthonormalised with twice-iterated Gram–Schmidt. This is the phase-fixed
/// QR factor (positive real diagonal of R), so the prefix property holds:
/// `haar_isometry(d, k, rng)` equals the first `k` columns of
/// `haar_unitary(d, rng)` for the same generator state.
pub fn haar_isometry<R: Rng + ?Sized>(
    dim: usize,
    cols: usize,
    rng: &mut R,
) -> Result<DMatrix<C64>> {
    if cols == 0 || cols > dim {
        return Err(Error::invalid(format!(
            "isometry needs 1 <= cols <= dim, got cols={cols}, dim={dim}"
        )));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut q = DMatrix::<C64>::zeros(dim, cols);
    for j in 0..cols {
        loop {
            for i in 0..dim {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                q[(i, j)] = C64::new(re * scale, im * scale);
            }
            if orthonormalize_column(&mut q, j) {
                break;
            }
        }
    }
    Ok(q)
}

fn orthonormalize_column(q: &mut DMatrix<C64>, j: usize) -> bool {
    let dim = q.nrows();
    let norm0: f64 = q.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _ in 0..2 {
        for k in 0..j {
            let mut proj = C64::new(0.0, 0.0);
            for i in 0..dim {
                proj += q[(i, k)].conj() * q[(i, j)];
            }
            for i in 0..dim {
                let qik = q[(i, k)];
                q[(i, j)] -= proj * qik;
            }
        }
    }
    let norm: f64 = q.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 1e-10 * norm0.max(1.0)) {
        return false;
    }
    for i in 0..dim {
        q[(i, j)] /= norm;
    }
    true
}

pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    haar_isometry(dim, dim, rng).map(UnitaryMatrix::from_matrix_unchecked)
}

/// Haar unitary drawn from a fresh generator for `stream`.
pub fn sample_haar_unitary(dim: usize, stream: &RngStream) -> Result<UnitaryMatrix> {
    haar_unitary(dim, &mut stream.rng())
}

/// Haar-random pure state on `n_qubits` qubits.
pub fn haar_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<StateVector> {
    let col = haar_isometry(1 << n_qubits, 1, rng)?;
    Ok(StateVector::from_raw(
        n_qubits,
        col.iter().copied().collect(),
    ))
}
