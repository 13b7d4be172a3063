//! Dense statevector and density-matrix primitives.
//!
//! Qubit ordering is little-endian throughout: qubit 0 is the least
//! significant bit of a basis index. Bitstrings rendered as text are written
//! most-significant qubit first.

mod density;
mod haar;
mod state;
mod unitary;

pub use density::{DensityMatrix, Entropies};
pub use haar::{haar_isometry, haar_state, haar_unitary, sample_haar_unitary};
pub use state::{format_bitstring, MeasurementBranch, StateVector, UnnormalizedState};
pub use unitary::UnitaryMatrix;

/// Branches with probability at or below this are dropped during measurement.
pub const BRANCH_PRUNE: f64 = 1e-15;
/// Tolerance on normalisation, Hermiticity, unitarity and trace checks.
pub const STATE_TOL: f64 = 1e-9;
/// Eigenvalues below this are ignored in entropy logarithms.
pub const EIGEN_CLIP: f64 = 1e-12;

pub(crate) fn check_targets(targets: &[usize], n_qubits: usize) -> crate::Result<()> {
    let mut seen = 0u128;
    for &q in targets {
        if q >= n_qubits {
            return Err(crate::Error::IndexOutOfRange {
                what: "qubit register",
                index: q,
                size: n_qubits,
            });
        }
        if seen & (1u128 << q) != 0 {
            return Err(crate::Error::DuplicateTarget(q));
        }
        seen |= 1u128 << q;
    }
    Ok(())
}

/// Gather the bits of `index` at positions `qubits` into a compact integer
/// (bit j of the result is bit `qubits[j]` of `index`).
#[inline]
pub(crate) fn gather_bits(index: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | (((index >> q) & 1) << j))
}

/// Inverse of [`gather_bits`]: place bit j of `compact` at position `qubits[j]`.
#[inline]
pub(crate) fn scatter_bits(compact: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | (((compact >> j) & 1) << q))
}
