use nalgebra::DMatrix;
use rand::Rng;

use super::{check_targets, gather_bits, scatter_bits, DensityMatrix, UnitaryMatrix};
use super::{BRANCH_PRUNE, STATE_TOL};
use crate::{Error, Result, C64};

/// A normalised pure state on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

/// Unnormalised amplitudes, e.g. a measurement branch before rescaling.
/// Kept distinct from [`StateVector`] so that normalisation is never assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct UnnormalizedState {
    pub n_qubits: usize,
    pub amps: Vec<C64>,
}

impl UnnormalizedState {
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `None` if the norm is at or below the pruning threshold.
    pub fn normalize(self) -> Option<(f64, StateVector)> {
        let p = self.norm_sq();
        if p <= BRANCH_PRUNE {
            return None;
        }
        let s = 1.0 / p.sqrt();
        let amps = self.amps.into_iter().map(|a| a * s).collect();
        Some((
            p,
            StateVector {
                n_qubits: self.n_qubits,
                amps,
            },
        ))
    }
}

/// One outcome of a projective computational-basis measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBranch {
    /// Bit j is the result on `targets[j]`.
    pub outcome: usize,
    pub prob: f64,
    /// Conditional state on the unmeasured qubits, in ascending qubit order.
    pub post_state: StateVector,
}

/// Render `value` as `width` bits, most significant first.
pub fn format_bitstring(value: usize, width: usize) -> String {
    (0..width)
        .rev()
        .map(|b| if (value >> b) & 1 == 1 { '1' } else { '0' })
        .collect()
}

impl StateVector {
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = dim_of(n_qubits)?;
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                what: "basis state",
                index,
                size: dim,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// |0...0> on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    /// Wraps amplitudes that must already be normalised.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq.sqrt() - 1.0).abs() > STATE_TOL {
            return Err(Error::invalid(format!(
                "state norm {} differs from 1",
                norm_sq.sqrt()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Normalises arbitrary nonzero amplitudes.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        UnnormalizedState { n_qubits, amps }
            .normalize()
            .map(|(_, s)| s)
            .ok_or_else(|| Error::invalid("cannot normalise a zero vector"))
    }

    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1usize << n_qubits);
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// <self|other>
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
                context: "inner product",
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |<self|other>|^2
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        self.inner(other).map(|z| z.norm_sqr())
    }

    /// `self ⊗ high`, with `self` on the low qubits.
    pub fn tensor(&self, high: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * high.dim());
        for h in &high.amps {
            amps.extend(self.amps.iter().map(|l| l * h));
        }
        StateVector {
            n_qubits: self.n_qubits + high.n_qubits,
            amps,
        }
    }

    /// Appends `n_ancilla` fresh qubits in |0> above the existing register.
    pub fn append_reset_ancilla(&self, n_ancilla: usize) -> Result<StateVector> {
        let n = self.n_qubits + n_ancilla;
        let mut amps = vec![C64::new(0.0, 0.0); dim_of(n)?];
        amps[..self.dim()].copy_from_slice(&self.amps);
        Ok(StateVector { n_qubits: n, amps })
    }

    /// Applies `u` to `targets`; `targets[0]` is the least significant qubit of
    /// the gate's local index.
    pub fn apply_unitary(&self, u: &UnitaryMatrix, targets: &[usize]) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_unitary_in_place(u, targets)?;
        Ok(out)
    }

    pub fn apply_unitary_in_place(&mut self, u: &UnitaryMatrix, targets: &[usize]) -> Result<()> {
        check_targets(targets, self.n_qubits)?;
        let k = targets.len();
        let local = 1usize << k;
        if u.dim() != local {
            return Err(Error::DimensionMismatch {
                expected: local,
                got: u.dim(),
                context: "gate dimension vs target count",
            });
        }
        let rest: Vec<usize> = (0..self.n_qubits)
            .filter(|q| !targets.contains(q))
            .collect();
        let offsets: Vec<usize> = (0..local).map(|l| scatter_bits(l, targets)).collect();
        let m = u.matrix();
        let mut buf = vec![C64::new(0.0, 0.0); local];
        for r in 0..(1usize << rest.len()) {
            let base = scatter_bits(r, &rest);
            for (l, off) in offsets.iter().enumerate() {
                buf[l] = self.amps[base | off];
            }
            for (row, off) in offsets.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (col, b) in buf.iter().enumerate() {
                    acc += m[(row, col)] * b;
                }
                self.amps[base | off] = acc;
            }
        }
        Ok(())
    }

    /// Applies a 2×2 matrix given row-major as `[m00, m01, m10, m11]` to qubit `q`.
    pub fn apply_1q(&mut self, m: &[C64; 4], q: usize) -> Result<()> {
        check_targets(&[q], self.n_qubits)?;
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0] * a0 + m[1] * a1;
                self.amps[i | bit] = m[2] * a0 + m[3] * a1;
            }
        }
        Ok(())
    }

    /// Controlled-Z between qubits `a` and `b`.
    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        check_targets(&[a, b], self.n_qubits)?;
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Unnormalised projections onto every outcome of `targets`, indexed by
    /// outcome. The conditional states live on the complement qubits.
    pub fn project_all(&self, targets: &[usize]) -> Result<Vec<UnnormalizedState>> {
        if targets.is_empty() {
            return Err(Error::EmptyTargets("measurement"));
        }
        check_targets(targets, self.n_qubits)?;
        let rest: Vec<usize> = (0..self.n_qubits)
            .filter(|q| !targets.contains(q))
            .collect();
        let n_out = 1usize << targets.len();
        let rest_dim = 1usize << rest.len();
        let mut branches = vec![
            UnnormalizedState {
                n_qubits: rest.len(),
                amps: vec![C64::new(0.0, 0.0); rest_dim],
            };
            n_out
        ];
        for (i, a) in self.amps.iter().enumerate() {
            branches[gather_bits(i, targets)].amps[gather_bits(i, &rest)] = *a;
        }
        Ok(branches)
    }

    /// Every outcome with nonzero probability, in increasing outcome order.
    pub fn measure_enumerate(&self, targets: &[usize]) -> Result<Vec<MeasurementBranch>> {
        Ok(self
            .project_all(targets)?
            .into_iter()
            .enumerate()
            .filter_map(|(outcome, b)| {
                b.normalize().map(|(prob, post_state)| MeasurementBranch {
                    outcome,
                    prob,
                    post_state,
                })
            })
            .collect())
    }

    /// Born-rule sample of a single branch.
    pub fn measure_sample<R: Rng + ?Sized>(
        &self,
        targets: &[usize],
        rng: &mut R,
    ) -> Result<(usize, StateVector)> {
        let branches = self.measure_enumerate(targets)?;
        let idx = sample_index(branches.iter().map(|b| b.prob), rng);
        let b = branches
            .into_iter()
            .nth(idx)
            .expect("non-empty branch list");
        Ok((b.outcome, b.post_state))
    }

    /// Reduced density matrix on `keep`; bit j of the reduced index is
    /// qubit `keep[j]`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyTargets("partial trace"));
        }
        check_targets(keep, self.n_qubits)?;
        let rest: Vec<usize> = (0..self.n_qubits).filter(|q| !keep.contains(q)).collect();
        let mut m = DMatrix::<C64>::zeros(1 << keep.len(), 1 << rest.len());
        for (i, a) in self.amps.iter().enumerate() {
            m[(gather_bits(i, keep), gather_bits(i, &rest))] = *a;
        }
        Ok(DensityMatrix::from_matrix_unchecked(&m * m.adjoint()))
    }

    pub fn density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityMatrix::from_matrix_unchecked(&v * v.adjoint())
    }
}

/// Inverse-CDF sampling over (possibly slightly unnormalised) weights.
pub(crate) fn sample_index<R: Rng + ?Sized>(
    weights: impl Iterator<Item = f64> + Clone,
    rng: &mut R,
) -> usize {
    let total: f64 = weights.clone().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

fn dim_of(n_qubits: usize) -> Result<usize> {
    if n_qubits >= usize::BITS as usize - 1 {
        return Err(Error::CapExceeded {
            what: "qubits",
            requested: n_qubits as u128,
            cap: (usize::BITS - 2) as u128,
        });
    }
    Ok(1usize << n_qubits)
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::invalid(format!(
            "amplitude vector length {len} is not a power of two"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_amplitudes(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap()
    }

    #[test]
    fn basis_states() {
        assert_eq!(
            StateVector::basis_state(1, 0).unwrap().amplitudes(),
            &[c(1.0), c(0.0)]
        );
        assert_eq!(
            StateVector::basis_state(2, 3).unwrap().amplitudes(),
            &[c(0.0), c(0.0), c(0.0), c(1.0)]
        );
        assert!(matches!(
            StateVector::basis_state(2, 4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn apply_basic_gates() {
        let one = StateVector::zero(1)
            .unwrap()
            .apply_unitary(&UnitaryMatrix::pauli_x(), &[0])
            .unwrap();
        assert_eq!(one, StateVector::basis_state(1, 1).unwrap());
        let zz = StateVector::zero(2).unwrap();
        assert_eq!(
            zz.apply_unitary(&UnitaryMatrix::swap(), &[0, 1]).unwrap(),
            zz
        );
        // X on qubit 1 of |00> gives index 2.
        let s = zz.apply_unitary(&UnitaryMatrix::pauli_x(), &[1]).unwrap();
        assert_eq!(s, StateVector::basis_state(2, 2).unwrap());
    }

    #[test]
    fn apply_rejects_bad_targets() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.apply_unitary(&UnitaryMatrix::swap(), &[0, 0]),
            Err(Error::DuplicateTarget(0))
        ));
        assert!(matches!(
            s.apply_unitary(&UnitaryMatrix::swap(), &[0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(s.apply_unitary(&UnitaryMatrix::pauli_x(), &[2]).is_err());
    }

    #[test]
    fn measure_bell() {
        let br = bell().measure_enumerate(&[0]).unwrap();
        assert_eq!(br.len(), 2);
        assert_eq!(br[0].outcome, 0);
        assert_abs_diff_eq!(br[0].prob, 0.5, epsilon = 1e-12);
        assert_eq!(br[0].post_state, StateVector::basis_state(1, 0).unwrap());
        assert_eq!(br[1].post_state, StateVector::basis_state(1, 1).unwrap());
    }

    #[test]
    fn measure_deterministic_and_product() {
        let br = StateVector::zero(2)
            .unwrap()
            .measure_enumerate(&[1])
            .unwrap();
        assert_eq!(br.len(), 1);
        assert_eq!((br[0].outcome, br[0].prob), (0, 1.0));
        // |+> on qubit 0, |1> on qubit 1
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus_one = StateVector::from_amplitudes(vec![c(0.0), c(0.0), c(s), c(s)]).unwrap();
        let br = plus_one.measure_enumerate(&[0]).unwrap();
        assert_eq!(br.len(), 2);
        for b in &br {
            assert_abs_diff_eq!(b.prob, 0.5, epsilon = 1e-12);
            assert_eq!(b.post_state, StateVector::basis_state(1, 1).unwrap());
        }
        assert!(matches!(
            plus_one.measure_enumerate(&[]),
            Err(Error::EmptyTargets(_))
        ));
    }

    #[test]
    fn sample_deterministic_state() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (o, _) = StateVector::zero(2)
                .unwrap()
                .measure_sample(&[0, 1], &mut rng)
                .unwrap();
            assert_eq!(o, 0);
        }
    }

    #[test]
    fn append_ancilla() {
        let one = StateVector::basis_state(1, 1).unwrap();
        let s = one.append_reset_ancilla(1).unwrap();
        assert_eq!(s, StateVector::basis_state(2, 1).unwrap());
        assert_eq!(one.append_reset_ancilla(0).unwrap(), one);
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn partial_traces() {
        let r = bell().partial_trace(&[0]).unwrap();
        assert_abs_diff_eq!(r.matrix()[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.matrix()[(0, 1)].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.purity(), 0.5, epsilon = 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zero_plus = StateVector::from_amplitudes(vec![c(s), c(0.0), c(s), c(0.0)]).unwrap();
        let r = zero_plus.partial_trace(&[0]).unwrap();
        assert_abs_diff_eq!(r.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.purity(), 1.0, epsilon = 1e-12);
        assert!(bell().partial_trace(&[]).is_err());
    }

    #[test]
    fn fast_gates_match_dense() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let psi = crate::quantum::haar_state(3, &mut rng).unwrap();
        let ry = UnitaryMatrix::ry(0.7);
        let m = ry.matrix();
        let mut fast = psi.clone();
        fast.apply_1q(&[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]], 2)
            .unwrap();
        let dense = psi.apply_unitary(&ry, &[2]).unwrap();
        for (a, b) in fast.amplitudes().iter().zip(dense.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
        let mut fast = psi.clone();
        fast.apply_cz(0, 2).unwrap();
        let dense = psi.apply_unitary(&UnitaryMatrix::cz(), &[0, 2]).unwrap();
        assert_eq!(fast, dense);
    }

    #[test]
    fn bitstring_text_is_msb_first() {
        assert_eq!(format_bitstring(0b001, 3), "001");
        assert_eq!(format_bitstring(0b110, 3), "110");
    }
}
