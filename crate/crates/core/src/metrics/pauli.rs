use crate::quantum::DensityMatrix;
use crate::stats::NeumaierSum;
use crate::{Error, Result, C64};

/// `tr ρ² = (1/d) Σ_P tr(ρP)²` over all `4^N` phaseless Pauli strings.
///
/// A string is encoded by an X-mask and a Z-mask; `Y` sets both bits and
/// contributes the factor `i` per qubit.
pub fn purity_via_pauli(rho: &DensityMatrix) -> Result<f64> {
    let d = rho.dim();
    if !d.is_power_of_two() || d > 1 << 8 {
        return Err(Error::invalid(format!(
            "Pauli expansion needs a qubit register of at most 8 qubits, got dimension {d}"
        )));
    }
    let m = rho.matrix();
    let mut acc = NeumaierSum::new();
    for x in 0..d {
        for z in 0..d {
            let n_y = (x & z).count_ones();
            // P|j> = i^{n_y} (-1)^{popcount(j & z)} |j ⊕ x>.
            let mut t = C64::new(0.0, 0.0);
            for j in 0..d {
                let v = m[(j ^ x, j)];
                if (j & z).count_ones() % 2 == 0 {
                    t += v;
                } else {
                    t -= v;
                }
            }
            let phase = match n_y % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
            acc.add((phase * t).re.powi(2));
        }
    }
    Ok(acc.value() / d as f64)
}
