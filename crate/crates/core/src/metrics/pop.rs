use serde::{Deserialize, Serialize};

use crate::protocols::{EnsembleMode, ProjectedEnsemble};
use crate::quantum::StateVector;
use crate::stats::chi_square_p_value;
use crate::{Error, Result};

pub const DEFAULT_POP_BINS: usize = 50;

/// Histogram of squared overlaps with a reference state.
///
/// `counts` tallies raw entries (trajectories for sampled ensembles,
/// histories for exact ones) and sums to `n_entries`; `mass` holds the
/// probability-weighted version and sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mass: Vec<f64>,
    pub d_a: usize,
    pub mode: EnsembleMode,
    pub n_entries: u64,
    pub mean_overlap: f64,
}

impl PopHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Probability density per bin (mass over bin width).
    pub fn density(&self) -> Vec<f64> {
        self.mass
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(m, e)| m / (e[1] - e[0]))
            .collect()
    }
}

/// Porter-Thomas density `(d-1)(1-p)^{d-2}`.
pub fn pt_density(p: f64, d: usize) -> f64 {
    assert!(d >= 2, "the Porter-Thomas law needs d >= 2");
    if !(0.0..=1.0).contains(&p) {
        return 0.0;
    }
    (d - 1) as f64 * (1.0 - p).powi(d as i32 - 2)
}

/// Porter-Thomas cumulative distribution `1 - (1-p)^{d-1}`.
pub fn pt_cdf(p: f64, d: usize) -> f64 {
    1.0 - (1.0 - p.clamp(0.0, 1.0)).powi(d as i32 - 1)
}

fn bin_of(x: f64, bins: usize) -> usize {
    ((x * bins as f64) as usize).min(bins - 1)
}

/// Histogram of `|<φ|ψ_z>|²` over `bins` uniform bins on `[0, 1]`.
pub fn pop_collect(
    ens: &ProjectedEnsemble,
    reference: &StateVector,
    bins: usize,
) -> Result<PopHistogram> {
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    if reference.n_qubits() != ens.n_data() {
        return Err(Error::DimensionMismatch {
            expected: ens.n_data(),
            got: reference.n_qubits(),
            context: "PoP reference state",
        });
    }
    let mut counts = vec![0u64; bins];
    let mut mass = vec![0.0; bins];
    let mut mean = 0.0;
    let mult: Vec<u64> = match ens.counts() {
        Some(c) => c.to_vec(),
        None => vec![1; ens.n_distinct()],
    };
    for ((s, &w), &c) in ens.states().iter().zip(ens.weights()).zip(&mult) {
        let x = reference.overlap(s)?;
        let b = bin_of(x, bins);
        counts[b] += c;
        mass[b] += w;
        mean += w * x;
    }
    Ok(PopHistogram {
        bin_edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
        n_entries: counts.iter().sum(),
        counts,
        mass,
        d_a: 1 << ens.n_data(),
        mode: ens.mode(),
        mean_overlap: mean,
    })
}

/// Outcome of a Pearson χ² goodness-of-fit test against Porter-Thomas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// χ² test of a sampled histogram against the Porter-Thomas law.
///
/// Adjacent bins are pooled, scanning from the top of the range, until each
/// pooled bin expects at least five entries.
pub fn pt_chi_square(hist: &PopHistogram) -> Result<PtTest> {
    if hist.mode != EnsembleMode::Sampled {
        return Err(Error::WrongMode(
            "the χ² test needs independently sampled trajectories",
        ));
    }
    if hist.d_a < 2 {
        return Err(Error::invalid("the Porter-Thomas law needs d >= 2"));
    }
    let n = hist.n_entries as f64;
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for i in (0..hist.bins()).rev() {
        obs += hist.counts[i] as f64;
        exp += n * (pt_cdf(hist.bin_edges[i + 1], hist.d_a) - pt_cdf(hist.bin_edges[i], hist.d_a));
        if exp >= 5.0 {
            pooled.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => pooled.push((obs, exp)),
        }
    }
    if pooled.len() < 2 {
        return Err(Error::invalid("too few entries for a χ² test"));
    }
    let statistic: f64 = pooled.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = pooled.len() - 1;
    Ok(PtTest {
        statistic,
        dof,
        p_value: chi_square_p_value(statistic, dof as f64),
    })
}
