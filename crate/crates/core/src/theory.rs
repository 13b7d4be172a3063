//! Closed-form predictions: first-order frame potentials, higher-order
//! bounds, rescaled collapse, and ancilla/step/circuit-size resources.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Number of steps at which a frame potential is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    Step(u32),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    Asymptotic,
    FiniteSize,
}

/// Haar frame potential `1 / C(d+K-1, K)`, via log-gamma.
pub fn f_haar(d: f64, k: u32) -> f64 {
    let k = k as f64;
    (ln_gamma(k + 1.0) + ln_gamma(d) - ln_gamma(d + k)).exp()
}

fn rat(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Typical first-order HDT frame potential after `t` steps, exactly:
///
/// `F(t) = a λ^t + d_A²(d_B+1)/(d_A² d_B + 1) · 1/d_A` with
/// `a = (d_A−1)(d_A d_B−1)/(d_A² d_B+1)` and `λ = (d_A²−1) d_B/(d_A² d_B²−1)`.
///
/// Returns `None` for the degenerate `d_A = d_B = 1` (the decay base is 0/0).
pub fn f1_hdt_exact(d_a: u64, d_b: u64, t: u32) -> Option<BigRational> {
    if d_a == 0 || d_b == 0 || (d_a == 1 && d_b == 1) {
        return None;
    }
    let (da, db) = (rat(d_a), rat(d_b));
    let one = rat(1);
    let da2 = &da * &da;
    let denom = &da2 * &db + &one;
    let a = (&da - &one) * (&da * &db - &one) / &denom;
    let lam = (&da2 - &one) * &db / (&da2 * &db * &db - &one);
    let lam_t = num_traits::pow(lam, t as usize);
    let tail = &da2 * (&db + &one) / &denom / &da;
    Some(a * lam_t + tail)
}

/// First-order DT frame potential, exactly:
/// `d_B(d_A²−1)/(d_A²d_B²−1) + d_A²(d_B²−1)/(d_A²d_B²−1) · 1/d_A`.
pub fn f1_dt_exact(d_a: u64, d_b: u64) -> Option<BigRational> {
    if d_a == 0 || d_b == 0 || (d_a == 1 && d_b == 1) {
        return None;
    }
    let (da, db) = (rat(d_a), rat(d_b));
    let one = rat(1);
    let da2 = &da * &da;
    let db2 = &db * &db;
    let denom = &da2 * &db2 - &one;
    Some(&db * (&da2 - &one) / &denom + &da2 * (&db2 - &one) / &denom / &da)
}

pub fn f1_hdt(d_a: f64, d_b: f64, t: Horizon) -> f64 {
    let da2 = d_a * d_a;
    let denom = da2 * d_b + 1.0;
    let tail = da2 * (d_b + 1.0) / denom / d_a;
    match t {
        Horizon::Infinite => tail,
        Horizon::Step(t) => {
            let a = (d_a - 1.0) * (d_a * d_b - 1.0) / denom;
            let lam = (da2 - 1.0) * d_b / (da2 * d_b * d_b - 1.0);
            if a == 0.0 {
                tail
            } else {
                a * lam.powi(t as i32) + tail
            }
        }
    }
}

/// Decay base of [`f1_hdt`].
pub fn f1_hdt_decay_rate(d_a: f64, d_b: f64) -> f64 {
    (d_a * d_a - 1.0) * d_b / (d_a * d_a * d_b * d_b - 1.0)
}

pub fn f1_dt(d_a: f64, d_b: f64) -> f64 {
    let denom = d_a * d_a * d_b * d_b - 1.0;
    d_b * (d_a * d_a - 1.0) / denom + d_a * d_a * (d_b * d_b - 1.0) / denom / d_a
}

/// Replica-trick DT frame potential of order `K`.
pub fn fk_dt(d_a: f64, d_b: f64, k: u32) -> f64 {
    (d_a + 1.0) / (d_a * d_b) + (d_b - 1.0) / d_b * f_haar(d_a, k)
}

/// `(d_A−1)!(2d_A+2K−2)! / ((d_A+K−1)!(2d_A+K−2)!)`
pub fn finite_size_ratio(d_a: f64, k: u32) -> f64 {
    let k = k as f64;
    (ln_gamma(d_a) + ln_gamma(2.0 * d_a + 2.0 * k - 1.0)
        - ln_gamma(d_a + k)
        - ln_gamma(2.0 * d_a + k - 1.0))
    .exp()
}

/// Lower bound on the `K`-th order HDT frame potential.
pub fn fk_hdt_lower_bound(d_a: f64, d_b: f64, k: u32, t: Horizon, form: BoundForm) -> f64 {
    let fh = f_haar(d_a, k);
    let dynamic = match t {
        Horizon::Step(t) => d_b.powi(-(t as i32)),
        Horizon::Infinite => 0.0,
    };
    let excess = match form {
        BoundForm::Asymptotic => 2f64.powi(k as i32) - 1.0,
        BoundForm::FiniteSize => finite_size_ratio(d_a, k) - 1.0,
    };
    dynamic + fh + excess * fh / d_b
}

/// Rescaled time and frame potential for the space-time collapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescaled {
    pub tau: f64,
    /// `F(t)/F(∞)` from the asymptotic bound.
    pub f_bound: f64,
    /// Collapse law `1 + 2^{−τ}/F_Haar`.
    pub f_collapse: f64,
}

pub fn rescaled_fp(d_a: f64, k: u32, n_b: u32, t: Horizon) -> Rescaled {
    let d_b = 2f64.powi(n_b as i32);
    let fh = f_haar(d_a, k);
    let tau = match t {
        Horizon::Step(t) => t as f64 * n_b as f64,
        Horizon::Infinite => f64::INFINITY,
    };
    let conv = fk_hdt_lower_bound(d_a, d_b, k, Horizon::Infinite, BoundForm::Asymptotic);
    let at_t = fk_hdt_lower_bound(d_a, d_b, k, t, BoundForm::Asymptotic);
    Rescaled {
        tau,
        f_bound: at_t / conv,
        f_collapse: 1.0 + (-tau).exp2() / fh,
    }
}

/// Data size, design order and accuracy target for resource formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceQuery {
    pub n_a: u32,
    pub k: u32,
    pub epsilon: f64,
    pub n_b: Option<u32>,
}

impl ResourceQuery {
    pub fn new(n_a: u32, k: u32, epsilon: f64) -> Result<Self> {
        let q = Self {
            n_a,
            k,
            epsilon,
            n_b: None,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn with_ancilla(mut self, n_b: u32) -> Self {
        self.n_b = Some(n_b);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::invalid("design order K must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(format!(
                "epsilon = {} must lie in (0, 1)",
                self.epsilon
            )));
        }
        Ok(())
    }

    fn log_inv_eps(&self) -> f64 {
        -self.epsilon.log2()
    }

    fn log2_k_factorial(&self) -> f64 {
        (1..=self.k).map(|i| (i as f64).log2()).sum()
    }

    /// `K N_A − log2 K! + log2(1/ε)`
    fn dt_budget(&self) -> f64 {
        self.k as f64 * self.n_a as f64 - self.log2_k_factorial() + self.log_inv_eps()
    }

    fn ancilla(&self) -> Result<f64> {
        match self.n_b {
            Some(n) if n > 0 => Ok(n as f64),
            Some(_) => Err(Error::invalid("n_ancilla must be positive")),
            None => Err(Error::invalid("query needs n_ancilla")),
        }
    }
}

/// `K + log2(1/ε) + log2(1 − 2^{−K})`
pub fn min_ancilla_hdt(q: &ResourceQuery) -> Result<f64> {
    q.validate()?;
    let k = q.k as f64;
    Ok(k + q.log_inv_eps() + (1.0 - (-k).exp2()).log2())
}

/// Thermodynamic form `K N_A − log2 K! + log2(1/ε)`.
pub fn min_ancilla_dt(q: &ResourceQuery) -> Result<f64> {
    q.validate()?;
    Ok(q.dt_budget())
}

/// Pre-limit form `log2((d_A + 1 − d_A F_H) / (d_A F_H ε))`.
pub fn min_ancilla_dt_finite(q: &ResourceQuery) -> Result<f64> {
    q.validate()?;
    let d_a = 2f64.powi(q.n_a as i32);
    let fh = f_haar(d_a, q.k);
    Ok(((d_a + 1.0 - d_a * fh) / (d_a * fh * q.epsilon)).log2())
}

/// Lower bound on the number of HDT steps, real-valued and rounded up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Steps {
    pub bound: f64,
    pub steps: u64,
}

pub fn steps_required(q: &ResourceQuery) -> Result<Steps> {
    q.validate()?;
    let bound = q.dt_budget() / q.ancilla()?;
    let steps = bound.max(1.0).ceil() as u64;
    Ok(Steps { bound, steps })
}

/// Circuit-size scale `((N_A+N_B)²/N_B) (K N_A − log2 K! + log2(1/ε))`.
pub fn qsize(q: &ResourceQuery) -> Result<f64> {
    q.validate()?;
    let n_b = q.ancilla()?;
    let n_a = q.n_a as f64;
    Ok((n_a + n_b).powi(2) / n_b * q.dt_budget())
}

/// Circuit size at the minimum HDT ancilla `N_B = K + log2(1/ε)`.
pub fn qsize_min_ancilla(q: &ResourceQuery) -> Result<f64> {
    q.validate()?;
    let (k, n_a, l) = (q.k as f64, q.n_a as f64, q.log_inv_eps());
    let n_b = k + l;
    Ok((k * n_a - q.log2_k_factorial() + n_b) * (n_a / n_b + 1.0) * (n_a + n_b))
}

/// Circuit size of single-step DT, `((K+1) N_A − log2 K! + log2(1/ε))²`.
pub fn qsize_dt(q: &ResourceQuery) -> Result<f64> {
    q.validate()?;
    Ok(((q.k as f64 + 1.0) * q.n_a as f64 - q.log2_k_factorial() + q.log_inv_eps()).powi(2))
}

/// Data size at which minimum-ancilla HDT and DT need equal circuit size:
/// `½(√((K+L)(K³+K²L+4L)) + K² + KL)`, `L = log2(1/ε)`.
pub fn critical_na(k: u32, epsilon: f64) -> Result<f64> {
    ResourceQuery::new(0, k, epsilon)?;
    let k = k as f64;
    let l = -epsilon.log2();
    Ok(0.5 * (((k + l) * (k.powi(3) + k * k * l + 4.0 * l)).sqrt() + k * k + k * l))
}

/// Upper bound on the DT reference mutual information in bits:
/// `2(N_A − 1) − 2 log2(1 − 1/(2 d_B))`.
pub fn dt_mi_bound(n_a: u32, d_b: f64) -> f64 {
    2.0 * (n_a as f64 - 1.0) - 2.0 * (1.0 - 1.0 / (2.0 * d_b)).log2()
}
