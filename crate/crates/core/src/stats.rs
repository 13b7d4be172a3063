//! Small statistical helpers shared by the estimators.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn stable_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<NeumaierSum>().value()
}

/// Sample mean and standard error of the mean; the error is NaN for fewer
/// than two values.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = stable_sum(xs.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = stable_sum(xs.iter().map(|x| (x - mean).powi(2))) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Upper-tail probability of a chi-square statistic.
pub fn chi_square_p_value(statistic: f64, dof: f64) -> f64 {
    match ChiSquared::new(dof) {
        Ok(d) => d.sf(statistic),
        Err(_) => f64::NAN,
    }
}
