//! Simulation-versus-theory comparison with per-point z-scores.

use std::collections::BTreeMap;
use std::fmt;

use hdtlab::stats::mean_stderr;

use crate::output::ResultRow;

/// Fraction of points that must satisfy `|z| <= Z_LIMIT`.
pub const PASS_FRACTION: f64 = 0.95;
pub const Z_LIMIT: f64 = 3.0;

type Key = (String, String, u32, u64);

/// Simulation rows reduced over realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub experiment: String,
    pub metric: String,
    pub k: u32,
    pub step: u64,
    pub mean: f64,
    pub stderr: f64,
    pub realizations: usize,
    pub n_samples: u64,
}

/// Mean and standard error across realizations for every
/// `(experiment, metric, K, step)` cell. A cell with a single realization
/// keeps that row's own error estimate.
pub fn aggregate(rows: &[ResultRow]) -> Vec<Aggregate> {
    let mut cells: BTreeMap<Key, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.realization.is_some()) {
        cells
            .entry((r.experiment.clone(), r.metric.clone(), r.k, r.step))
            .or_default()
            .push(r);
    }
    cells
        .into_iter()
        .map(|((experiment, metric, k, step), mut cell)| {
            cell.sort_by_key(|r| r.realization);
            let values: Vec<f64> = cell.iter().map(|r| r.value).collect();
            let (mean, stderr) = if cell.len() == 1 {
                (cell[0].value, cell[0].stderr)
            } else {
                mean_stderr(&values)
            };
            Aggregate {
                experiment,
                metric,
                k,
                step,
                mean,
                stderr,
                realizations: cell.len(),
                n_samples: cell.iter().map(|r| r.n_samples).sum(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparedPoint {
    pub sim: Aggregate,
    pub theory: f64,
    pub z: f64,
}

impl ComparedPoint {
    pub fn passes(&self) -> bool {
        self.z.abs() <= Z_LIMIT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NoComparablePoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub points: Vec<ComparedPoint>,
    pub verdict: Verdict,
}

impl ComparisonReport {
    pub fn pass_fraction(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().filter(|p| p.passes()).count() as f64 / self.points.len() as f64
    }

    pub fn to_rows(&self) -> Vec<ResultRow> {
        let mut out = Vec::with_capacity(2 * self.points.len());
        for p in &self.points {
            let s = &p.sim;
            out.push(
                ResultRow::new(
                    &s.experiment,
                    None,
                    s.step,
                    &format!("{}_z", s.metric),
                    s.k,
                    finite_or_max(p.z),
                )
                .with_error(s.stderr, s.n_samples),
            );
            out.push(
                ResultRow::new(
                    &s.experiment,
                    None,
                    s.step,
                    &format!("{}_mean", s.metric),
                    s.k,
                    s.mean,
                )
                .with_error(s.stderr, s.n_samples),
            );
        }
        out
    }
}

fn finite_or_max(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else if x.is_nan() {
        f64::MAX
    } else {
        x.signum() * f64::MAX
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.verdict == Verdict::NoComparablePoints {
            return write!(f, "no comparable points");
        }
        for p in &self.points {
            writeln!(
                f,
                "{} {} K={} t={}: sim {} ± {} theory {} z {:+.3}{}",
                p.sim.experiment,
                p.sim.metric,
                p.sim.k,
                p.sim.step,
                p.sim.mean,
                p.sim.stderr,
                p.theory,
                p.z,
                if p.passes() { "" } else { "  <-- outside" }
            )?;
        }
        write!(
            f,
            "{}: {}/{} points with |z| <= {Z_LIMIT} ({:.1}%, need {:.0}%)",
            if self.verdict == Verdict::Pass {
                "PASS"
            } else {
                "FAIL"
            },
            self.points.iter().filter(|p| p.passes()).count(),
            self.points.len(),
            100.0 * self.pass_fraction(),
            100.0 * PASS_FRACTION
        )
    }
}

/// `z = (sim − theory)/stderr`. A zero error counts as agreement only when
/// the values coincide to rounding.
pub fn z_score(sim: f64, theory: f64, stderr: f64) -> f64 {
    let diff = sim - theory;
    if stderr > 0.0 && stderr.is_finite() {
        diff / stderr
    } else if diff.abs() <= 1e-9 * theory.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// Joins aggregated simulation rows with theory rows on
/// `(experiment, metric, K, step)`.
pub fn compare_report(sim: &[ResultRow], theory: &[ResultRow]) -> ComparisonReport {
    let predictions: BTreeMap<Key, f64> = theory
        .iter()
        .map(|r| {
            (
                (r.experiment.clone(), r.metric.clone(), r.k, r.step),
                r.value,
            )
        })
        .collect();
    let points: Vec<ComparedPoint> = aggregate(sim)
        .into_iter()
        .filter_map(|a| {
            let key = (a.experiment.clone(), a.metric.clone(), a.k, a.step);
            predictions.get(&key).map(|&theory| ComparedPoint {
                z: z_score(a.mean, theory, a.stderr),
                theory,
                sim: a,
            })
        })
        .collect();
    let verdict = if points.is_empty() {
        Verdict::NoComparablePoints
    } else {
        let ok = points.iter().filter(|p| p.passes()).count() as f64;
        if ok >= PASS_FRACTION * points.len() as f64 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    };
    ComparisonReport { points, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim_rows() -> Vec<ResultRow> {
        let mut rows = Vec::new();
        for r in 0..4 {
            for t in 1..=5u64 {
                let v = 0.5 + 0.01 * (r as f64 - 1.5);
                rows.push(
                    ResultRow::new("hdt", Some(r), t, "frame_potential", 1, v)
                        .with_error(0.001, 100),
                );
            }
        }
        rows
    }

    fn theory_rows(shift: f64) -> Vec<ResultRow> {
        (1..=5u64)
            .map(|t| ResultRow::new("hdt", None, t, "frame_potential", 1, 0.5 + shift))
            .collect()
    }

    #[test]
    fn aggregate_is_mean_over_realizations() {
        let agg = aggregate(&sim_rows());
        assert_eq!(agg.len(), 5);
        assert!((agg[0].mean - 0.5).abs() < 1e-15);
        assert_eq!(agg[0].realizations, 4);
        assert_eq!(agg[0].n_samples, 400);
        let sd = (0.01f64 * 0.01 * 5.0 / 3.0).sqrt();
        assert!((agg[0].stderr - sd / 2.0).abs() < 1e-12);
    }

    #[test]
    fn identical_inputs_give_zero_z() {
        let sim = theory_rows(0.0)
            .into_iter()
            .map(|mut r| {
                r.realization = Some(0);
                r
            })
            .collect::<Vec<_>>();
        let rep = compare_report(&sim, &theory_rows(0.0));
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.points.iter().all(|p| p.z == 0.0));
    }

    #[test]
    fn ten_sigma_shift_fails() {
        let agg = aggregate(&sim_rows());
        let rep = compare_report(&sim_rows(), &theory_rows(10.0 * agg[0].stderr));
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.points.iter().all(|p| (p.z + 10.0).abs() < 1e-9));
        assert_eq!(
            compare_report(&sim_rows(), &theory_rows(0.0)).verdict,
            Verdict::Pass
        );
    }

    #[test]
    fn empty_join_is_reported() {
        let mut theory = theory_rows(0.0);
        for r in &mut theory {
            r.metric = "purity".into();
        }
        let rep = compare_report(&sim_rows(), &theory);
        assert_eq!(rep.verdict, Verdict::NoComparablePoints);
        assert_eq!(rep.to_string(), "no comparable points");
    }

    #[test]
    fn zero_error_requires_equality() {
        assert_eq!(z_score(1.0, 1.0, 0.0), 0.0);
        assert_eq!(z_score(1.0, 0.9, 0.0), f64::INFINITY);
        assert_eq!(z_score(0.9, 1.0, f64::NAN), f64::NEG_INFINITY);
    }
}
