//! Experiment drivers. Each turns a validated configuration into result
//! rows, theory rows, plot series and summary notes; nothing here touches
//! the filesystem.

use rayon::prelude::*;

use hdtlab::metrics::{
    frame_potential_blocked, frame_potentials, haar_frame_potential, pop_collect, pt_cdf,
    pt_chi_square, FramePotentialEstimate,
};
use hdtlab::perm::{lower_bound_1dw, stat_model_sum_approx, stat_model_sum_exact};
use hdtlab::protocols::{
    run_hdt_exact_each, run_hdt_sampled_each, ProjectedEnsemble, ProtocolConfig, SamplingMode,
};
use hdtlab::quantum::StateVector;
use hdtlab::rng::mix;
use hdtlab::security::{mi_distribution, mi_sweep, MiMode, MiOptions};
use hdtlab::theory::{self, BoundForm, Horizon, ResourceQuery};

use crate::config::{ExperimentConfig, Kind};
use crate::output::ResultRow;
use crate::CliError;

pub const FRAME_POTENTIAL: &str = "frame_potential";
pub const RESCALED: &str = "rescaled_frame_potential";

/// A gnuplot series written to `<name>.dat`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub title: String,
    pub points: Vec<(f64, f64)>,
}

/// Everything an experiment produces.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub oracle: Vec<ResultRow>,
    pub plots: Vec<Plot>,
    pub notes: Vec<String>,
    pub checkpoint: Option<serde_json::Value>,
}

/// Checks resource caps for every protocol the experiment would run.
pub fn preflight(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let Some(p) = &cfg.protocol else {
        return Ok(());
    };
    for n_b in cfg.ancillas() {
        let pc = cfg.protocol_config(n_b)?;
        pc.check_dense_cap()?;
        if p.mode == SamplingMode::Exact && cfg.kind != Kind::Mi {
            pc.check_exact_cap()?;
        }
    }
    Ok(())
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    preflight(cfg)?;
    match cfg.kind {
        Kind::Dt | Kind::Hdt => frame_experiment(cfg, false),
        Kind::Tradeoff => frame_experiment(cfg, true),
        Kind::Pop => pop_experiment(cfg),
        Kind::Mi => mi_experiment(cfg),
        Kind::Qsize => qsize_experiment(cfg),
        Kind::Oracle => oracle_experiment(cfg),
        Kind::Train => train_experiment(cfg),
        Kind::Statmodel => statmodel_experiment(cfg),
    }
}

/// Experiment label for one ancilla size: suffixed when sweeping.
fn label(cfg: &ExperimentConfig, n_b: usize) -> String {
    if cfg.ancilla_sweep.is_empty() {
        cfg.id.clone()
    } else {
        format!("{}_nb{n_b}", cfg.id)
    }
}

/// Calls `f(step, ensemble)` for every step of one realization.
fn each_step(
    pc: &ProtocolConfig,
    f: impl FnMut(usize, ProjectedEnsemble) -> hdtlab::Result<()>,
) -> hdtlab::Result<()> {
    match pc.mode {
        SamplingMode::Exact => run_hdt_exact_each(pc, f),
        SamplingMode::MonteCarlo { .. } => run_hdt_sampled_each(pc, f),
    }
}

fn estimates(
    ens: &ProjectedEnsemble,
    orders: &[u32],
    block: Option<usize>,
    seed: u64,
) -> hdtlab::Result<Vec<FramePotentialEstimate>> {
    match (ens.counts(), block) {
        (Some(counts), Some(b)) => frame_potential_blocked(ens.states(), counts, orders, b, seed),
        _ => frame_potentials(ens, orders),
    }
}

/// `F^(K)(t)` for every realization and step, in realization order.
fn frame_series(
    cfg: &ExperimentConfig,
    pc: &ProtocolConfig,
) -> Result<Vec<Vec<Vec<FramePotentialEstimate>>>, CliError> {
    let block = cfg.numerics.u_statistic_block;
    let series = (0..pc.realizations)
        .into_par_iter()
        .map(|r| {
            let run = pc.for_realization(r);
            let mut steps = Vec::with_capacity(pc.steps);
            each_step(&run, |t, ens| {
                let seed = mix(mix(cfg.master_seed, r as u64), t as u64);
                steps.push(estimates(&ens, &cfg.orders, block, seed)?);
                Ok(())
            })?;
            Ok(steps)
        })
        .collect::<hdtlab::Result<Vec<_>>>()?;
    Ok(series)
}

fn series_plot(
    name: String,
    title: String,
    rows: &[ResultRow],
    metric: &str,
    k: u32,
    x_scale: f64,
) -> Plot {
    let agg = crate::compare::aggregate(rows);
    let points = agg
        .iter()
        .filter(|a| a.metric == metric && a.k == k)
        .map(|a| (a.step as f64 * x_scale, a.mean))
        .collect();
    Plot {
        name,
        title,
        points,
    }
}

fn frame_experiment(cfg: &ExperimentConfig, rescale: bool) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let n_data = cfg.protocol.as_ref().map_or(0, |p| p.n_data);
    let d_a = 1usize << n_data;
    for n_b in cfg.ancillas() {
        let pc = cfg.protocol_config(n_b)?;
        let exp = label(cfg, n_b);
        let series = frame_series(cfg, &pc)?;
        let mut rows = Vec::new();
        for (r, steps) in series.iter().enumerate() {
            for (i, ests) in steps.iter().enumerate() {
                let t = i as u64 + 1;
                for e in ests {
                    rows.push(
                        ResultRow::new(&exp, Some(r), t, FRAME_POTENTIAL, e.k, e.value)
                            .with_error(e.stderr, e.n_samples),
                    );
                    let fh = haar_frame_potential(d_a, e.k);
                    rows.push(
                        ResultRow::new(
                            &exp,
                            Some(r),
                            t,
                            "frame_potential_deviation",
                            e.k,
                            e.value / fh - 1.0,
                        )
                        .with_error(e.stderr / fh, e.n_samples),
                    );
                }
            }
            if rescale {
                let last = steps.last().expect("at least one step");
                for (i, ests) in steps.iter().take(steps.len() - 1).enumerate() {
                    for (e, end) in ests.iter().zip(last) {
                        rows.push(
                            ResultRow::new(
                                &exp,
                                Some(r),
                                i as u64 + 1,
                                RESCALED,
                                e.k,
                                e.value / end.value,
                            )
                            .with_error(e.stderr / end.value, e.n_samples),
                        );
                    }
                }
            }
        }
        out.oracle.extend(frame_oracle(
            &exp,
            d_a,
            1usize << n_b,
            pc.steps,
            &cfg.orders,
            rescale,
        ));
        for &k in &cfg.orders {
            out.plots.push(series_plot(
                format!("{exp}_{FRAME_POTENTIAL}_K{k}"),
                format!("{exp}: step vs mean F^({k})"),
                &rows,
                FRAME_POTENTIAL,
                k,
                1.0,
            ));
            if rescale {
                out.plots.push(series_plot(
                    format!("{exp}_{RESCALED}_K{k}"),
                    format!("{exp}: rescaled time N_B*t vs F^({k})(t)/F^({k})(T)"),
                    &rows,
                    RESCALED,
                    k,
                    n_b as f64,
                ));
            }
        }
        out.rows.extend(rows);
    }
    if rescale {
        for &k in &cfg.orders {
            let fh = theory::f_haar(d_a as f64, k);
            let points = (0..=40)
                .map(|i| i as f64 * 0.25)
                .map(|tau| (tau, 1.0 + (-tau).exp2() / fh))
                .collect();
            out.plots.push(Plot {
                name: format!("{}_collapse_law_K{k}", cfg.id),
                title: format!("rescaled time vs 1 + 2^-tau / F_Haar^({k})"),
                points,
            });
        }
    }
    Ok(out)
}

/// Theory rows for frame-potential experiments. Only `frame_potential`
/// (first order, an exact typical value) and `rescaled_frame_potential`
/// share names with simulated metrics; bounds get their own names.
pub fn frame_oracle(
    exp: &str,
    d_a: usize,
    d_b: usize,
    steps: usize,
    orders: &[u32],
    rescale: bool,
) -> Vec<ResultRow> {
    let (da, db) = (d_a as f64, d_b as f64);
    let mut rows = Vec::new();
    let n_b = d_b.trailing_zeros();
    for &k in orders {
        let fh = theory::f_haar(da, k);
        let end = theory::f1_hdt(da, db, Horizon::Step(steps as u32));
        for t in 1..=steps as u64 {
            let h = Horizon::Step(t as u32);
            if k == 1 {
                rows.push(ResultRow::new(
                    exp,
                    None,
                    t,
                    FRAME_POTENTIAL,
                    1,
                    theory::f1_hdt(da, db, h),
                ));
                if rescale && (t as usize) < steps {
                    rows.push(ResultRow::new(
                        exp,
                        None,
                        t,
                        RESCALED,
                        1,
                        theory::f1_hdt(da, db, h) / end,
                    ));
                }
            }
            let bound = theory::fk_hdt_lower_bound(da, db, k, h, BoundForm::Asymptotic);
            rows.push(ResultRow::new(
                exp,
                None,
                t,
                "frame_potential_lower_bound",
                k,
                bound,
            ));
            let finite = theory::fk_hdt_lower_bound(da, db, k, h, BoundForm::FiniteSize);
            rows.push(ResultRow::new(
                exp,
                None,
                t,
                "frame_potential_lower_bound_finite",
                k,
                finite,
            ));
            rows.push(ResultRow::new(exp, None, t, "frame_potential_haar", k, fh));
            if rescale {
                let law = theory::rescaled_fp(da, k, n_b, h);
                rows.push(ResultRow::new(
                    exp,
                    None,
                    t,
                    "rescaled_collapse_law",
                    k,
                    law.f_collapse,
                ));
                rows.push(ResultRow::new(
                    exp,
                    None,
                    t,
                    "rescaled_bound",
                    k,
                    law.f_bound,
                ));
            }
        }
        if steps == 1 {
            rows.push(ResultRow::new(
                exp,
                None,
                1,
                "frame_potential_replica",
                k,
                theory::fk_dt(da, db, k),
            ));
        }
    }
    rows
}

fn pop_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p = cfg.protocol.as_ref().expect("validated");
    let pop = cfg.pop.as_ref().expect("validated");
    let reference = StateVector::basis_state(p.n_data, pop.reference)?;
    let d_a = 1usize << p.n_data;
    let mut out = Outcome::default();
    for n_b in cfg.ancillas() {
        let pc = cfg.protocol_config(n_b)?;
        let exp = label(cfg, n_b);
        let per_real = (0..pc.realizations)
            .into_par_iter()
            .map(|r| {
                let mut hists = Vec::new();
                each_step(&pc.for_realization(r), |_, ens| {
                    hists.push(pop_collect(&ens, &reference, pop.bins)?);
                    Ok(())
                })?;
                Ok(hists)
            })
            .collect::<hdtlab::Result<Vec<_>>>()?;
        for (r, hists) in per_real.iter().enumerate() {
            for (i, h) in hists.iter().enumerate() {
                let t = i as u64 + 1;
                let density = h.density();
                for (b, (&rho, &m)) in density.iter().zip(&h.mass).enumerate() {
                    let width = h.bin_edges[b + 1] - h.bin_edges[b];
                    let err = match h.counts.is_empty() {
                        true => 0.0,
                        false => (m * (1.0 - m) / h.n_entries as f64).sqrt() / width,
                    };
                    out.rows.push(
                        ResultRow::new(&exp, Some(r), t, "pop_density", b as u32, rho)
                            .with_error(err, h.n_entries),
                    );
                }
                out.rows.push(
                    ResultRow::new(&exp, Some(r), t, "pop_mean_overlap", 0, h.mean_overlap)
                        .with_error(0.0, h.n_entries),
                );
                if let Ok(test) = pt_chi_square(h) {
                    out.rows.push(
                        ResultRow::new(
                            &exp,
                            Some(r),
                            t,
                            "pt_p_value",
                            test.dof as u32,
                            test.p_value,
                        )
                        .with_error(0.0, h.n_entries),
                    );
                    out.rows.push(
                        ResultRow::new(
                            &exp,
                            Some(r),
                            t,
                            "pt_chi_square",
                            test.dof as u32,
                            test.statistic,
                        )
                        .with_error(0.0, h.n_entries),
                    );
                    if r == 0 && (t == 1 || t as usize == hists.len()) {
                        out.notes.push(format!(
                            "{exp} realization 0 step {t}: chi-square {} on {} dof, p = {}",
                            test.statistic, test.dof, test.p_value
                        ));
                    }
                }
            }
        }
        if let Some(h) = per_real.first().and_then(|v| v.last()) {
            for t in 1..=pc.steps as u64 {
                for b in 0..h.bins() {
                    let (lo, hi) = (h.bin_edges[b], h.bin_edges[b + 1]);
                    let expected = (pt_cdf(hi, d_a) - pt_cdf(lo, d_a)) / (hi - lo);
                    out.oracle.push(ResultRow::new(
                        &exp,
                        None,
                        t,
                        "pop_density",
                        b as u32,
                        expected,
                    ));
                }
            }
            let centers = |h: &hdtlab::metrics::PopHistogram| -> Vec<f64> {
                h.bin_edges
                    .windows(2)
                    .map(|w| 0.5 * (w[0] + w[1]))
                    .collect()
            };
            let first = &per_real[0][0];
            out.plots.push(Plot {
                name: format!("{exp}_pop_first_step"),
                title: format!("{exp}: overlap vs density, step 1, realization 0"),
                points: centers(first).into_iter().zip(first.density()).collect(),
            });
            out.plots.push(Plot {
                name: format!("{exp}_pop_final_step"),
                title: format!(
                    "{exp}: overlap vs density, step {}, realization 0",
                    pc.steps
                ),
                points: centers(h).into_iter().zip(h.density()).collect(),
            });
            out.plots.push(Plot {
                name: format!("{exp}_porter_thomas"),
                title: format!("overlap vs Porter-Thomas density, d = {d_a}"),
                points: (0..=200)
                    .map(|i| i as f64 / 200.0)
                    .map(|x| (x, hdtlab::metrics::pt_density(x, d_a)))
                    .collect(),
            });
        }
    }
    Ok(out)
}

fn mi_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p = cfg.protocol.as_ref().expect("validated");
    let mi = cfg.mi.as_ref().expect("validated");
    let opts = MiOptions {
        mc_threshold: mi.mc_threshold,
        shots: mi.shots,
    };
    let mut out = Outcome::default();
    for n_b in cfg.ancillas() {
        let pc = cfg.protocol_config(n_b)?;
        let exp = label(cfg, n_b);
        let per_real = (0..pc.realizations)
            .into_par_iter()
            .map(|r| mi_sweep(&pc.for_realization(r), &opts))
            .collect::<hdtlab::Result<Vec<_>>>()?;
        for (r, sweep) in per_real.iter().enumerate() {
            for e in sweep.iter().filter(|e| e.swept > 0) {
                let err = match e.mode {
                    MiMode::Exact => 0.0,
                    MiMode::Sampled => e.history_spread / (e.n_histories as f64).sqrt(),
                };
                let t = e.swept as u64;
                out.rows.push(
                    ResultRow::new(&exp, Some(r), t, "mutual_information", 0, e.avg_mi)
                        .with_error(err, e.n_histories),
                );
                out.rows.push(
                    ResultRow::new(&exp, Some(r), t, "renyi_bound", 0, e.avg_renyi_bound)
                        .with_error(err, e.n_histories),
                );
                out.rows.push(
                    ResultRow::new(&exp, Some(r), t, "mi_history_spread", 0, e.history_spread)
                        .with_error(0.0, e.n_histories),
                );
            }
        }
        if pc.steps == 1 {
            let bound = theory::dt_mi_bound(p.n_data as u32, (1usize << n_b) as f64);
            out.oracle
                .push(ResultRow::new(&exp, None, 1, "dt_mi_bound", 0, bound));
        }
        for metric in ["mutual_information", "renyi_bound"] {
            out.plots.push(series_plot(
                format!("{exp}_{metric}"),
                format!("{exp}: step vs {metric} (bits)"),
                &out.rows,
                metric,
                0,
                1.0,
            ));
        }
        let agg = crate::compare::aggregate(&out.rows);
        if let Some(last) = agg
            .iter()
            .filter(|a| a.experiment == exp && a.metric == "mutual_information")
            .last()
        {
            out.notes.push(format!(
                "{exp}: mutual information at step {} = {} ± {} bits",
                last.step, last.mean, last.stderr
            ));
        }
        if let Some(bins) = mi.bins {
            let dist = mi_distribution(&pc, pc.steps, bins, &opts)?;
            for (b, &m) in dist.mass.iter().enumerate() {
                out.rows.push(ResultRow::new(
                    &exp,
                    None,
                    pc.steps as u64,
                    "mi_distribution",
                    b as u32,
                    m,
                ));
            }
            out.notes.push(format!(
                "{exp}: step {} distribution mean {} std {} concentration {}",
                dist.step, dist.mean, dist.std_dev, dist.concentration
            ));
        }
    }
    Ok(out)
}

fn qsize_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let q = cfg.qsize.as_ref().expect("validated");
    let exp = cfg.id.as_str();
    let base = ResourceQuery::new(q.n_data, q.k, q.epsilon)?;
    let mut out = Outcome::default();
    let mut best: Option<(u32, f64)> = None;
    let mut points = Vec::new();
    for n_b in q.n_ancilla.0..=q.n_ancilla.1 {
        let query = base.with_ancilla(n_b);
        let size = theory::qsize(&query)?;
        let steps = theory::steps_required(&query)?;
        out.rows
            .push(ResultRow::new(exp, None, n_b as u64, "qsize", q.k, size));
        out.rows.push(ResultRow::new(
            exp,
            None,
            n_b as u64,
            "steps_required",
            q.k,
            steps.steps as f64,
        ));
        points.push((n_b as f64, size));
        if best.is_none_or(|(_, s)| size < s) {
            best = Some((n_b, size));
        }
    }
    let singles = [
        ("qsize_min_ancilla", theory::qsize_min_ancilla(&base)?),
        ("qsize_dt", theory::qsize_dt(&base)?),
        ("min_ancilla_hdt", theory::min_ancilla_hdt(&base)?),
        ("min_ancilla_dt", theory::min_ancilla_dt(&base)?),
        (
            "min_ancilla_dt_finite",
            theory::min_ancilla_dt_finite(&base)?,
        ),
        ("critical_na", theory::critical_na(q.k, q.epsilon)?),
    ];
    for (metric, v) in singles {
        out.rows.push(ResultRow::new(exp, None, 0, metric, q.k, v));
        out.notes.push(format!("{metric} = {v}"));
    }
    let (arg, size) = best.expect("range is non-empty");
    out.rows.push(ResultRow::new(
        exp,
        None,
        0,
        "qsize_argmin_ancilla",
        q.k,
        arg as f64,
    ));
    out.notes.push(format!(
        "circuit size is smallest at N_B = {arg} (size {size}) for N_A = {}",
        q.n_data
    ));
    out.plots.push(Plot {
        name: format!("{exp}_qsize"),
        title: "N_B vs circuit size".into(),
        points,
    });
    Ok(out)
}

fn oracle_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let o = cfg.oracle.as_ref().expect("validated");
    let (d_a, d_b) = (1usize << o.n_data, 1usize << o.n_ancilla);
    let mut out = Outcome::default();
    let mut rows = frame_oracle(&cfg.id, d_a, d_b, o.steps, &o.orders, true);
    if o.orders.contains(&1) {
        rows.push(ResultRow::new(
            &cfg.id,
            None,
            1,
            "frame_potential_dt",
            1,
            theory::f1_dt(d_a as f64, d_b as f64),
        ));
        rows.push(ResultRow::new(
            &cfg.id,
            None,
            0,
            "frame_potential_limit",
            1,
            theory::f1_hdt(d_a as f64, d_b as f64, Horizon::Infinite),
        ));
    }
    for &k in &o.orders {
        out.plots.push(Plot {
            name: format!("{}_lower_bound_K{k}", cfg.id),
            title: format!("step vs asymptotic lower bound on F^({k})"),
            points: rows
                .iter()
                .filter(|r| r.metric == "frame_potential_lower_bound" && r.k == k)
                .map(|r| (r.step as f64, r.value))
                .collect(),
        });
    }
    out.rows = rows;
    Ok(out)
}

fn statmodel_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cfg.statmodel.as_ref().expect("validated");
    let exp = cfg.id.as_str();
    let k = s.k as usize;
    let mut out = Outcome::default();
    for &t in &s.t {
        let t_us = t as usize;
        let value = if s.approx {
            stat_model_sum_approx(s.n, k, t_us, s.d_a, s.d_b)?
        } else {
            stat_model_sum_exact(s.n, k, t_us, s.d_a, s.d_b)?
        };
        out.rows.push(ResultRow::new(
            exp,
            Some(0),
            t as u64,
            "stat_model_sum",
            s.k,
            value,
        ));
        let bound = lower_bound_1dw(s.n, k, t_us, s.d_a, s.d_b)?;
        out.rows.push(ResultRow::new(
            exp,
            Some(0),
            t as u64,
            "stat_model_lower_bound",
            s.k,
            bound,
        ));
        if s.n == 0 && s.k == 1 && !s.approx {
            let f1 = theory::f1_hdt(s.d_a as f64, s.d_b as f64, Horizon::Step(t));
            out.oracle
                .push(ResultRow::new(exp, None, t as u64, "stat_model_sum", 1, f1));
        }
    }
    Ok(out)
}

fn train_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cfg.train.as_ref().expect("validated");
    let exp = cfg.id.as_str();
    let mut tc = hdtlab::qml::TrainConfig::new(s.n_data, s.n_ancilla, s.steps, cfg.master_seed)?;
    if let Some(values) = &s.schedule {
        tc.schedule = hdtlab::qml::TrainSchedule::from_values(values.clone())?;
    }
    tc.layers = s.layers;
    tc.ensembles = s.ensembles;
    tc.shots = s.shots;
    tc.optimizer = s.optimizer;
    tc.validate()?;
    let report = hdtlab::qml::train_hdt(&tc)?;
    let mut out = Outcome::default();
    for st in &report.steps {
        let t = st.step as u64;
        out.rows
            .push(ResultRow::new(exp, Some(0), t, "loss", 0, st.loss));
        out.rows.push(ResultRow::new(
            exp,
            Some(0),
            t,
            "optimizer_iterations",
            0,
            st.iterations as f64,
        ));
        out.rows
            .push(ResultRow::new(exp, Some(0), t, "schedule_q", 0, st.q));
    }
    let t_end = s.steps as u64;
    let n = (s.ensembles * s.shots) as u64;
    out.rows.push(ResultRow::new(
        exp,
        Some(0),
        t_end,
        "purity",
        0,
        report.final_purity,
    ));
    out.rows.push(
        ResultRow::new(exp, Some(0), t_end, FRAME_POTENTIAL, 1, report.f1.mean)
            .with_error(report.f1.stderr, n),
    );
    out.rows.push(
        ResultRow::new(exp, Some(0), t_end, FRAME_POTENTIAL, 4, report.f4.mean)
            .with_error(report.f4.stderr, n),
    );
    let d_a = (1usize << s.n_data) as f64;
    for k in [1, 4] {
        out.oracle.push(ResultRow::new(
            exp,
            None,
            t_end,
            "frame_potential_haar",
            k,
            theory::f_haar(d_a, k),
        ));
    }
    out.plots.push(Plot {
        name: format!("{exp}_loss"),
        title: "step vs trained loss".into(),
        points: report
            .steps
            .iter()
            .map(|s| (s.step as f64, s.loss))
            .collect(),
    });
    out.notes.push(format!(
        "trained with {} layers: F^(1) = {} ± {}, F^(4) = {} ± {}, final purity {}",
        report.layers,
        report.f1.mean,
        report.f1.stderr,
        report.f4.mean,
        report.f4.stderr,
        report.final_purity
    ));
    out.checkpoint = Some(serde_json::json!({
        "schema_version": crate::CHECKPOINT_SCHEMA_VERSION,
        "experiment": exp,
        "master_seed": cfg.master_seed,
        "report": report,
    }));
    Ok(out)
}
