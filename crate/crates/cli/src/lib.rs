//! Experiment runner for the hdtlab toolkit: configuration parsing, seeded
//! execution, CSV persistence and theory comparison.

pub mod compare;
pub mod config;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

use compare::{compare_report, ComparisonReport, Verdict};
use config::{ConfigErrors, ExperimentConfig};
use output::{write_atomic, write_by_metric, write_csv, write_dat, ResultRow};

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RESOURCE_CAP: i32 = 2;
pub const EXIT_COMPARISON: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Core(#[from] hdtlab::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("non-finite result in {0}")]
    NonFinite(String),
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(hdtlab::Error::CapExceeded { .. }) => EXIT_RESOURCE_CAP,
            _ => EXIT_VALIDATION,
        }
    }
}

/// Files and verdict of one run.
#[derive(Debug)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub comparison: Option<ComparisonReport>,
    pub notes: Vec<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        match &self.comparison {
            Some(r) if r.verdict == Verdict::Fail => EXIT_COMPARISON,
            _ => EXIT_OK,
        }
    }
}

/// Runs an experiment and writes its outputs into `out_dir`:
/// `<id>_<metric>.csv` per metric, `<id>_oracle.csv` and
/// `<id>_comparison.csv` when theory rows exist, `<name>.dat` plot series,
/// `<id>_summary.txt`, and `<id>_checkpoint.json` for training.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary, CliError> {
    let outcome = experiments::execute(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io(out_dir.to_path_buf(), e))?;
    let id = &cfg.id;
    let mut files = write_by_metric(out_dir, id, &outcome.rows)?;
    let mut comparison = None;
    if !outcome.oracle.is_empty() {
        let path = out_dir.join(format!("{id}_oracle.csv"));
        write_csv(&path, &outcome.oracle)?;
        files.push(path);
        let report = compare_report(&outcome.rows, &outcome.oracle);
        if report.verdict != Verdict::NoComparablePoints {
            let path = out_dir.join(format!("{id}_comparison.csv"));
            write_csv(&path, &report.to_rows())?;
            files.push(path);
        }
        comparison = Some(report);
    }
    for plot in &outcome.plots {
        let path = out_dir.join(format!("{}.dat", plot.name));
        write_dat(&path, &plot.title, &plot.points)?;
        files.push(path);
    }
    if let Some(ck) = &outcome.checkpoint {
        let path = out_dir.join(format!("{id}_checkpoint.json"));
        write_atomic(&path, serde_json::to_string_pretty(ck)?.as_bytes())?;
        files.push(path);
    }
    let mut summary = format!(
        "experiment {id} ({}), master seed {}\n",
        cfg.kind, cfg.master_seed
    );
    for note in &outcome.notes {
        summary.push_str(note);
        summary.push('\n');
    }
    if let Some(r) = &comparison {
        summary.push_str(&r.to_string());
        summary.push('\n');
    }
    let path = out_dir.join(format!("{id}_summary.txt"));
    write_atomic(&path, summary.as_bytes())?;
    files.push(path);
    Ok(RunSummary {
        files,
        comparison,
        notes: outcome.notes,
    })
}

/// Compares a simulation CSV against a theory CSV.
pub fn compare_files(sim: &Path, theory: &Path) -> Result<ComparisonReport, CliError> {
    let sim: Vec<ResultRow> = output::read_csv(sim)?;
    let theory: Vec<ResultRow> = output::read_csv(theory)?;
    Ok(compare_report(&sim, &theory))
}

/// Reads and validates a configuration file, applying command-line overrides.
pub fn load_config(
    path: &Path,
    seed: Option<u64>,
    cap_qubits: Option<usize>,
) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let mut cfg = config::parse_config(&text)?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(c) = cap_qubits {
        cfg.numerics.dense_cap = c;
    }
    Ok(cfg)
}
