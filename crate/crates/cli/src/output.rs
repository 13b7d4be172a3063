//! Result rows, CSV persistence and plot data files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CSV_HEADER: &str = "experiment,realization,step,metric,K,value,stderr,n_samples";

/// One cell of experiment output. Theory rows leave `realization` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub realization: Option<usize>,
    pub step: u64,
    pub metric: String,
    #[serde(rename = "K")]
    pub k: u32,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
}

impl ResultRow {
    pub fn new(
        experiment: &str,
        realization: Option<usize>,
        step: u64,
        metric: &str,
        k: u32,
        value: f64,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            realization,
            step,
            metric: metric.to_string(),
            k,
            value,
            stderr: 0.0,
            n_samples: 0,
        }
    }

    pub fn with_error(mut self, stderr: f64, n_samples: u64) -> Self {
        self.stderr = stderr;
        self.n_samples = n_samples;
        self
    }
}

/// Writes `contents` next to `path` and renames it into place, so an
/// interrupted run never leaves a truncated file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".to_string(),
    });
    let io = |e| CliError::Io(path.to_path_buf(), e);
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)
}

pub fn rows_to_csv(rows: &[ResultRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in rows {
        if !r.value.is_finite() {
            return Err(CliError::NonFinite(format!(
                "{} {} K={} step {}",
                r.experiment, r.metric, r.k, r.step
            )));
        }
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Io(PathBuf::from("<csv buffer>"), e.into_error()))
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<(), CliError> {
    write_atomic(path, &rows_to_csv(rows)?)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(CliError::Invalid(format!(
            "{}: unexpected header {:?}",
            path.display(),
            header.join(",")
        )));
    }
    Ok(r.deserialize().collect::<Result<Vec<ResultRow>, _>>()?)
}

/// Splits rows into one file per metric, `<prefix>_<metric>.csv`.
pub fn write_by_metric(
    dir: &Path,
    prefix: &str,
    rows: &[ResultRow],
) -> Result<Vec<PathBuf>, CliError> {
    let mut groups: BTreeMap<&str, Vec<ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.metric.as_str()).or_default().push(r.clone());
    }
    let mut paths = Vec::new();
    for (metric, group) in groups {
        let path = dir.join(format!("{prefix}_{metric}.csv"));
        write_csv(&path, &group)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Two-column whitespace-separated data for gnuplot.
pub fn write_dat(path: &Path, title: &str, points: &[(f64, f64)]) -> Result<(), CliError> {
    let mut s = format!("# {title}\n");
    for (x, y) in points {
        s.push_str(&format!("{x} {y}\n"));
    }
    write_atomic(path, s.as_bytes())
}
