//! Run records, summaries and their CSV forms.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use archerfish::aho::ConvergenceTrace;
use archerfish::constrained::{metrics_from_bests, SUCCESS_TOLERANCE};
use archerfish::Evaluation;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::CliError;

/// One run, as written to `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub problem: String,
    pub dim: usize,
    pub theta: f64,
    pub omega: f64,
    pub seed: u64,
    pub fes: u64,
    /// `f(best) - f*`.
    pub best_error: f64,
    pub feasible: bool,
    pub mv: f64,
}

impl ResultRow {
    pub fn cell(&self) -> CellKey {
        CellKey {
            problem: self.problem.clone(),
            dim: self.dim,
            theta: self.theta,
            omega: self.omega,
        }
    }
}

/// Runs sharing a problem, dimension and parameter pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CellKey {
    pub problem: String,
    pub dim: usize,
    pub theta: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub problem: String,
    pub dim: usize,
    pub theta: f64,
    pub omega: f64,
    pub runs: usize,
    pub best: f64,
    pub median: f64,
    pub mean: f64,
    pub worst: f64,
    pub std: f64,
    #[serde(rename = "FR")]
    pub fr: f64,
    #[serde(rename = "MV")]
    pub mv: f64,
    #[serde(rename = "SR")]
    pub sr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub best: f64,
    pub median: f64,
    pub mean: f64,
    pub worst: f64,
    pub std: f64,
}

/// Order statistics, mean and sample standard deviation (`n - 1`; 0 for a
/// single value). Even counts take the midpoint median.
pub fn summarize(values: &[f64]) -> Option<Moments> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    };
    let mean = v.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(Moments {
        best: v[0],
        median,
        mean,
        worst: v[n - 1],
        std,
    })
}

/// One summary row per cell, in first-appearance order.
pub fn summary_rows(rows: &[ResultRow]) -> Vec<SummaryRow> {
    group_cells(rows)
        .into_iter()
        .map(|(key, members)| {
            let errors: Vec<f64> = members.iter().map(|r| r.best_error).collect();
            let m = summarize(&errors).expect("groups are non-empty");
            let bests: Vec<Evaluation> = members
                .iter()
                .map(|r| Evaluation::new(r.best_error, if r.feasible { 0.0 } else { r.mv }))
                .collect();
            let metrics = metrics_from_bests(&bests, 0.0).expect("groups are non-empty");
            SummaryRow {
                problem: key.problem,
                dim: key.dim,
                theta: key.theta,
                omega: key.omega,
                runs: members.len(),
                best: m.best,
                median: m.median,
                mean: m.mean,
                worst: m.worst,
                std: m.std,
                fr: metrics.fr,
                mv: metrics.mv,
                sr: metrics.sr,
            }
        })
        .collect()
}

/// Rows grouped by cell, preserving first-appearance order.
pub fn group_cells(rows: &[ResultRow]) -> Vec<(CellKey, Vec<&ResultRow>)> {
    let mut groups: Vec<(CellKey, Vec<&ResultRow>)> = Vec::new();
    for row in rows {
        let key = row.cell();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => groups.push((key, vec![row])),
        }
    }
    groups
}

/// Success means feasible and within [`SUCCESS_TOLERANCE`] of the optimum.
pub fn is_success(row: &ResultRow) -> bool {
    row.feasible && row.best_error <= SUCCESS_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub fe: u64,
    pub best_value: f64,
}

pub fn trace_rows(trace: &ConvergenceTrace) -> Vec<TraceRow> {
    trace
        .samples
        .iter()
        .map(|p| TraceRow {
            fe: p.fes,
            best_value: p.best.value,
        })
        .collect()
}

/// A cell whose run returned an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRow {
    pub problem: String,
    pub dim: usize,
    pub theta: f64,
    pub omega: f64,
    pub seed: u64,
    pub error: String,
}

pub fn to_csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

pub fn from_csv_bytes<T: DeserializeOwned>(bytes: &[u8]) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(bytes).deserialize().collect()
}

/// Writes rows with a header; an empty slice still gets a header when
/// `header` is given.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &str) -> Result<(), CliError> {
    let bytes = if rows.is_empty() {
        format!("{header}\n").into_bytes()
    } else {
        to_csv_bytes(rows).map_err(CliError::csv(path))?
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let mut f = fs::File::create(path).map_err(CliError::io(path))?;
    f.write_all(&bytes).map_err(CliError::io(path))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    from_csv_bytes(&bytes).map_err(CliError::csv(path))
}

pub const RESULTS_HEADER: &str = "problem,dim,theta,omega,seed,fes,best_error,feasible,mv";
pub const SUMMARY_HEADER: &str = "problem,dim,theta,omega,runs,best,median,mean,worst,std,FR,MV,SR";
pub const TRACE_HEADER: &str = "fe,best_value";
pub const FAILURE_HEADER: &str = "problem,dim,theta,omega,seed,error";

pub fn trace_file_name(problem: &str, dim: usize, config: usize, rep: usize) -> PathBuf {
    PathBuf::from(format!("{problem}_d{dim}_c{config}_r{rep}.csv"))
}
