//! Experiment harness.
//!
//! Every experiment is a pure function of its config: replicate `r` uses seed
//! `seed ^ r`, rows are sorted before they are written, and output files are
//! byte-identical across runs.

mod blankets;
mod discovery;
mod dsep;
mod zero;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub use blankets::{run_cmb_benchmark, run_mb_benchmark, run_partition_benchmark, NetConfig};
pub use discovery::{run_causal_discovery, DiscoveryConfig, NamedNet};
pub use dsep::{run_dsep_benchmark, DsepConfig};
pub use zero::{run_zero_baseline, ZeroConfig};

/// Seed of replicate `r`.
pub fn replicate_seed(base: u64, r: usize) -> u64 {
    base ^ r as u64
}

/// Cell coordinates (`n`, `noise`, `method`, ...) of a row, as strings.
pub type Cell = BTreeMap<String, String>;

pub(crate) fn cell(pairs: &[(&str, String)]) -> Cell {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Metrics of one replicate in one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRow {
    pub cell: Cell,
    pub replicate: usize,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub cell: Cell,
    pub metric: String,
    pub mean: f64,
    /// Sample standard deviation; zero for a single replicate.
    pub sd: f64,
    pub count: usize,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub config: serde_json::Value,
    pub rows: Vec<ReplicateRow>,
    pub aggregates: Vec<Aggregate>,
    /// Things worth knowing that are not metrics, such as skipped nodes.
    pub notes: Vec<String>,
}

impl ExperimentResult {
    /// Sorts the rows and computes the per-cell aggregates.
    pub fn new(experiment: &str, config: &impl Serialize, mut rows: Vec<ReplicateRow>, notes: Vec<String>) -> Self {
        rows.sort_by(|a, b| a.cell.cmp(&b.cell).then(a.replicate.cmp(&b.replicate)));
        let mut grouped: BTreeMap<(Cell, String), Vec<f64>> = BTreeMap::new();
        for row in &rows {
            for (metric, &v) in &row.metrics {
                grouped.entry((row.cell.clone(), metric.clone())).or_default().push(v);
            }
        }
        let aggregates = grouped
            .into_iter()
            .map(|((cell, metric), values)| {
                let (mean, sd) = mean_sd(&values);
                Aggregate { cell, metric, mean, sd, count: values.len() }
            })
            .collect();
        Self {
            experiment: experiment.to_string(),
            config: serde_json::to_value(config).expect("configs serialize"),
            rows,
            aggregates,
            notes,
        }
    }

    /// The aggregate of `metric` over the cell matching every given coordinate.
    pub fn aggregate(&self, coords: &[(&str, &str)], metric: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| {
            a.metric == metric && coords.iter().all(|(k, v)| a.cell.get(*k).map(String::as_str) == Some(*v))
        })
    }

    /// Mean of `metric` in the matching cell, if present.
    pub fn mean(&self, coords: &[(&str, &str)], metric: &str) -> Option<f64> {
        self.aggregate(coords, metric).map(|a| a.mean)
    }

    /// Rows of the cell matching every given coordinate.
    pub fn rows_in<'a>(&'a self, coords: &'a [(&'a str, &'a str)]) -> impl Iterator<Item = &'a ReplicateRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| coords.iter().all(|(k, v)| r.cell.get(*k).map(String::as_str) == Some(*v)))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("results serialize");
        text.push('\n');
        text
    }

    /// One line per replicate row: cell columns, then metric columns.
    pub fn to_csv(&self) -> Result<String> {
        let mut cell_keys: Vec<&String> = self.rows.iter().flat_map(|r| r.cell.keys()).collect();
        cell_keys.sort();
        cell_keys.dedup();
        let mut metric_keys: Vec<&String> = self.rows.iter().flat_map(|r| r.metrics.keys()).collect();
        metric_keys.sort();
        metric_keys.dedup();

        let mut w = csv::Writer::from_writer(vec![]);
        let mut header = vec!["experiment".to_string()];
        header.extend(cell_keys.iter().map(|k| k.to_string()));
        header.extend(["replicate".to_string(), "seed".to_string()]);
        header.extend(metric_keys.iter().map(|k| k.to_string()));
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![self.experiment.clone()];
            record.extend(cell_keys.iter().map(|k| row.cell.get(*k).cloned().unwrap_or_default()));
            record.extend([row.replicate.to_string(), row.seed.to_string()]);
            record.extend(metric_keys.iter().map(|k| row.metrics.get(*k).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&record)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Writes `<experiment>.json` and `<experiment>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join(format!("{}.json", self.experiment));
        let csv = dir.join(format!("{}.csv", self.experiment));
        std::fs::write(&json, self.to_json())?;
        std::fs::write(&csv, self.to_csv()?)?;
        Ok((json, csv))
    }
}
