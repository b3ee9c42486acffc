use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{cell, replicate_seed, ExperimentResult, ReplicateRow};
use crate::ci::{empirical_cmi, sci_statistic, CiQuery};
use crate::error::Result;
use crate::nml::grouped_entropy_bits;
use crate::table::{CategoricalTable, Grouping};

#[derive(Debug, Clone, Serialize)]
pub struct ZeroConfig {
    pub kx: usize,
    pub ky: Vec<usize>,
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for ZeroConfig {
    fn default() -> Self {
        Self { kx: 4, ky: vec![1, 4, 16, 64, 256, 1024], sizes: vec![1000], replicates: 100, seed: 0 }
    }
}

/// Normalized dependence of `y` on `x` (columns 1 and 0): the plug-in
/// `I(X;Y) / H(X)` and `max(SCI, 0) / (n H(X))`. Both are 0 when `H(X) = 0`.
pub fn dependence_scores(table: &CategoricalTable) -> (f64, f64) {
    let n = table.n_rows();
    let hx = grouped_entropy_bits(table.column(0), table.card(0), &Grouping::single(n)) / n as f64;
    if hx <= 0.0 {
        return (0.0, 0.0);
    }
    let q = CiQuery { table, x: 0, y: 1, z: &[] };
    (empirical_cmi(&q) / hx, sci_statistic(&q).max(0.0) / (n as f64 * hx))
}

/// Independent uniform X and Y over growing `k_Y`: the plug-in score drifts
/// toward 1 while the SCI-based score should stay at 0.
pub fn run_zero_baseline(config: &ZeroConfig) -> Result<ExperimentResult> {
    let jobs: Vec<(usize, usize, usize)> = config
        .sizes
        .iter()
        .flat_map(|&n| config.ky.iter().flat_map(move |&ky| (0..config.replicates).map(move |r| (n, ky, r))))
        .collect();
    let rows: Vec<ReplicateRow> = jobs
        .par_iter()
        .map(|&(n, ky, r)| -> Result<ReplicateRow> {
            let seed = replicate_seed(config.seed, r);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<u32> = (0..n).map(|_| rng.random_range(0..config.kx as u32)).collect();
            let y: Vec<u32> = (0..n).map(|_| rng.random_range(0..ky as u32)).collect();
            let table = CategoricalTable::from_codes(vec![x, y], &[config.kx, ky])?;
            let (plugin, sci) = dependence_scores(&table);
            Ok(ReplicateRow {
                cell: cell(&[("kx", config.kx.to_string()), ("ky", ky.to_string()), ("n", n.to_string())]),
                replicate: r,
                seed,
                metrics: [("f_plugin", plugin), ("f_sci", sci), ("sci_zero", if sci == 0.0 { 1.0 } else { 0.0 })]
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentResult::new("zero-baseline", config, rows, vec![]))
}
