use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{cell, replicate_seed, ExperimentResult, ReplicateRow};
use crate::ci::{CiTest, Sci, G2};
use crate::data::{forward_sample, BayesNet, SampleSpec};
use crate::error::Result;
use crate::graph::{climb_orient, directed_edge_metrics, orient_cpdag, pc_stable_skeleton, PDag};

/// A network with the name used in result cells.
#[derive(Debug, Clone)]
pub struct NamedNet {
    pub name: String,
    pub net: BayesNet,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscoveryConfig {
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub noise: f64,
    pub max_cond: usize,
    pub alpha: f64,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self { sizes: vec![5000], replicates: 5, seed: 0, noise: 0.0, max_cond: 3, alpha: 0.01 }
    }
}

fn score(predicted: &PDag, truth: &PDag, extra: &[(&str, f64)]) -> Result<BTreeMap<String, f64>> {
    let m = directed_edge_metrics(predicted, truth)?;
    let mut metrics: BTreeMap<String, f64> = extra.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    metrics.insert("precision".into(), m.precision);
    metrics.insert("recall".into(), m.recall);
    metrics.insert("f1".into(), m.f1);
    metrics.insert("undirected".into(), predicted.n_undirected() as f64);
    Ok(metrics)
}

/// Directed-edge precision, recall and F1 of stable PC (G² and SCI), and of
/// both after CLIMB orientation of their undirected edges.
///
/// `external` is an optional CPDAG from another search (FGES, say) over the
/// same variables; it is scored as is and after CLIMB orientation against
/// every network whose node set it matches.
pub fn run_causal_discovery(
    nets: &[NamedNet],
    external: Option<&PDag>,
    config: &DiscoveryConfig,
) -> Result<ExperimentResult> {
    let jobs: Vec<(&NamedNet, usize, usize)> = nets
        .iter()
        .flat_map(|net| config.sizes.iter().flat_map(move |&n| (0..config.replicates).map(move |r| (net, n, r))))
        .collect();
    let mut notes = vec![];
    if let Some(cpdag) = external {
        for net in nets {
            if cpdag.aligned_to(&net.net.names()).is_err() {
                notes.push(format!("external CPDAG does not match the nodes of {}; skipped there", net.name));
            }
        }
    }
    let per_job: Vec<Vec<ReplicateRow>> = jobs
        .par_iter()
        .map(|&(named, n, r)| -> Result<Vec<ReplicateRow>> {
            let seed = replicate_seed(config.seed, r);
            let table = forward_sample(&named.net, &SampleSpec::new(n, config.noise, seed)?)?;
            let truth = named.net.dag();
            let mut rows = vec![];
            let mut push = |method: &str, metrics: BTreeMap<String, f64>| {
                rows.push(ReplicateRow {
                    cell: cell(&[("net", named.name.clone()), ("n", n.to_string()), ("method", method.into())]),
                    replicate: r,
                    seed,
                    metrics,
                });
            };
            let g2 = G2::new(config.alpha);
            for (label, test) in [("G2", &g2 as &dyn CiTest), ("SCI", &Sci)] {
                let skeleton = pc_stable_skeleton(&table, test, Some(config.max_cond));
                let cpdag = orient_cpdag(&skeleton.graph, &skeleton.sepsets);
                push(&format!("PC_{label}"), score(&cpdag, &truth, &[("tests", skeleton.tests_performed as f64)])?);
                let oriented = climb_orient(&cpdag, &table)?;
                push(
                    &format!("PC_{label}_CLIMB"),
                    score(&oriented.graph, &truth, &[("cycle_nodes", oriented.cycle_nodes.len() as f64)])?,
                );
            }
            if let Some(cpdag) = external.and_then(|g| g.aligned_to(&named.net.names()).ok()) {
                push("EXTERNAL", score(&cpdag, &truth, &[])?);
                let oriented = climb_orient(&cpdag, &table)?;
                push(
                    "EXTERNAL_CLIMB",
                    score(&oriented.graph, &truth, &[("cycle_nodes", oriented.cycle_nodes.len() as f64)])?,
                );
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentResult::new("discovery", config, per_job.into_iter().flatten().collect(), notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Variable;

    fn chain() -> BayesNet {
        let var = |name: &str| Variable { name: name.into(), states: vec!["0".into(), "1".into()] };
        BayesNet::new(
            vec![var("A"), var("B"), var("C")],
            vec![vec![], vec![0], vec![0, 1]],
            vec![vec![0.5, 0.5], vec![0.9, 0.1, 0.2, 0.8], vec![0.9, 0.1, 0.4, 0.6, 0.3, 0.7, 0.05, 0.95]],
        )
        .unwrap()
    }

    #[test]
    fn rows_for_every_method() {
        let nets = [NamedNet { name: "tiny".into(), net: chain() }];
        let mut external = PDag::new(chain().names());
        external.add_undirected(0, 1).unwrap();
        external.add_undirected(1, 2).unwrap();
        external.add_undirected(0, 2).unwrap();
        let config = DiscoveryConfig { sizes: vec![800], replicates: 2, ..Default::default() };
        let r = run_causal_discovery(&nets, Some(&external), &config).unwrap();
        assert_eq!(r.rows.len(), 2 * 6);
        for row in &r.rows {
            if row.cell["method"].ends_with("CLIMB") {
                assert_eq!(row.metrics["undirected"], 0.0);
            }
        }
        assert_eq!(r.mean(&[("method", "EXTERNAL")], "f1"), Some(0.0));
    }
}
