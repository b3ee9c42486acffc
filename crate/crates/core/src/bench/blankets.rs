use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use super::{cell, replicate_seed, ExperimentResult, ReplicateRow};
use crate::blanket::{climb, find_best_partition, pcmb, BlanketResult, SearchOptions};
use crate::ci::{CiTest, Sci, G2};
use crate::data::{forward_sample, BayesNet, SampleSpec};
use crate::error::{Error, Result};
use crate::graph::{
    blanket_roles, cpdag_blanket_roles, mb_set_metrics, orient_cpdag, pc_stable_skeleton, Metrics, PDag, Role, Roles,
};
use crate::table::CategoricalTable;

/// Settings shared by the experiments that run on one repository network.
#[derive(Debug, Clone, Serialize)]
pub struct NetConfig {
    pub net: String,
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub noise: f64,
    pub max_cond: usize,
    pub partition_cap: usize,
    /// Significance level of the G² baselines.
    pub alpha: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            net: "alarm".into(),
            sizes: vec![1000, 5000],
            replicates: 5,
            seed: 0,
            noise: 0.0,
            max_cond: 3,
            partition_cap: 20,
            alpha: 0.01,
        }
    }
}

impl NetConfig {
    fn options(&self) -> SearchOptions {
        SearchOptions { max_cond: self.max_cond, partition_cap: self.partition_cap }
    }

    fn jobs(&self) -> Vec<(usize, usize)> {
        self.sizes.iter().flat_map(|&n| (0..self.replicates).map(move |r| (n, r))).collect()
    }

    fn sample(&self, net: &BayesNet, n: usize, r: usize) -> Result<(CategoricalTable, u64)> {
        let seed = replicate_seed(self.seed, r);
        Ok((forward_sample(net, &SampleSpec::new(n, self.noise, seed)?)?, seed))
    }
}

fn metric_map(items: &[(&str, f64)]) -> BTreeMap<String, f64> {
    items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn insert_metrics(map: &mut BTreeMap<String, f64>, prefix: &str, m: Metrics) {
    map.insert(format!("{prefix}precision"), m.precision);
    map.insert(format!("{prefix}recall"), m.recall);
    map.insert(format!("{prefix}f1"), m.f1);
}

fn climb_roles(r: &BlanketResult) -> Roles {
    let mut roles = Roles::new();
    roles.extend(r.spouses.iter().map(|&v| (v, Role::Spouse)));
    roles.extend(r.parents.iter().map(|&v| (v, Role::Parent)));
    roles.extend(r.children.iter().map(|&v| (v, Role::Child)));
    roles
}

fn membership(members: BTreeSet<usize>) -> Roles {
    members.into_iter().map(|v| (v, Role::Parent)).collect()
}

/// CLIMB on every node, with partition-cap failures split out.
fn climb_all(table: &CategoricalTable, opts: &SearchOptions) -> Result<Vec<Option<BlanketResult>>> {
    (0..table.n_cols())
        .into_par_iter()
        .map(|v| match climb(v, table, &Sci, opts) {
            Ok(r) => Ok(Some(r)),
            Err(Error::PartitionCap { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

fn cap_note(net: &BayesNet, n: usize, r: usize, climbed: &[Option<BlanketResult>]) -> Option<String> {
    let failed: Vec<&str> = (0..climbed.len()).filter(|&v| climbed[v].is_none()).map(|v| net.name(v)).collect();
    (!failed.is_empty()).then(|| {
        format!("n={n} replicate={r}: partition cap exceeded at {}; excluded from averages", failed.join(", "))
    })
}

/// Markov blanket recovery: PCMB with G² and SCI, and CLIMB with SCI.
///
/// Reports undirected blanket precision, recall and F1 averaged over nodes
/// and the number of independence tests. Nodes where CLIMB hits the
/// partition cap are excluded for every method.
pub fn run_mb_benchmark(net: &BayesNet, config: &NetConfig) -> Result<ExperimentResult> {
    let dag = net.dag();
    let truth: Vec<Roles> = (0..net.n_vars()).map(|v| blanket_roles(&dag, v)).collect();
    let opts = config.options();
    let g2 = G2::new(config.alpha);
    let outputs: Vec<(Vec<ReplicateRow>, Option<String>)> = config
        .jobs()
        .into_iter()
        .map(|(n, r)| -> Result<_> {
            let (table, seed) = config.sample(net, n, r)?;
            let climbed = climb_all(&table, &opts)?;
            let kept: Vec<usize> = (0..net.n_vars()).filter(|&v| climbed[v].is_some()).collect();
            let run_pcmb = |test: &dyn CiTest| -> Vec<(Roles, usize)> {
                kept.par_iter()
                    .map(|&v| {
                        let r = pcmb(v, &table, test, &opts);
                        (membership(r.members()), r.tests_performed)
                    })
                    .collect()
            };
            let truths: Vec<Roles> = kept.iter().map(|&v| truth[v].clone()).collect();
            let mut rows = vec![];
            let mut push = |method: &str, found: Vec<(Roles, usize)>, extra: &[(&str, f64)]| {
                let predicted: Vec<Roles> = found.iter().map(|(roles, _)| roles.clone()).collect();
                let tests: usize = found.iter().map(|(_, t)| t).sum();
                let mut metrics = metric_map(extra);
                insert_metrics(&mut metrics, "", mb_set_metrics(&predicted, &truths, false));
                metrics.insert("tests".into(), tests as f64);
                metrics.insert("tests_per_node".into(), if kept.is_empty() { 0.0 } else { tests as f64 / kept.len() as f64 });
                metrics.insert("cap_failures".into(), (net.n_vars() - kept.len()) as f64);
                rows.push(ReplicateRow {
                    cell: cell(&[("net", config.net.clone()), ("n", n.to_string()), ("method", method.into())]),
                    replicate: r,
                    seed,
                    metrics,
                });
            };
            push("PCMB_G2", run_pcmb(&g2), &[]);
            push("PCMB_SCI", run_pcmb(&Sci), &[]);
            let climb_found: Vec<(Roles, usize)> = kept
                .iter()
                .map(|&v| {
                    let b = climbed[v].as_ref().expect("kept nodes succeeded");
                    (membership(b.members()), b.tests_performed)
                })
                .collect();
            let directed: Vec<Roles> = kept.iter().map(|&v| climb_roles(climbed[v].as_ref().expect("kept"))).collect();
            let directed_f1 = mb_set_metrics(&directed, &truths, true).f1;
            push("CLIMB_SCI", climb_found, &[("directed_f1", directed_f1)]);
            Ok((rows, cap_note(net, n, r, &climbed)))
        })
        .collect::<Result<_>>()?;
    let (rows, notes) = flatten(outputs);
    Ok(ExperimentResult::new("mb", config, rows, notes))
}

fn flatten(outputs: Vec<(Vec<ReplicateRow>, Option<String>)>) -> (Vec<ReplicateRow>, Vec<String>) {
    let mut rows = vec![];
    let mut notes = vec![];
    for (r, note) in outputs {
        rows.extend(r);
        notes.extend(note);
    }
    (rows, notes)
}

/// Share of `pc` that `find_best_partition` puts in its true role, or `None` for an empty set.
pub(crate) fn partition_accuracy(dag: &PDag, v: usize, table: &CategoricalTable, cap: usize) -> Result<Option<f64>> {
    let parents = dag.parents(v);
    let children = dag.children(v);
    let mut pc: Vec<usize> = parents.iter().chain(&children).copied().collect();
    pc.sort_unstable();
    if pc.is_empty() {
        return Ok(None);
    }
    let found = find_best_partition(v, &pc, table, cap)?;
    let right = found.parents.iter().filter(|p| parents.contains(p)).count()
        + found.children.iter().filter(|c| children.contains(c)).count();
    Ok(Some(right as f64 / pc.len() as f64))
}

/// Parent/child partition accuracy given the true parents-and-children sets.
pub fn run_partition_benchmark(net: &BayesNet, config: &NetConfig) -> Result<ExperimentResult> {
    let dag = net.dag();
    let outputs: Vec<(Vec<ReplicateRow>, Option<String>)> = config
        .jobs()
        .into_par_iter()
        .map(|(n, r)| -> Result<_> {
            let (table, seed) = config.sample(net, n, r)?;
            let per_node: Vec<Option<f64>> = (0..net.n_vars())
                .into_par_iter()
                .map(|v| partition_accuracy(&dag, v, &table, config.partition_cap))
                .collect::<Result<_>>()?;
            let scored: Vec<f64> = per_node.into_iter().flatten().collect();
            let accuracy = if scored.is_empty() { 1.0 } else { scored.iter().sum::<f64>() / scored.len() as f64 };
            let row = ReplicateRow {
                cell: cell(&[("net", config.net.clone()), ("n", n.to_string())]),
                replicate: r,
                seed,
                metrics: metric_map(&[("accuracy", accuracy), ("nodes_scored", scored.len() as f64)]),
            };
            Ok((vec![row], None))
        })
        .collect::<Result<_>>()?;
    let (rows, notes) = flatten(outputs);
    Ok(ExperimentResult::new("partition", config, rows, notes))
}

/// Role-sensitive blanket precision and recall: CLIMB against blankets read
/// off stable-PC graphs (G² and SCI). Undirected PC neighbours never count
/// as correct.
pub fn run_cmb_benchmark(net: &BayesNet, config: &NetConfig) -> Result<ExperimentResult> {
    let dag = net.dag();
    let truth: Vec<Roles> = (0..net.n_vars()).map(|v| blanket_roles(&dag, v)).collect();
    let opts = config.options();
    let g2 = G2::new(config.alpha);
    let outputs: Vec<(Vec<ReplicateRow>, Option<String>)> = config
        .jobs()
        .into_iter()
        .map(|(n, r)| -> Result<_> {
            let (table, seed) = config.sample(net, n, r)?;
            let climbed = climb_all(&table, &opts)?;
            let kept: Vec<usize> = (0..net.n_vars()).filter(|&v| climbed[v].is_some()).collect();
            let truths: Vec<Roles> = kept.iter().map(|&v| truth[v].clone()).collect();
            let mut rows = vec![];
            let mut push = |method: &str, predicted: Vec<Roles>| {
                let mut metrics = BTreeMap::new();
                insert_metrics(&mut metrics, "", mb_set_metrics(&predicted, &truths, true));
                rows.push(ReplicateRow {
                    cell: cell(&[("net", config.net.clone()), ("n", n.to_string()), ("method", method.into())]),
                    replicate: r,
                    seed,
                    metrics,
                });
            };
            push("CLIMB_SCI", kept.iter().map(|&v| climb_roles(climbed[v].as_ref().expect("kept"))).collect());
            for (method, test) in [("PC_G2", &g2 as &dyn CiTest), ("PC_SCI", &Sci)] {
                let skeleton = pc_stable_skeleton(&table, test, Some(config.max_cond));
                let cpdag = orient_cpdag(&skeleton.graph, &skeleton.sepsets);
                push(method, kept.iter().map(|&v| cpdag_blanket_roles(&cpdag, v)).collect());
            }
            Ok((rows, cap_note(net, n, r, &climbed)))
        })
        .collect::<Result<_>>()?;
    let (rows, notes) = flatten(outputs);
    Ok(ExperimentResult::new("cmb", config, rows, notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Variable;

    fn var(name: &str) -> Variable {
        Variable { name: name.into(), states: vec!["0".into(), "1".into()] }
    }

    fn single() -> BayesNet {
        BayesNet::new(vec![var("A")], vec![vec![]], vec![vec![0.3, 0.7]]).unwrap()
    }

    #[test]
    fn one_node_network_is_trivially_perfect() {
        let config = NetConfig { net: "one".into(), sizes: vec![50], replicates: 2, ..Default::default() };
        let r = run_mb_benchmark(&single(), &config).unwrap();
        assert_eq!(r.rows.len(), 6);
        for row in &r.rows {
            assert_eq!(row.metrics["f1"], 1.0);
        }
        let p = run_partition_benchmark(&single(), &config).unwrap();
        assert_eq!(p.rows[0].metrics["nodes_scored"], 0.0);
    }

    /// Two-node net where the child is a deterministic function of the parent.
    fn functional_pair(parent_states: usize, child_states: usize, f: impl Fn(usize) -> usize) -> BayesNet {
        let states = |k: usize| (0..k).map(|i| i.to_string()).collect();
        let mut cpt = vec![0.0; parent_states * child_states];
        for a in 0..parent_states {
            cpt[a * child_states + f(a)] = 1.0;
        }
        BayesNet::new(
            vec![Variable { name: "A".into(), states: states(parent_states) }, Variable { name: "B".into(), states: states(child_states) }],
            vec![vec![], vec![0]],
            vec![vec![1.0 / parent_states as f64; parent_states], cpt],
        )
        .unwrap()
    }

    /// Scores of leaf B with A as its parent and with A as its child.
    fn leaf_scores(table: &CategoricalTable) -> (f64, f64) {
        let score = |parents: Vec<usize>, children: Vec<usize>| {
            crate::blanket::score_partition(1, &crate::blanket::Partition { parents, children }, table)
        };
        (score(vec![0], vec![]), score(vec![], vec![0]))
    }

    #[test]
    fn deterministic_leaf_follows_the_score_oracle() {
        let cases: [(usize, usize, fn(usize) -> usize); 3] = [(2, 4, |a| 3 * a), (4, 2, |a| a % 2), (3, 3, |a| (a + 1) % 3)];
        for (ka, kb, f) in cases {
            let net = functional_pair(ka, kb, f);
            let table = forward_sample(&net, &SampleSpec { n: 1000, noise: 0.0, seed: 1 }).unwrap();
            let (as_parent, as_child) = leaf_scores(&table);
            let expected = if as_parent < as_child { 1.0 } else { 0.0 };
            assert_eq!(partition_accuracy(&net.dag(), 1, &table, 20).unwrap(), Some(expected), "{ka} -> {kb}");
        }
    }

    #[test]
    fn bijection_on_equal_domains_ties() {
        let net = functional_pair(3, 3, |a| (a + 1) % 3);
        let table = forward_sample(&net, &SampleSpec { n: 600, noise: 0.0, seed: 2 }).unwrap();
        let (as_parent, as_child) = leaf_scores(&table);
        assert_eq!(as_parent, as_child);
        // The tie goes to fewer parents.
        assert_eq!(partition_accuracy(&net.dag(), 1, &table, 20).unwrap(), Some(0.0));
    }

    #[test]
    fn noisy_leaf_follows_the_score_oracle() {
        let net = BayesNet::new(
            vec![var("A"), var("B")],
            vec![vec![], vec![0]],
            vec![vec![0.3, 0.7], vec![0.9, 0.1, 0.2, 0.8]],
        )
        .unwrap();
        let table = forward_sample(&net, &SampleSpec { n: 2000, noise: 0.0, seed: 3 }).unwrap();
        let (as_parent, as_child) = leaf_scores(&table);
        let expected = if as_parent < as_child { 1.0 } else { 0.0 };
        assert_eq!(partition_accuracy(&net.dag(), 1, &table, 20).unwrap(), Some(expected));
    }
}
