//! Bayesian networks, sampling and tabular I/O.

mod bif;
mod csvio;
mod exact;
mod fixture;
mod sample;

use crate::error::{Error, Result};
use crate::graph::PDag;

pub use bif::{parse_bif, serialize_bif};
pub use csvio::{domains_path, load_csv, read_csv, write_csv, write_csv_to};
pub use exact::{exact_cmi, exact_joint, with_uniform_noise};
pub use fixture::{dsep_fixture, DsepFixture};
pub use sample::{forward_sample, SampleSpec};

/// A discrete variable and its state labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

/// A discrete Bayesian network.
///
/// `cpts[v]` holds one probability row of length `card(v)` per parent
/// configuration. Configurations are ordered with the last parent varying
/// fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    vars: Vec<Variable>,
    parents: Vec<Vec<usize>>,
    cpts: Vec<Vec<f64>>,
    order: Vec<usize>,
}

/// Rows may be off by this much before they are rejected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

impl BayesNet {
    /// Validates shapes and acyclicity. Rows within [`ROW_SUM_TOLERANCE`] of
    /// one are renormalized.
    pub fn new(vars: Vec<Variable>, parents: Vec<Vec<usize>>, mut cpts: Vec<Vec<f64>>) -> Result<Self> {
        let n = vars.len();
        if parents.len() != n || cpts.len() != n {
            return Err(Error::Network("one parent list and one table per variable required".into()));
        }
        for (v, var) in vars.iter().enumerate() {
            if var.states.is_empty() {
                return Err(Error::Network(format!("`{}` has no states", var.name)));
            }
            if vars[..v].iter().any(|o| o.name == var.name) {
                return Err(Error::Network(format!("duplicate variable `{}`", var.name)));
            }
            let ps = &parents[v];
            if ps.iter().any(|&p| p >= n || p == v) {
                return Err(Error::Network(format!("bad parent index for `{}`", var.name)));
            }
            if ps.iter().enumerate().any(|(i, p)| ps[..i].contains(p)) {
                return Err(Error::Network(format!("repeated parent for `{}`", var.name)));
            }
            let k = var.states.len();
            let configs: usize = ps.iter().map(|&p| vars[p].states.len()).product();
            if cpts[v].len() != configs * k {
                return Err(Error::Network(format!(
                    "`{}` needs {} probabilities, got {}",
                    var.name,
                    configs * k,
                    cpts[v].len()
                )));
            }
            for row in cpts[v].chunks_mut(k) {
                if row.iter().any(|p| !(0.0..=1.0 + ROW_SUM_TOLERANCE).contains(p)) {
                    return Err(Error::Network(format!("`{}` has a probability outside [0, 1]", var.name)));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(Error::Network(format!("`{}` has a row summing to {sum}", var.name)));
                }
                if (sum - 1.0).abs() > 1e-12 {
                    row.iter_mut().for_each(|p| *p /= sum);
                }
            }
        }
        let order = topological_order(&parents).map_err(|on_cycle| {
            let names: Vec<String> = on_cycle.iter().map(|&v| vars[v].name.clone()).collect();
            Error::Network(format!("cycle through {}", names.join(", ")))
        })?;
        Ok(Self { vars, parents, cpts, order })
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn name(&self, v: usize) -> &str {
        &self.vars[v].name
    }

    pub fn names(&self) -> Vec<String> {
        self.vars.iter().map(|v| v.name.clone()).collect()
    }

    pub fn states(&self, v: usize) -> &[String] {
        &self.vars[v].states
    }

    pub fn card(&self, v: usize) -> usize {
        self.vars[v].states.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    /// The full flattened table of `v`.
    pub fn cpt(&self, v: usize) -> &[f64] {
        &self.cpts[v]
    }

    pub fn n_configs(&self, v: usize) -> usize {
        self.parents[v].iter().map(|&p| self.card(p)).product()
    }

    /// Index of the parent configuration taken from a full assignment.
    pub fn config_index(&self, v: usize, assignment: &[u32]) -> usize {
        self.parents[v].iter().fold(0, |acc, &p| acc * self.card(p) + assignment[p] as usize)
    }

    pub fn row(&self, v: usize, config: usize) -> &[f64] {
        let k = self.card(v);
        &self.cpts[v][config * k..(config + 1) * k]
    }

    /// A topological order, roots first.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// The network structure as a fully directed graph.
    pub fn dag(&self) -> PDag {
        let mut dag = PDag::new(self.names());
        for (v, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                dag.add_directed(p, v).expect("validated on construction");
            }
        }
        dag
    }

    /// Same structure with every table replaced.
    pub fn with_cpts(&self, cpts: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.vars.clone(), self.parents.clone(), cpts)
    }
}

/// Kahn's algorithm over parent lists; on failure, the nodes lying on cycles.
pub(crate) fn topological_order(parents: &[Vec<usize>]) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let n = parents.len();
    let mut children = vec![vec![]; n];
    for (v, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(v);
        }
    }
    let mut waiting: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| waiting[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            waiting[c] -= 1;
            if waiting[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    let reaches_itself = |start: usize| {
        let mut seen = vec![false; n];
        let mut stack = children[start].clone();
        while let Some(v) = stack.pop() {
            if v == start {
                return true;
            }
            if !seen[v] {
                seen[v] = true;
                stack.extend(&children[v]);
            }
        }
        false
    };
    Err((0..n).filter(|&v| reaches_itself(v)).collect())
}
