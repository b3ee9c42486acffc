//! Partially directed graphs and the algorithms that build, orient and score them.

mod dsep;
mod metrics;
mod orient;
mod pc;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dsep::d_separated;
pub use metrics::{
    blanket_roles, cpdag_blanket_roles, directed_edge_metrics, mb_set_metrics, members, Metrics, Role, Roles,
};
pub use orient::{climb_orient, orient_cpdag, Orientation};
pub use pc::{pc_stable_skeleton, Skeleton};

/// A graph with directed (`a -> b`) and undirected (`a -- b`) edges.
///
/// At most one edge joins a pair and there are no self-loops. Undirected
/// edges are stored with the smaller index first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PDag {
    names: Vec<String>,
    directed: BTreeSet<(usize, usize)>,
    undirected: BTreeSet<(usize, usize)>,
}

fn pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl PDag {
    pub fn new(names: Vec<String>) -> Self {
        Self { names, directed: BTreeSet::new(), undirected: BTreeSet::new() }
    }

    pub fn n_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn check_new_edge(&self, a: usize, b: usize) -> Result<()> {
        let n = self.n_nodes();
        if a >= n || b >= n {
            return Err(Error::Graph(format!("edge ({a}, {b}) out of range for {n} nodes")));
        }
        if a == b {
            return Err(Error::Graph(format!("self-loop on `{}`", self.names[a])));
        }
        if self.is_adjacent(a, b) {
            return Err(Error::Graph(format!("`{}` and `{}` are already adjacent", self.names[a], self.names[b])));
        }
        Ok(())
    }

    pub fn add_directed(&mut self, from: usize, to: usize) -> Result<()> {
        self.check_new_edge(from, to)?;
        self.directed.insert((from, to));
        Ok(())
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_new_edge(a, b)?;
        self.undirected.insert(pair(a, b));
        Ok(())
    }

    /// Removes whatever edge joins `a` and `b`.
    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.directed.remove(&(a, b));
        self.directed.remove(&(b, a));
        self.undirected.remove(&pair(a, b));
    }

    /// Replaces the edge between `from` and `to` (of any kind) by `from -> to`.
    pub fn orient(&mut self, from: usize, to: usize) {
        self.remove_edge(from, to);
        self.directed.insert((from, to));
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.directed.contains(&(a, b)) || self.directed.contains(&(b, a)) || self.undirected.contains(&pair(a, b))
    }

    pub fn has_directed(&self, from: usize, to: usize) -> bool {
        self.directed.contains(&(from, to))
    }

    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        self.undirected.contains(&pair(a, b))
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        self.directed.iter().filter(|&&(_, b)| b == v).map(|&(a, _)| a).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.directed.range((v, 0)..(v + 1, 0)).map(|&(_, b)| b).collect()
    }

    pub fn undirected_neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .undirected
            .iter()
            .filter_map(|&(a, b)| if a == v { Some(b) } else if b == v { Some(a) } else { None })
            .collect();
        out.sort_unstable();
        out
    }

    /// All nodes joined to `v` by any edge, ascending.
    pub fn adjacent(&self, v: usize) -> Vec<usize> {
        let mut out = self.parents(v);
        out.extend(self.children(v));
        out.extend(self.undirected_neighbors(v));
        out.sort_unstable();
        out
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.directed.iter().copied()
    }

    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.undirected.iter().copied()
    }

    pub fn n_edges(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    pub fn n_undirected(&self) -> usize {
        self.undirected.len()
    }

    /// The skeleton: every edge made undirected.
    pub fn skeleton(&self) -> PDag {
        let mut g = PDag::new(self.names.clone());
        for &(a, b) in self.directed.iter().chain(&self.undirected) {
            g.undirected.insert(pair(a, b));
        }
        g
    }

    /// Topological order of the directed part, or `None` if it has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n_nodes();
        let mut indegree = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![vec![]; n];
        for &(a, b) in &self.directed {
            indegree[b] += 1;
            out[a].push(b);
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &w in &out[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Nodes lying on some directed cycle, ascending.
    pub fn nodes_on_cycles(&self) -> Vec<usize> {
        let n = self.n_nodes();
        let reach = |from: usize| {
            let mut seen = vec![false; n];
            let mut stack = self.children(from);
            while let Some(v) = stack.pop() {
                if !seen[v] {
                    seen[v] = true;
                    stack.extend(self.children(v));
                }
            }
            seen
        };
        (0..n).filter(|&v| reach(v)[v]).collect()
    }

    /// A copy with the nodes renamed by position; `order[i]` is the old index of new node `i`.
    pub fn permuted(&self, order: &[usize]) -> PDag {
        let mut new_index = vec![0; order.len()];
        for (i, &old) in order.iter().enumerate() {
            new_index[old] = i;
        }
        let mut g = PDag::new(order.iter().map(|&o| self.names[o].clone()).collect());
        for &(a, b) in &self.directed {
            g.directed.insert((new_index[a], new_index[b]));
        }
        for &(a, b) in &self.undirected {
            g.undirected.insert(pair(new_index[a], new_index[b]));
        }
        g
    }

    pub fn to_json(&self) -> PDagJson {
        let edges = self
            .directed
            .iter()
            .map(|&(a, b)| (a, b, true))
            .chain(self.undirected.iter().map(|&(a, b)| (a, b, false)))
            .map(|(a, b, directed)| EdgeJson { a: self.names[a].clone(), b: self.names[b].clone(), directed })
            .collect();
        PDagJson { nodes: self.names.clone(), edges }
    }

    pub fn from_json(json: &PDagJson) -> Result<PDag> {
        let mut g = PDag::new(json.nodes.clone());
        let lookup = |name: &str| g.index_of(name).ok_or_else(|| Error::UnknownVariable(name.to_string()));
        let mut edges = vec![];
        for e in &json.edges {
            edges.push((lookup(&e.a)?, lookup(&e.b)?, e.directed));
        }
        for (a, b, directed) in edges {
            if directed {
                g.add_directed(a, b)?;
            } else {
                g.add_undirected(a, b)?;
            }
        }
        Ok(g)
    }

    /// The same graph with nodes reindexed to match `names`.
    pub fn aligned_to(&self, names: &[String]) -> Result<PDag> {
        let mut sorted_self = self.names.clone();
        let mut sorted_other = names.to_vec();
        sorted_self.sort();
        sorted_other.sort();
        if sorted_self != sorted_other {
            return Err(Error::Graph("graphs are over different node sets".into()));
        }
        let order: Vec<usize> = names.iter().map(|n| self.index_of(n).expect("checked above")).collect();
        Ok(self.permuted(&order))
    }
}

/// Wire format: `{"nodes": [...], "edges": [{"a": .., "b": .., "directed": bool}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PDagJson {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub a: String,
    pub b: String,
    pub directed: bool,
}

/// Separating sets keyed by unordered node pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepsetMap(BTreeMap<(usize, usize), Vec<usize>>);

impl SepsetMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: usize, b: usize, mut set: Vec<usize>) {
        set.sort_unstable();
        self.0.insert(pair(a, b), set);
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&[usize]> {
        self.0.get(&pair(a, b)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<usize>)> {
        self.0.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("N{i}")).collect()
    }

    #[test]
    fn edge_bookkeeping() {
        let mut g = PDag::new(names(3));
        g.add_directed(0, 1).unwrap();
        g.add_undirected(2, 1).unwrap();
        assert!(g.add_undirected(1, 0).is_err());
        assert!(g.add_directed(2, 2).is_err());
        assert_eq!(g.parents(1), vec![0]);
        assert_eq!(g.children(0), vec![1]);
        assert_eq!(g.undirected_neighbors(1), vec![2]);
        assert_eq!(g.adjacent(1), vec![0, 2]);
        g.orient(1, 2);
        assert!(g.has_directed(1, 2) && !g.has_undirected(1, 2));
        assert_eq!(g.n_edges(), 2);
    }

    #[test]
    fn cycles_are_found() {
        let mut g = PDag::new(names(4));
        g.add_directed(0, 1).unwrap();
        g.add_directed(1, 2).unwrap();
        g.add_directed(2, 0).unwrap();
        g.add_directed(2, 3).unwrap();
        assert!(!g.is_acyclic());
        assert_eq!(g.nodes_on_cycles(), vec![0, 1, 2]);
    }

    #[test]
    fn json_round_trip() {
        let mut g = PDag::new(names(3));
        g.add_directed(2, 0).unwrap();
        g.add_undirected(0, 1).unwrap();
        let text = serde_json::to_string(&g.to_json()).unwrap();
        assert!(text.contains("\"directed\":true"));
        let back = PDag::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn json_rejects_unknown_nodes() {
        let json = PDagJson {
            nodes: vec!["a".into()],
            edges: vec![EdgeJson { a: "a".into(), b: "zz".into(), directed: true }],
        };
        assert!(PDag::from_json(&json).is_err());
    }

    #[test]
    fn permutation_relabels() {
        let mut g = PDag::new(names(3));
        g.add_directed(0, 2).unwrap();
        let p = g.permuted(&[2, 0, 1]);
        assert_eq!(p.names(), &["N2", "N0", "N1"]);
        assert!(p.has_directed(1, 0));
        assert_eq!(p.aligned_to(g.names()).unwrap(), g);
    }
}
