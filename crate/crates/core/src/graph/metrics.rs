use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::PDag;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    /// From a true-positive count and the predicted and true set sizes.
    ///
    /// An empty denominator counts as perfect only when both sets are empty.
    pub fn from_counts(tp: usize, predicted: usize, truth: usize) -> Self {
        let both_empty = predicted == 0 && truth == 0;
        let ratio = |den: usize| {
            if den > 0 {
                tp as f64 / den as f64
            } else if both_empty {
                1.0
            } else {
                0.0
            }
        };
        let precision = ratio(predicted);
        let recall = ratio(truth);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Self { precision, recall, f1 }
    }

    /// Component-wise mean; zero for an empty slice.
    pub fn mean(items: &[Metrics]) -> Metrics {
        if items.is_empty() {
            return Metrics::default();
        }
        let k = items.len() as f64;
        Metrics {
            precision: items.iter().map(|m| m.precision).sum::<f64>() / k,
            recall: items.iter().map(|m| m.recall).sum::<f64>() / k,
            f1: items.iter().map(|m| m.f1).sum::<f64>() / k,
        }
    }
}

/// Precision and recall over directed edges. Only an edge with the right
/// orientation is a true positive; predicted undirected edges are ignored.
pub fn directed_edge_metrics(predicted: &PDag, truth: &PDag) -> Result<Metrics> {
    let predicted = predicted.aligned_to(truth.names())?;
    let tp = predicted.directed_edges().filter(|&(a, b)| truth.has_directed(a, b)).count();
    let n_pred = predicted.directed_edges().count();
    Ok(Metrics::from_counts(tp, n_pred, truth.n_edges()))
}

/// Role of a Markov blanket member relative to its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Role {
    Parent,
    Child,
    Spouse,
    /// Adjacent through an undirected edge; never matches a true role.
    Undirected,
}

/// Blanket members keyed by node index.
pub type Roles = BTreeMap<usize, Role>;

/// Per-target set metrics, averaged over targets.
///
/// With `directed`, a member counts only when its predicted role equals its
/// true role.
pub fn mb_set_metrics(predicted: &[Roles], truth: &[Roles], directed: bool) -> Metrics {
    assert_eq!(predicted.len(), truth.len(), "one predicted blanket per true blanket");
    let per_target: Vec<Metrics> = predicted
        .iter()
        .zip(truth)
        .map(|(p, t)| {
            let tp = p
                .iter()
                .filter(|(v, role)| match t.get(v) {
                    Some(true_role) => !directed || (**role != Role::Undirected && *role == true_role),
                    None => false,
                })
                .count();
            Metrics::from_counts(tp, p.len(), t.len())
        })
        .collect();
    Metrics::mean(&per_target)
}

/// Parents, children and spouses of `target` in a DAG.
pub fn blanket_roles(dag: &PDag, target: usize) -> Roles {
    let mut roles = Roles::new();
    let children = dag.children(target);
    for &c in &children {
        for p in dag.parents(c) {
            if p != target {
                roles.insert(p, Role::Spouse);
            }
        }
    }
    for p in dag.parents(target) {
        roles.insert(p, Role::Parent);
    }
    for c in children {
        roles.insert(c, Role::Child);
    }
    roles
}

/// Blanket of `target` read off a partially directed graph.
///
/// Undirected neighbours get [`Role::Undirected`]; spouses are the other
/// parents of directed children.
pub fn cpdag_blanket_roles(pdag: &PDag, target: usize) -> Roles {
    let mut roles = blanket_roles(pdag, target);
    for v in pdag.undirected_neighbors(target) {
        roles.insert(v, Role::Undirected);
    }
    roles
}

/// Sorted members of a role map.
pub fn members(roles: &Roles) -> BTreeSet<usize> {
    roles.keys().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dag(names: &[&str], edges: &[(usize, usize)]) -> PDag {
        let mut g = PDag::new(names.iter().map(|s| s.to_string()).collect());
        for &(a, b) in edges {
            g.add_directed(a, b).unwrap();
        }
        g
    }

    #[test]
    fn edge_metrics() {
        let truth = dag(&["A", "B", "C"], &[(0, 1), (1, 2)]);
        let m = directed_edge_metrics(&truth, &truth).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        let pred = dag(&["A", "B", "C"], &[(0, 1), (2, 1)]);
        let m = directed_edge_metrics(&pred, &truth).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.5, 0.5, 0.5));
        let empty = dag(&["A", "B", "C"], &[]);
        let m = directed_edge_metrics(&empty, &truth).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn edge_metrics_follow_names() {
        let truth = dag(&["A", "B"], &[(0, 1)]);
        let pred = dag(&["B", "A"], &[(1, 0)]);
        assert_eq!(directed_edge_metrics(&pred, &truth).unwrap().f1, 1.0);
        let other = dag(&["A", "Q"], &[]);
        assert!(directed_edge_metrics(&other, &truth).is_err());
    }

    #[test]
    fn undirected_edges_never_count() {
        let truth = dag(&["A", "B"], &[(0, 1)]);
        let mut pred = PDag::new(truth.names().to_vec());
        pred.add_undirected(0, 1).unwrap();
        assert_eq!(directed_edge_metrics(&pred, &truth).unwrap().f1, 0.0);
    }

    fn roles(items: &[(usize, Role)]) -> Roles {
        items.iter().copied().collect()
    }

    #[test]
    fn set_metrics() {
        let truth = roles(&[(1, Role::Parent), (2, Role::Child), (3, Role::Spouse), (4, Role::Child)]);
        let m = mb_set_metrics(std::slice::from_ref(&truth), std::slice::from_ref(&truth), true);
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));

        let mut superset = truth.clone();
        superset.insert(9, Role::Parent);
        let m = mb_set_metrics(&[superset], std::slice::from_ref(&truth), false);
        assert!((m.precision - 0.8).abs() < 1e-12);
        assert_eq!(m.recall, 1.0);

        let disjoint = roles(&[(7, Role::Parent)]);
        let m = mb_set_metrics(&[disjoint], &[truth], false);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn directed_variant_checks_roles() {
        let truth = roles(&[(1, Role::Parent), (2, Role::Child)]);
        let swapped = roles(&[(1, Role::Child), (2, Role::Undirected)]);
        assert_eq!(mb_set_metrics(std::slice::from_ref(&swapped), std::slice::from_ref(&truth), true).f1, 0.0);
        assert_eq!(mb_set_metrics(&[swapped], &[truth], false).f1, 1.0);
    }

    #[test]
    fn empty_blankets_match() {
        let m = mb_set_metrics(&[Roles::new()], &[Roles::new()], true);
        assert_eq!(m.f1, 1.0);
    }

    #[test]
    fn roles_from_dag() {
        // P -> T -> C <- S
        let g = dag(&["P", "T", "C", "S"], &[(0, 1), (1, 2), (3, 2)]);
        let r = blanket_roles(&g, 1);
        assert_eq!(r, roles(&[(0, Role::Parent), (2, Role::Child), (3, Role::Spouse)]));
        assert_eq!(blanket_roles(&g, 3), roles(&[(1, Role::Spouse), (2, Role::Child)]));
    }

    #[test]
    fn roles_from_cpdag() {
        let mut g = dag(&["A", "T", "C", "S"], &[(1, 2), (3, 2)]);
        g.add_undirected(0, 1).unwrap();
        assert_eq!(
            cpdag_blanket_roles(&g, 1),
            roles(&[(0, Role::Undirected), (2, Role::Child), (3, Role::Spouse)])
        );
    }
}
