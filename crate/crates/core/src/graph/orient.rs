use std::collections::BTreeSet;

use log::warn;

use super::{PDag, SepsetMap};
use crate::blanket::{score_partition, Partition};
use crate::error::Result;
use crate::table::CategoricalTable;

/// Orients a PC skeleton: v-structures first, then Meek's rules to closure.
///
/// Triples are visited in node-name order. When two v-structures disagree
/// about an edge the later one wins and a warning is logged.
pub fn orient_cpdag(skeleton: &PDag, sepsets: &SepsetMap) -> PDag {
    let mut g = skeleton.clone();
    let n = g.n_nodes();
    let mut by_name: Vec<usize> = (0..n).collect();
    by_name.sort_by(|&a, &b| g.name(a).cmp(g.name(b)));

    for &c in &by_name {
        let around = skeleton.adjacent(c);
        let mut around: Vec<usize> = by_name.iter().copied().filter(|v| around.contains(v)).collect();
        around.dedup();
        for (i, &a) in around.iter().enumerate() {
            for &b in &around[i + 1..] {
                if skeleton.is_adjacent(a, b) {
                    continue;
                }
                if sepsets.get(a, b).is_some_and(|s| s.contains(&c)) {
                    continue;
                }
                for from in [a, b] {
                    if g.has_directed(c, from) {
                        warn!(
                            "conflicting v-structures on {} - {}; keeping {} -> {}",
                            g.name(from),
                            g.name(c),
                            g.name(from),
                            g.name(c)
                        );
                    }
                    g.orient(from, c);
                }
            }
        }
    }
    apply_meek_rules(&mut g, &by_name);
    g
}

/// Applies Meek's rules R1-R4 until none fires.
fn apply_meek_rules(g: &mut PDag, by_name: &[usize]) {
    loop {
        let undirected: Vec<(usize, usize)> = g.undirected_edges().collect();
        let mut changed = false;
        for (u, v) in undirected {
            if !g.has_undirected(u, v) {
                continue;
            }
            for (a, b) in [(u, v), (v, u)] {
                if meek_implies(g, a, b, by_name) {
                    g.orient(a, b);
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// Whether some Meek rule forces the undirected edge `a - b` to become `a -> b`.
fn meek_implies(g: &PDag, a: usize, b: usize, by_name: &[usize]) -> bool {
    // R1: c -> a - b with c, b non-adjacent.
    if g.parents(a).iter().any(|&c| c != b && !g.is_adjacent(c, b)) {
        return true;
    }
    // R2: a -> c -> b.
    if g.children(a).iter().any(|&c| g.has_directed(c, b)) {
        return true;
    }
    let und_a = g.undirected_neighbors(a);
    // R3: a - c1 -> b, a - c2 -> b, c1 and c2 non-adjacent.
    let into_b: Vec<usize> = und_a.iter().copied().filter(|&c| c != b && g.has_directed(c, b)).collect();
    for (i, &c1) in into_b.iter().enumerate() {
        if into_b[i + 1..].iter().any(|&c2| !g.is_adjacent(c1, c2)) {
            return true;
        }
    }
    // R4: a - d -> b, c -> d, a adjacent to c, c and b non-adjacent.
    for &d in &und_a {
        if d == b || !g.has_directed(d, b) {
            continue;
        }
        for &c in by_name {
            if c != a && c != b && g.has_directed(c, d) && g.is_adjacent(a, c) && !g.is_adjacent(c, b) {
                return true;
            }
        }
    }
    false
}

/// Result of [`climb_orient`].
#[derive(Debug, Clone)]
pub struct Orientation {
    /// Fully directed graph over the input's nodes.
    pub graph: PDag,
    /// Nodes on directed cycles left by pairwise resolution, ascending.
    pub cycle_nodes: Vec<usize>,
}

/// Directs every undirected edge by comparing local stochastic complexities.
///
/// Each undirected `a - b` starts as a pair of mutual parents. Edges are then
/// resolved one at a time in name order: the two options are scored as
/// `score_partition(a) + score_partition(b)` under the current working graph
/// and the cheaper kept, ties going to the name-smaller endpoint as parent.
/// Directed cycles over three or more nodes are reported, not repaired.
pub fn climb_orient(pdag: &PDag, table: &CategoricalTable) -> Result<Orientation> {
    let n = pdag.n_nodes();
    let column: Vec<usize> = pdag.names().iter().map(|name| table.require(name)).collect::<Result<_>>()?;
    let mut parents: Vec<BTreeSet<usize>> = (0..n).map(|v| pdag.parents(v).into_iter().collect()).collect();
    let mut children: Vec<BTreeSet<usize>> = (0..n).map(|v| pdag.children(v).into_iter().collect()).collect();

    let mut pending: Vec<(usize, usize)> = pdag
        .undirected_edges()
        .map(|(a, b)| if pdag.name(a) <= pdag.name(b) { (a, b) } else { (b, a) })
        .collect();
    pending.sort_by(|x, y| (pdag.name(x.0), pdag.name(x.1)).cmp(&(pdag.name(y.0), pdag.name(y.1))));
    for &(a, b) in &pending {
        parents[a].insert(b);
        parents[b].insert(a);
    }

    let cost = |v: usize, pa: &BTreeSet<usize>, ch: &BTreeSet<usize>| {
        let partition = Partition {
            parents: pa.iter().map(|&p| column[p]).collect(),
            children: ch.iter().map(|&c| column[c]).collect(),
        };
        score_partition(column[v], &partition, table)
    };

    let mut graph = PDag::new(pdag.names().to_vec());
    for (a, b) in pdag.directed_edges() {
        graph.add_directed(a, b)?;
    }
    for (a, b) in pending {
        // Option 1: a -> b.
        let mut pa_a = parents[a].clone();
        pa_a.remove(&b);
        let mut ch_a = children[a].clone();
        ch_a.insert(b);
        let forward = cost(a, &pa_a, &ch_a) + cost(b, &parents[b], &children[b]);
        // Option 2: b -> a.
        let mut pa_b = parents[b].clone();
        pa_b.remove(&a);
        let mut ch_b = children[b].clone();
        ch_b.insert(a);
        let backward = cost(a, &parents[a], &children[a]) + cost(b, &pa_b, &ch_b);

        let (from, to) = if backward < forward { (b, a) } else { (a, b) };
        parents[from].remove(&to);
        children[from].insert(to);
        graph.add_directed(from, to)?;
    }

    let cycle_nodes = graph.nodes_on_cycles();
    if !cycle_nodes.is_empty() {
        let names: Vec<&str> = cycle_nodes.iter().map(|&v| graph.name(v)).collect();
        warn!("oriented graph has directed cycles through {}", names.join(", "));
    }
    Ok(Orientation { graph, cycle_nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(names: &[&str], undirected: &[(usize, usize)]) -> PDag {
        let mut g = PDag::new(names.iter().map(|s| s.to_string()).collect());
        for &(a, b) in undirected {
            g.add_undirected(a, b).unwrap();
        }
        g
    }

    #[test]
    fn collider_is_oriented() {
        let skel = graph(&["A", "B", "C"], &[(0, 2), (1, 2)]);
        let mut sep = SepsetMap::new();
        sep.insert(0, 1, vec![]);
        let g = orient_cpdag(&skel, &sep);
        assert!(g.has_directed(0, 2) && g.has_directed(1, 2));
    }

    #[test]
    fn chain_stays_undirected() {
        let skel = graph(&["A", "B", "C"], &[(0, 1), (1, 2)]);
        let mut sep = SepsetMap::new();
        sep.insert(0, 2, vec![1]);
        let g = orient_cpdag(&skel, &sep);
        assert_eq!(g, skel);
    }

    #[test]
    fn empty_graph_unchanged() {
        let skel = graph(&["A", "B"], &[]);
        assert_eq!(orient_cpdag(&skel, &SepsetMap::new()), skel);
    }

    #[test]
    fn rule_one_propagates() {
        // A -> C <- B, C - D: D is not adjacent to A, so C -> D.
        let skel = graph(&["A", "B", "C", "D"], &[(0, 2), (1, 2), (2, 3)]);
        let mut sep = SepsetMap::new();
        sep.insert(0, 1, vec![]);
        sep.insert(0, 3, vec![2]);
        sep.insert(1, 3, vec![2]);
        let g = orient_cpdag(&skel, &sep);
        assert!(g.has_directed(2, 3));
        assert_eq!(g.n_undirected(), 0);
    }

    #[test]
    fn rule_two_avoids_cycles() {
        // A -> B -> C with A - C must become A -> C.
        let mut g = graph(&["A", "B", "C"], &[(0, 2)]);
        g.add_directed(0, 1).unwrap();
        g.add_directed(1, 2).unwrap();
        apply_meek_rules(&mut g, &[0, 1, 2]);
        assert!(g.has_directed(0, 2));
    }

    #[test]
    fn rule_three() {
        // A - C1 -> B, A - C2 -> B, A - B, C1 and C2 non-adjacent.
        let mut g = graph(&["A", "B", "C1", "C2"], &[(0, 1), (0, 2), (0, 3)]);
        g.add_directed(2, 1).unwrap();
        g.add_directed(3, 1).unwrap();
        apply_meek_rules(&mut g, &[0, 1, 2, 3]);
        assert!(g.has_directed(0, 1));
    }

    #[test]
    fn orientation_never_changes_adjacency() {
        let skel = graph(&["A", "B", "C", "D"], &[(0, 1), (1, 2), (2, 3), (0, 3), (1, 3)]);
        let mut sep = SepsetMap::new();
        sep.insert(0, 2, vec![]);
        let g = orient_cpdag(&skel, &sep);
        assert_eq!(g.skeleton(), skel);
    }
}
