use rayon::prelude::*;

use super::{PDag, SepsetMap};
use crate::ci::{CiQuery, CiTest};
use crate::table::CategoricalTable;

/// Undirected skeleton with the separating sets that removed each edge.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub graph: PDag,
    pub sepsets: SepsetMap,
    pub tests_performed: usize,
}

/// Combinations of `k` items in lexicographic position order.
fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k > items.len() {
        return vec![];
    }
    let mut out = vec![];
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + items.len() - k) else {
            return out;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Order-independent ("stable") PC skeleton search.
///
/// Adjacencies are frozen at the start of each level, so the result does not
/// depend on the order in which edges are visited. Conditioning candidates
/// are enumerated in variable-name order and the first separating set found
/// is kept. Edges of one level are tested in parallel.
pub fn pc_stable_skeleton(table: &CategoricalTable, test: &dyn CiTest, max_cond: Option<usize>) -> Skeleton {
    let n = table.n_cols();
    let mut rank: Vec<usize> = (0..n).collect();
    rank.sort_by(|&a, &b| table.name(a).cmp(table.name(b)));
    let mut position = vec![0; n];
    for (r, &v) in rank.iter().enumerate() {
        position[v] = r;
    }

    let mut adj = vec![vec![true; n]; n];
    for (v, row) in adj.iter_mut().enumerate() {
        row[v] = false;
    }
    let mut sepsets = SepsetMap::new();
    let mut tests = 0usize;
    let mut level = 0usize;
    loop {
        if max_cond.is_some_and(|m| level > m) {
            break;
        }
        let neighbors: Vec<Vec<usize>> =
            (0..n).map(|v| rank.iter().copied().filter(|&w| adj[v][w]).collect()).collect();
        if neighbors.iter().all(|nb| nb.len() <= level) {
            break;
        }
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| adj[a][b])
            .collect();
        let outcomes: Vec<(usize, usize, usize, Option<Vec<usize>>)> = edges
            .par_iter()
            .map(|&(a, b)| {
                // Visit the endpoint with the smaller name first.
                let (x, y) = if position[a] < position[b] { (a, b) } else { (b, a) };
                let mut count = 0;
                for (from, other) in [(x, y), (y, x)] {
                    let pool: Vec<usize> = neighbors[from].iter().copied().filter(|&w| w != other).collect();
                    for z in combinations(&pool, level) {
                        count += 1;
                        if test.test(&CiQuery { table, x: from, y: other, z: &z }).independent {
                            return (a, b, count, Some(z));
                        }
                    }
                }
                (a, b, count, None)
            })
            .collect();
        for (a, b, count, sep) in outcomes {
            tests += count;
            if let Some(z) = sep {
                adj[a][b] = false;
                adj[b][a] = false;
                sepsets.insert(a, b, z);
            }
        }
        level += 1;
    }

    let mut graph = PDag::new(table.names().to_vec());
    for a in 0..n {
        for b in a + 1..n {
            if adj[a][b] {
                graph.add_undirected(a, b).expect("fresh pair");
            }
        }
    }
    Skeleton { graph, sepsets, tests_performed: tests }
}
