//! Causal Markov blankets.
//!
//! [`find_pc`] recovers the parents and children of a target with a
//! GetPCD/GetPC style search. [`score_partition`] scores a split of that set
//! into parents and children by the total stochastic complexity of the
//! local Markov kernels, and [`climb`] combines both with a spouse search
//! that only visits the inferred children.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::ci::{CiQuery, CiTest, CiVerdict};
use crate::error::{Error, Result};
use crate::nml::{conditional_sc, stochastic_complexity};
use crate::table::{CategoricalTable, Grouping};

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Largest conditioning set tried when looking for a separating set.
    pub max_cond: usize,
    /// Largest parents-and-children set [`find_best_partition`] will enumerate.
    pub partition_cap: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { max_cond: 3, partition_cap: 20 }
    }
}

/// Every subset of `items` with at most `max` elements, smallest first.
pub(crate) fn subsets_up_to(items: &[usize], max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<(Vec<usize>, usize)> = vec![(vec![], 0)];
    for _ in 0..max.min(items.len()) {
        let mut next = vec![];
        for (set, start) in &frontier {
            for i in *start..items.len() {
                let mut s = set.clone();
                s.push(items[i]);
                out.push(s.clone());
                next.push((s, i + 1));
            }
        }
        frontier = next;
    }
    out
}

/// Result of a parents-and-descendants (PCD) search around one node.
#[derive(Debug, Clone, Default)]
struct PcdRun {
    pcd: Vec<usize>,
    /// Separating set found for every variable excluded from `pcd`.
    sepsets: HashMap<usize, Vec<usize>>,
}

/// Independence-test driver that counts the tests it runs.
struct Search<'a> {
    table: &'a CategoricalTable,
    test: &'a dyn CiTest,
    max_cond: usize,
    tests: usize,
    /// PCD results kept for the lifetime of this search, when enabled.
    memo: Option<HashMap<usize, PcdRun>>,
}

impl<'a> Search<'a> {
    fn new(table: &'a CategoricalTable, test: &'a dyn CiTest, max_cond: usize, memoize: bool) -> Self {
        Self { table, test, max_cond, tests: 0, memo: memoize.then(HashMap::new) }
    }

    fn ci(&mut self, x: usize, y: usize, z: &[usize]) -> CiVerdict {
        self.tests += 1;
        self.test.test(&CiQuery { table: self.table, x, y, z })
    }

    /// Least-dependent verdict of `target` vs `x` over subsets of `pool`, memoized in `seen`.
    fn weakest(
        &mut self,
        target: usize,
        x: usize,
        pool: &[usize],
        seen: &mut HashMap<(usize, Vec<usize>), CiVerdict>,
    ) -> (CiVerdict, Vec<usize>) {
        let mut best: Option<(CiVerdict, Vec<usize>)> = None;
        for z in subsets_up_to(pool, self.max_cond) {
            let key = (x, z.clone());
            let verdict = match seen.get(&key) {
                Some(v) => *v,
                None => {
                    let v = self.ci(target, x, &z);
                    seen.insert(key, v);
                    v
                }
            };
            let better = best.as_ref().is_none_or(|(b, _)| verdict.dependence_cmp(b).is_lt());
            if better {
                let done = verdict.independent;
                best = Some((verdict, z));
                if done {
                    break;
                }
            }
        }
        best.expect("the empty set is always a candidate")
    }

    /// Grow-shrink search for the parents and descendants of `target`.
    fn pcd(&mut self, target: usize) -> PcdRun {
        if let Some(run) = self.memo.as_ref().and_then(|m| m.get(&target)) {
            return run.clone();
        }
        let table = self.table;
        let mut seen = HashMap::new();
        let mut sepsets: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut pcd: Vec<usize> = vec![];
        let mut candidates: Vec<usize> = (0..table.n_cols()).filter(|&v| v != target).collect();
        loop {
            // Drop candidates that some subset of the current PCD separates.
            let mut scored = vec![];
            for &x in &candidates {
                let (verdict, z) = self.weakest(target, x, &pcd, &mut seen);
                if verdict.independent {
                    sepsets.insert(x, z);
                } else {
                    scored.push((x, verdict));
                }
            }
            // Admit the most strongly associated survivor.
            let Some(&(best, _)) = scored.iter().max_by(|(a, va), (b, vb)| {
                va.dependence_cmp(vb).then_with(|| table.name(*b).cmp(table.name(*a)))
            }) else {
                break;
            };
            candidates = scored.iter().map(|&(x, _)| x).filter(|&x| x != best).collect();
            pcd.push(best);
            // Drop members separated by a subset of the other members.
            let members = pcd.clone();
            for &x in &members {
                let rest: Vec<usize> = pcd.iter().copied().filter(|&v| v != x).collect();
                let (verdict, z) = self.weakest(target, x, &rest, &mut seen);
                if verdict.independent {
                    pcd.retain(|&v| v != x);
                    sepsets.insert(x, z);
                }
            }
            if candidates.is_empty() {
                break;
            }
        }
        pcd.sort_unstable();
        let run = PcdRun { pcd, sepsets };
        if let Some(memo) = self.memo.as_mut() {
            memo.insert(target, run.clone());
        }
        run
    }

    /// PCD of `target` restricted to members whose own PCD contains `target`.
    fn pc(&mut self, target: usize) -> PcResult {
        let run = self.pcd(target);
        let mut pc = vec![];
        let mut sepsets: BTreeMap<usize, Vec<usize>> =
            run.sepsets.iter().map(|(&k, v)| (k, sorted(v))).collect();
        for &x in &run.pcd {
            let other = self.pcd(x);
            if other.pcd.contains(&target) {
                pc.push(x);
            } else {
                let s = other.sepsets.get(&target).map(|s| sorted(s)).unwrap_or_default();
                sepsets.insert(x, s);
            }
        }
        PcResult { pc, sepsets, tests_performed: self.tests }
    }
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcResult {
    pub pc: Vec<usize>,
    /// Separating set for every variable that is not in `pc`.
    pub sepsets: BTreeMap<usize, Vec<usize>>,
    pub tests_performed: usize,
}

/// Parents and children of `target`, symmetry-corrected: `x` is kept only if
/// `target` is also among the candidates found around `x`.
pub fn find_pc(target: usize, table: &CategoricalTable, test: &dyn CiTest, opts: &SearchOptions) -> PcResult {
    Search::new(table, test, opts.max_cond, true).pc(target)
}

/// A split of a parents-and-children set.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Partition {
    pub parents: Vec<usize>,
    pub children: Vec<usize>,
}

/// `SC(T | PA) + sum_P SC(P) + sum_C SC(C | T)`.
pub fn score_partition(target: usize, partition: &Partition, table: &CategoricalTable) -> f64 {
    let mut parents = partition.parents.clone();
    let mut children = partition.children.clone();
    parents.sort_by(|a, b| table.name(*a).cmp(table.name(*b)));
    children.sort_by(|a, b| table.name(*a).cmp(table.name(*b)));
    let by_target = Grouping::from_column(table.column(target), table.card(target));
    let mut score = conditional_sc(table.column(target), table.card(target), &table.grouping(&parents));
    for &p in &parents {
        score += stochastic_complexity(table.column(p), table.card(p));
    }
    for &c in &children {
        score += conditional_sc(table.column(c), table.card(c), &by_target);
    }
    score
}

/// Outcome of an exhaustive partition search.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSearch {
    pub partition: Partition,
    pub score: f64,
    /// Number of candidate partitions scored (`2^|PC|`).
    pub visited: usize,
}

/// Scores every subset of `pc` as the parent set and keeps the cheapest.
///
/// Ties go to fewer parents, then to the lexicographically smallest list of
/// parent names, so the result does not depend on column order.
pub fn search_partitions(
    target: usize,
    pc: &[usize],
    table: &CategoricalTable,
    cap: usize,
) -> Result<PartitionSearch> {
    if pc.len() > cap {
        return Err(Error::PartitionCap { node: table.name(target).to_string(), degree: pc.len(), cap });
    }
    let mut members = pc.to_vec();
    members.sort_by(|a, b| table.name(*a).cmp(table.name(*b)));
    members.dedup();
    let m = members.len();
    let tcol = table.column(target);
    let tk = table.card(target);
    let by_target = Grouping::from_column(tcol, tk);
    let as_parent: Vec<f64> = members.iter().map(|&v| stochastic_complexity(table.column(v), table.card(v))).collect();
    let as_child: Vec<f64> =
        members.iter().map(|&v| conditional_sc(table.column(v), table.card(v), &by_target)).collect();

    // Depth-first over subsets so each parent grouping refines its prefix.
    struct Best {
        score: f64,
        mask: u64,
        names: Vec<String>,
    }
    let mut best: Option<Best> = None;
    let mut visited = 0usize;
    let mut stack: Vec<(u64, usize, Grouping)> = vec![(0, 0, Grouping::single(table.n_rows()))];
    while let Some((mask, next, grouping)) = stack.pop() {
        visited += 1;
        let mut score = conditional_sc(tcol, tk, &grouping);
        for i in 0..m {
            if mask >> i & 1 == 1 {
                score += as_parent[i];
            }
        }
        for i in 0..m {
            if mask >> i & 1 == 0 {
                score += as_child[i];
            }
        }
        let count = mask.count_ones();
        let names = || (0..m).filter(|i| mask >> i & 1 == 1).map(|i| table.name(members[i]).to_string()).collect();
        let replace = match &best {
            None => true,
            Some(b) => {
                score < b.score
                    || (score == b.score
                        && (count < b.mask.count_ones()
                            || (count == b.mask.count_ones() && names() < b.names)))
            }
        };
        if replace {
            best = Some(Best { score, mask, names: names() });
        }
        for i in (next..m).rev() {
            let v = members[i];
            stack.push((mask | 1 << i, i + 1, grouping.refine(table.column(v), table.card(v))));
        }
    }
    let best = best.expect("at least the empty parent set is scored");
    let mut parents: Vec<usize> = (0..m).filter(|i| best.mask >> i & 1 == 1).map(|i| members[i]).collect();
    let mut children: Vec<usize> = (0..m).filter(|i| best.mask >> i & 1 == 0).map(|i| members[i]).collect();
    parents.sort_unstable();
    children.sort_unstable();
    Ok(PartitionSearch { partition: Partition { parents, children }, score: best.score, visited })
}

pub fn find_best_partition(target: usize, pc: &[usize], table: &CategoricalTable, cap: usize) -> Result<Partition> {
    search_partitions(target, pc, table, cap).map(|s| s.partition)
}

/// A target's Markov blanket with the roles of its members.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct BlanketResult {
    pub parents: Vec<usize>,
    pub children: Vec<usize>,
    pub spouses: Vec<usize>,
    pub tests_performed: usize,
    /// Separating sets recorded while searching around the target.
    #[serde(skip)]
    pub sepsets: BTreeMap<usize, Vec<usize>>,
}

impl BlanketResult {
    pub fn members(&self) -> BTreeSet<usize> {
        self.parents.iter().chain(&self.children).chain(&self.spouses).copied().collect()
    }
}

/// CLIMB: the causal Markov blanket of `target`.
pub fn climb(
    target: usize,
    table: &CategoricalTable,
    test: &dyn CiTest,
    opts: &SearchOptions,
) -> Result<BlanketResult> {
    let mut search = Search::new(table, test, opts.max_cond, true);
    let found = search.pc(target);
    let Partition { parents, mut children } = find_best_partition(target, &found.pc, table, opts.partition_cap)?;
    let mut spouses: Vec<usize> = vec![];
    for c in children.clone() {
        let around_child = search.pc(c);
        if !around_child.pc.contains(&target) {
            children.retain(|&v| v != c);
            continue;
        }
        for &y in &around_child.pc {
            if y == target || parents.contains(&y) || children.contains(&y) || spouses.contains(&y) {
                continue;
            }
            let mut z = found.sepsets.get(&y).cloned().unwrap_or_default();
            if !z.contains(&c) {
                z.push(c);
            }
            if !search.ci(target, y, &z).independent {
                spouses.push(y);
            }
        }
    }
    spouses.sort_unstable();
    let result = BlanketResult { parents, children, spouses, tests_performed: search.tests, sepsets: found.sepsets };
    debug_assert!(roles_are_disjoint(target, &result));
    Ok(result)
}

fn roles_are_disjoint(target: usize, r: &BlanketResult) -> bool {
    let total = r.parents.len() + r.children.len() + r.spouses.len();
    let members = r.members();
    members.len() == total && !members.contains(&target)
}

/// Markov blanket found by the reference PCMB procedure.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PcmbResult {
    pub pc: Vec<usize>,
    pub spouses: Vec<usize>,
    pub tests_performed: usize,
}

impl PcmbResult {
    pub fn members(&self) -> BTreeSet<usize> {
        self.pc.iter().chain(&self.spouses).copied().collect()
    }
}

/// Reference PCMB: the spouse search visits every parent-or-child, and
/// parents-and-children sets are recomputed on every request as in the
/// published procedure.
pub fn pcmb(target: usize, table: &CategoricalTable, test: &dyn CiTest, opts: &SearchOptions) -> PcmbResult {
    let mut search = Search::new(table, test, opts.max_cond, false);
    let found = search.pc(target);
    let mut spouses: Vec<usize> = vec![];
    for &y in &found.pc {
        let around = search.pc(y);
        for &x in &around.pc {
            if x == target || found.pc.contains(&x) || spouses.contains(&x) {
                continue;
            }
            let mut z = found.sepsets.get(&x).cloned().unwrap_or_default();
            if !z.contains(&y) {
                z.push(y);
            }
            if !search.ci(target, x, &z).independent {
                spouses.push(x);
            }
        }
    }
    spouses.sort_unstable();
    PcmbResult { pc: found.pc, spouses, tests_performed: search.tests }
}
