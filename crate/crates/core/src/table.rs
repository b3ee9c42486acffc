//! Category-coded sample tables and row groupings.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// `n` samples over `m` discrete variables.
///
/// Each column stores codes in `0..k` where `k` is the column's declared
/// cardinality. The cardinality is part of the data, not inferred from the
/// observed codes, so a domain value that never occurs still counts towards
/// the model class used for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalTable {
    names: Vec<String>,
    labels: Vec<Vec<String>>,
    columns: Vec<Vec<u32>>,
    rows: usize,
}

impl CategoricalTable {
    /// Builds a table from named columns and their domain labels.
    ///
    /// The cardinality of column `i` is `labels[i].len()`.
    pub fn new(names: Vec<String>, labels: Vec<Vec<String>>, columns: Vec<Vec<u32>>) -> Result<Self> {
        if names.len() != columns.len() || labels.len() != columns.len() {
            return Err(Error::Shape(format!(
                "{} names, {} domains and {} columns",
                names.len(),
                labels.len(),
                columns.len()
            )));
        }
        let rows = columns.first().map_or(0, Vec::len);
        for (i, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::Shape(format!(
                    "column `{}` has {} rows, expected {rows}",
                    names[i],
                    col.len()
                )));
            }
            let k = labels[i].len();
            if k == 0 {
                return Err(Error::Shape(format!("column `{}` has an empty domain", names[i])));
            }
            if let Some(&bad) = col.iter().find(|&&c| c as usize >= k) {
                return Err(Error::Shape(format!(
                    "column `{}` holds code {bad} outside its domain of size {k}",
                    names[i]
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Shape(format!("duplicate column name `{name}`")));
            }
        }
        Ok(Self { names, labels, columns, rows })
    }

    /// Builds a table with synthetic names `V0, V1, ...` and labels `0..k`.
    pub fn from_codes(columns: Vec<Vec<u32>>, cards: &[usize]) -> Result<Self> {
        let names = (0..columns.len()).map(|i| format!("V{i}")).collect();
        let labels = cards.iter().map(|&k| (0..k).map(|v| v.to_string()).collect()).collect();
        Self::new(names, labels, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &[u32] {
        &self.columns[i]
    }

    pub fn card(&self, i: usize) -> usize {
        self.labels[i].len()
    }

    pub fn cards(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self, i: usize) -> &[String] {
        &self.labels[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Looks up a column index by name, failing with a descriptive error.
    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Returns a table with columns reordered as `order`.
    pub fn select(&self, order: &[usize]) -> Self {
        Self {
            names: order.iter().map(|&i| self.names[i].clone()).collect(),
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            columns: order.iter().map(|&i| self.columns[i].clone()).collect(),
            rows: self.rows,
        }
    }

    /// Row grouping by the joint value of `cols` (realized combinations only).
    pub fn grouping(&self, cols: &[usize]) -> Grouping {
        cols.iter().fold(Grouping::single(self.rows), |g, &c| g.refine(&self.columns[c], self.card(c)))
    }
}

/// A partition of the rows `0..n` into dense, nonempty groups.
///
/// Group ids are assigned in order of first appearance, so the ids depend
/// only on the partition itself and not on how it was built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    ids: Vec<u32>,
    groups: usize,
}

impl Grouping {
    /// Every row in one group (the empty conditioning set).
    pub fn single(rows: usize) -> Self {
        Self { ids: vec![0; rows], groups: usize::from(rows > 0) }
    }

    /// Groups rows by the codes of a single column with domain size `k`.
    pub fn from_column(column: &[u32], k: usize) -> Self {
        Self::single(column.len()).refine(column, k)
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn n_groups(&self) -> usize {
        self.groups
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    /// Splits each group by the value of `column`.
    pub fn refine(&self, column: &[u32], k: usize) -> Grouping {
        assert_eq!(column.len(), self.ids.len(), "column length does not match grouping");
        let mut ids = Vec::with_capacity(self.ids.len());
        let mut next = 0u32;
        let slots = self.groups.saturating_mul(k.max(1));
        if slots <= DENSE_LIMIT {
            let mut map = vec![u32::MAX; slots];
            for (&g, &c) in self.ids.iter().zip(column) {
                let slot = &mut map[g as usize * k + c as usize];
                if *slot == u32::MAX {
                    *slot = next;
                    next += 1;
                }
                ids.push(*slot);
            }
        } else {
            let mut map: HashMap<(u32, u32), u32> = HashMap::new();
            for (&g, &c) in self.ids.iter().zip(column) {
                let id = *map.entry((g, c)).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
                ids.push(id);
            }
        }
        Grouping { ids, groups: next as usize }
    }

    /// Number of rows in each group.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.groups];
        for &g in &self.ids {
            sizes[g as usize] += 1;
        }
        sizes
    }

    /// Whether `self` refines `coarser`: every group of `self` lies inside one group of `coarser`.
    pub fn refines(&self, coarser: &Grouping) -> bool {
        if self.ids.len() != coarser.ids.len() {
            return false;
        }
        let mut parent = vec![u32::MAX; self.groups];
        for (&fine, &coarse) in self.ids.iter().zip(&coarser.ids) {
            let p = &mut parent[fine as usize];
            if *p == u32::MAX {
                *p = coarse;
            } else if *p != coarse {
                return false;
            }
        }
        true
    }
}

const DENSE_LIMIT: usize = 1 << 22;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_domain_codes() {
        let err = CategoricalTable::from_codes(vec![vec![0, 2]], &[2]).unwrap_err();
        assert!(err.to_string().contains("outside its domain"));
    }

    #[test]
    fn rejects_ragged_columns() {
        assert!(CategoricalTable::from_codes(vec![vec![0, 1], vec![0]], &[2, 2]).is_err());
    }

    #[test]
    fn declared_cardinality_survives_unobserved_values() {
        let t = CategoricalTable::from_codes(vec![vec![0, 0, 1]], &[5]).unwrap();
        assert_eq!(t.card(0), 5);
    }

    #[test]
    fn grouping_ids_follow_first_appearance() {
        let t = CategoricalTable::from_codes(vec![vec![1, 0, 1, 0], vec![0, 0, 1, 1]], &[2, 2]).unwrap();
        let a = t.grouping(&[0, 1]);
        let b = t.grouping(&[1, 0]);
        assert_eq!(a, b);
        assert_eq!(a.ids(), &[0, 1, 2, 3]);
        assert_eq!(t.grouping(&[0]).sizes(), vec![2, 2]);
        assert_eq!(t.grouping(&[]).sizes(), vec![4]);
    }

    #[test]
    fn sparse_refinement_matches_dense() {
        let col: Vec<u32> = (0..1000).map(|i| (i * 7919 % 1000) as u32).collect();
        let dense = Grouping::from_column(&col, 1000);
        let wide = Grouping::single(1000).refine(&col, 1000).refine(&col, 1000);
        assert_eq!(dense.n_groups(), 1000);
        let huge = Grouping { ids: dense.ids.clone(), groups: 1000 }.refine(&col, DENSE_LIMIT);
        assert_eq!(huge.ids(), dense.ids());
        assert_eq!(wide, dense);
    }

    #[test]
    fn refinement_relation() {
        let t = CategoricalTable::from_codes(vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1]], &[2, 2]).unwrap();
        let coarse = t.grouping(&[0]);
        let fine = t.grouping(&[0, 1]);
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
    }
}
