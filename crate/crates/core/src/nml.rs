//! Multinomial stochastic complexity.
//!
//! The normalized maximum likelihood code length of a categorical sample is
//! its maximum-likelihood code length (`n` times the plug-in entropy) plus
//! the log of the regret, the NML normalizer
//!
//! ```text
//! R(k, n) = sum over h_1 + .. + h_k = n of  n! / (h_1! .. h_k!) * prod (h_v / n)^h_v
//! ```
//!
//! which depends only on the domain size `k` and the sample count `n`.
//! It is evaluated through the linear-time series
//! `R(k, n) = sum_{j=0..n} m(j, n)` with `m(0, n) = 1` and
//! `m(j, n) = m(j-1, n) * (n-j+1)(j+k-2) / (n j)`.
//!
//! All code lengths are in bits.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::table::Grouping;

/// A positive real stored as `mantissa * 2^exponent`.
///
/// Regrets for large `k * n` overflow `f64`; the series is summed in the
/// linear domain with the binary exponent tracked separately.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    mantissa: f64,
    exponent: i64,
}

const RENORM_HI: f64 = 18446744073709551616.0; // 2^64
const RENORM_LO: f64 = 1.0 / RENORM_HI;

impl Scaled {
    fn one() -> Self {
        Self { mantissa: 1.0, exponent: 0 }
    }

    fn normalize(mut self) -> Self {
        let m = self.mantissa;
        if m != 0.0 && !(RENORM_LO..=RENORM_HI).contains(&m) {
            let e = ((m.to_bits() >> 52) & 0x7ff) as i64 - 1023;
            self.mantissa = m * pow2(-e);
            self.exponent += e;
        }
        self
    }

    fn scale(self, factor: f64) -> Self {
        Self { mantissa: self.mantissa * factor, exponent: self.exponent }.normalize()
    }

    fn add(self, other: Self) -> Self {
        let (hi, lo) = if self.exponent >= other.exponent { (self, other) } else { (other, self) };
        let shift = lo.exponent - hi.exponent;
        if shift < -1100 || lo.mantissa == 0.0 {
            return hi;
        }
        Self { mantissa: hi.mantissa + lo.mantissa * pow2(shift), exponent: hi.exponent }.normalize()
    }

    fn log2(self) -> f64 {
        self.mantissa.log2() + self.exponent as f64
    }

    fn less_than(self, other: Self) -> bool {
        if self.mantissa == 0.0 {
            return other.mantissa > 0.0;
        }
        self.log2() < other.log2()
    }
}

fn pow2(e: i64) -> f64 {
    // Exact for the |e| <= 1100 range used here; split to stay clear of subnormals.
    let half = e / 2;
    2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
}

/// Computes `log2 R(k, n)` directly from the series, without memoization.
pub fn log_regret_uncached(k: usize, n: usize) -> f64 {
    if n == 0 || k <= 1 {
        return 0.0;
    }
    let (nf, kf) = (n as f64, k as f64);
    let ratio = |j: usize| {
        let jf = j as f64;
        (nf - jf + 1.0) * (jf + kf - 2.0) / (nf * jf)
    };
    let mut sum = Scaled::one();
    let mut term = Scaled::one();
    for j in 1..=n {
        term = term.scale(ratio(j));
        sum = sum.add(term);
        if j < n {
            // Term ratios decrease in j, so once they drop below one the
            // remaining tail is bounded by a geometric series.
            let next = ratio(j + 1);
            if next < 1.0 && term.scale(next / (1.0 - next)).less_than(sum.scale(TAIL_EPS)) {
                break;
            }
        }
    }
    sum.log2()
}

const TAIL_EPS: f64 = 1.0 / 72057594037927936.0; // 2^-56

/// Memoized `log2` regrets, one growable prefix vector per cardinality.
///
/// Asking for `(k, n)` fills every `(k, n')` with `n' <= n`. Readers get
/// shared snapshots; filling takes a write lock, so concurrent requests for
/// the same entry see the same value.
#[derive(Debug, Default)]
pub struct RegretTable {
    per_card: RwLock<HashMap<usize, Arc<Vec<f64>>>>,
}

impl RegretTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The process-wide table shared by all scoring functions.
    pub fn global() -> &'static RegretTable {
        static GLOBAL: OnceLock<RegretTable> = OnceLock::new();
        GLOBAL.get_or_init(RegretTable::new)
    }

    pub fn log_regret(&self, k: usize, n: usize) -> f64 {
        if k <= 1 || n == 0 {
            return 0.0;
        }
        self.prefix(k, n)[n]
    }

    /// A snapshot holding `log2 R(k, n')` for at least every `n' <= n`.
    pub fn prefix(&self, k: usize, n: usize) -> Arc<Vec<f64>> {
        if let Some(v) = self.per_card.read().expect("regret table poisoned").get(&k) {
            if v.len() > n {
                return Arc::clone(v);
            }
        }
        let mut map = self.per_card.write().expect("regret table poisoned");
        let entry = map.entry(k).or_insert_with(|| Arc::new(vec![0.0]));
        if entry.len() <= n {
            let mut grown = Vec::with_capacity(n + 1);
            grown.extend_from_slice(entry);
            for m in grown.len()..=n {
                grown.push(log_regret_uncached(k, m));
            }
            *entry = Arc::new(grown);
        }
        Arc::clone(entry)
    }

    /// Number of memoized entries for cardinality `k` (including `n = 0`).
    pub fn filled(&self, k: usize) -> usize {
        self.per_card.read().expect("regret table poisoned").get(&k).map_or(0, |v| v.len())
    }
}

/// `log2 R(k, n)` from the shared table.
pub fn log_regret(k: usize, n: usize) -> f64 {
    RegretTable::global().log_regret(k, n)
}

/// The two parts of a (conditional) NML code length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeLength {
    /// `sum_v h_v * H(x | group v)`, the maximum-likelihood part.
    pub data_bits: f64,
    /// `sum_v log2 R(k, h_v)`, the regret part.
    pub regret_bits: f64,
}

impl CodeLength {
    pub fn total(&self) -> f64 {
        self.data_bits + self.regret_bits
    }
}

#[inline]
fn xlog2x(c: usize) -> f64 {
    if c <= 1 {
        0.0
    } else {
        let c = c as f64;
        c * c.log2()
    }
}

/// Plug-in entropy of `column` within each group, weighted by group size, in bits.
pub fn grouped_entropy_bits(column: &[u32], k: usize, grouping: &Grouping) -> f64 {
    assert_eq!(column.len(), grouping.n_rows(), "column length does not match grouping");
    let groups = grouping.n_groups();
    if groups == 0 || k <= 1 {
        return 0.0;
    }
    let sizes = grouping.sizes();
    let mut bits = 0.0;
    if groups.saturating_mul(k) <= COUNT_DENSE_LIMIT {
        let mut counts = vec![0usize; groups * k];
        for (&g, &x) in grouping.ids().iter().zip(column) {
            counts[g as usize * k + x as usize] += 1;
        }
        for (g, &h) in sizes.iter().enumerate() {
            let cell: f64 = counts[g * k..(g + 1) * k].iter().map(|&c| xlog2x(c)).sum();
            bits += xlog2x(h) - cell;
        }
    } else {
        let mut counts: HashMap<(u32, u32), usize> = HashMap::new();
        for (&g, &x) in grouping.ids().iter().zip(column) {
            *counts.entry((g, x)).or_default() += 1;
        }
        let mut cell = vec![0.0; groups];
        let mut entries: Vec<_> = counts.into_iter().collect();
        entries.sort_unstable();
        for ((g, _), c) in entries {
            cell[g as usize] += xlog2x(c);
        }
        for (g, &h) in sizes.iter().enumerate() {
            bits += xlog2x(h) - cell[g];
        }
    }
    bits
}

const COUNT_DENSE_LIMIT: usize = 1 << 24;

/// `sum_v log2 R(k, h_v)` over the groups of `grouping`; the regret-only part
/// of the conditional code length of a variable with domain size `k`.
pub fn delta(k: usize, grouping: &Grouping) -> f64 {
    if k <= 1 {
        return 0.0;
    }
    let sizes = grouping.sizes();
    let max = sizes.iter().copied().max().unwrap_or(0);
    let table = RegretTable::global().prefix(k, max);
    sizes.iter().map(|&h| table[h]).sum()
}

/// Conditional NML code length of `column` given the groups, split into its two parts.
///
/// Every group uses the column's full declared cardinality `k`.
pub fn conditional_code_length(column: &[u32], k: usize, grouping: &Grouping) -> CodeLength {
    CodeLength { data_bits: grouped_entropy_bits(column, k, grouping), regret_bits: delta(k, grouping) }
}

/// `SC(x | groups)`: the sum of the stochastic complexities of `x` restricted to each group.
pub fn conditional_sc(column: &[u32], k: usize, grouping: &Grouping) -> f64 {
    conditional_code_length(column, k, grouping).total()
}

/// `SC(x) = n * H(x) + log2 R(k, n)`.
pub fn stochastic_complexity(column: &[u32], k: usize) -> f64 {
    conditional_sc(column, k, &Grouping::single(column.len()))
}
