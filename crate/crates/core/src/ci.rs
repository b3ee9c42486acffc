//! Conditional independence tests on categorical data.
//!
//! [`Sci`] decides independence from stochastic complexity alone and has no
//! threshold to tune. [`G2`] and [`Cmi`] are the usual baselines.

use std::cmp::Ordering;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::nml::delta;
use crate::table::{CategoricalTable, Grouping};

/// "Is `x` independent of `y` given `z`?" over one table.
#[derive(Debug, Clone, Copy)]
pub struct CiQuery<'a> {
    pub table: &'a CategoricalTable,
    pub x: usize,
    pub y: usize,
    pub z: &'a [usize],
}

impl<'a> CiQuery<'a> {
    pub fn new(table: &'a CategoricalTable, x: usize, y: usize, z: &'a [usize]) -> Result<Self> {
        let q = Self { table, x, y, z };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.table.n_cols();
        if self.x >= m || self.y >= m || self.z.iter().any(|&v| v >= m) {
            return Err(Error::InvalidQuery(format!("variable index out of range for {m} columns")));
        }
        if self.x == self.y {
            return Err(Error::InvalidQuery("x and y must differ".into()));
        }
        if self.z.contains(&self.x) || self.z.contains(&self.y) {
            return Err(Error::InvalidQuery("x and y must not be in the conditioning set".into()));
        }
        Ok(())
    }

    fn swapped(&self) -> Self {
        Self { x: self.y, y: self.x, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CiVerdict {
    /// Test-specific: bits for SCI, bits per sample for CMI, the G² statistic for G².
    pub statistic: f64,
    pub independent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

impl CiVerdict {
    /// Orders verdicts by strength of dependence (greater = more dependent).
    ///
    /// With a p-value, smaller p means stronger dependence; the statistic
    /// breaks ties once p-values underflow.
    pub fn dependence_cmp(&self, other: &CiVerdict) -> Ordering {
        match (self.p_value, other.p_value) {
            (Some(a), Some(b)) => {
                b.total_cmp(&a).then(self.statistic.total_cmp(&other.statistic))
            }
            _ => self.statistic.total_cmp(&other.statistic),
        }
    }
}

/// Common interface of the independence tests.
pub trait CiTest: Send + Sync {
    fn name(&self) -> &str;

    fn test(&self, q: &CiQuery<'_>) -> CiVerdict;
}

/// Joint counts of `(x, y)` within each stratum of a grouping.
struct Contingency {
    kx: usize,
    ky: usize,
    sizes: Vec<usize>,
    cells: Vec<usize>,
    row_tot: Vec<usize>,
    col_tot: Vec<usize>,
}

impl Contingency {
    fn build(q: &CiQuery<'_>, gz: &Grouping) -> Self {
        let t = q.table;
        let (kx, ky) = (t.card(q.x), t.card(q.y));
        let strata = gz.n_groups();
        let mut cells = vec![0usize; strata * kx * ky];
        let mut row_tot = vec![0usize; strata * kx];
        let mut col_tot = vec![0usize; strata * ky];
        for ((&g, &x), &y) in gz.ids().iter().zip(t.column(q.x)).zip(t.column(q.y)) {
            let (g, x, y) = (g as usize, x as usize, y as usize);
            cells[(g * kx + x) * ky + y] += 1;
            row_tot[g * kx + x] += 1;
            col_tot[g * ky + y] += 1;
        }
        Self { kx, ky, sizes: gz.sizes(), cells, row_tot, col_tot }
    }

    /// `sum c * log(c * n_s / (r * col))` over nonzero cells, with `log` in the given base.
    ///
    /// Cells whose observed count equals the independence expectation
    /// contribute an exact zero, so factorized strata sum to exactly 0.
    fn log_ratio_sum(&self, log: fn(f64) -> f64) -> f64 {
        let (kx, ky) = (self.kx, self.ky);
        let mut total = 0.0;
        for (g, &ns) in self.sizes.iter().enumerate() {
            for x in 0..kx {
                let r = self.row_tot[g * kx + x];
                if r == 0 {
                    continue;
                }
                for y in 0..ky {
                    let c = self.cells[(g * kx + x) * ky + y];
                    if c == 0 {
                        continue;
                    }
                    let observed = c as u128 * ns as u128;
                    let expected = r as u128 * self.col_tot[g * ky + y] as u128;
                    if observed != expected {
                        total += c as f64 * (log(observed as f64) - log(expected as f64));
                    }
                }
            }
        }
        total.max(0.0)
    }
}

/// Summed in a fixed orientation so that swapping x and y is bit-exact.
fn information_bits(q: &CiQuery<'_>, gz: &Grouping) -> f64 {
    let q = if q.x > q.y { q.swapped() } else { *q };
    Contingency::build(&q, gz).log_ratio_sum(f64::log2)
}

/// Plug-in conditional mutual information `I(X;Y|Z) = H(X|Z) - H(X|Z,Y)` in bits per sample.
pub fn empirical_cmi(q: &CiQuery<'_>) -> f64 {
    let n = q.table.n_rows();
    if n == 0 {
        return 0.0;
    }
    information_bits(q, &q.table.grouping(q.z)) / n as f64
}

fn directional(q: &CiQuery<'_>, gz: &Grouping, info_bits: f64) -> f64 {
    let t = q.table;
    let gzy = gz.refine(t.column(q.y), t.card(q.y));
    let k = t.card(q.x);
    info_bits + delta(k, gz) - delta(k, &gzy)
}

/// `SC(X|Z) - SC(X|Z,Y) = n I(X;Y|Z) + Δ(X|Z) - Δ(X|Z,Y)`: bits saved on `x`
/// by also conditioning on `y`.
pub fn i_sc(q: &CiQuery<'_>) -> f64 {
    let gz = q.table.grouping(q.z);
    directional(q, &gz, information_bits(q, &gz))
}

/// The symmetric score `max(i_sc(x;y|z), i_sc(y;x|z))`.
pub fn sci_statistic(q: &CiQuery<'_>) -> f64 {
    let gz = q.table.grouping(q.z);
    let info = information_bits(q, &gz);
    directional(q, &gz, info).max(directional(&q.swapped(), &gz, info))
}

/// Stochastic-complexity based independence: independent iff the score is `<= 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sci;

impl CiTest for Sci {
    fn name(&self) -> &str {
        "sci"
    }

    fn test(&self, q: &CiQuery<'_>) -> CiVerdict {
        let statistic = sci_statistic(q);
        CiVerdict { statistic, independent: statistic <= 0.0, p_value: None }
    }
}

/// Likelihood-ratio G² test with a chi-square reference distribution.
#[derive(Debug, Clone, Copy)]
pub struct G2 {
    pub alpha: f64,
    /// Skip testing (and report independence) when `n < min_samples_per_dof * dof`.
    pub min_samples_per_dof: f64,
}

impl G2 {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, min_samples_per_dof: 10.0 }
    }
}

impl Default for G2 {
    fn default() -> Self {
        Self::new(0.01)
    }
}

fn g2_dof(q: &CiQuery<'_>) -> f64 {
    let t = q.table;
    (t.card(q.x).saturating_sub(1) * t.card(q.y).saturating_sub(1)) as f64
        * q.z.iter().map(|&v| t.card(v) as f64).product::<f64>()
}

/// G² statistic `2 sum O ln(O/E)` over strata, and nominal degrees of freedom
/// `(k_x - 1)(k_y - 1) prod k_z`.
pub fn g2_statistic(q: &CiQuery<'_>) -> (f64, f64) {
    let stat = Contingency::build(q, &q.table.grouping(q.z)).log_ratio_sum(f64::ln);
    (2.0 * stat, g2_dof(q))
}

impl CiTest for G2 {
    fn name(&self) -> &str {
        "g2"
    }

    fn test(&self, q: &CiQuery<'_>) -> CiVerdict {
        let n = q.table.n_rows() as f64;
        let dof = g2_dof(q);
        if dof == 0.0 || n < self.min_samples_per_dof * dof {
            return CiVerdict { statistic: 0.0, independent: true, p_value: Some(1.0) };
        }
        let (statistic, dof) = g2_statistic(q);
        let p = if statistic <= 0.0 {
            1.0
        } else {
            ChiSquared::new(dof).map(|d| d.sf(statistic)).unwrap_or(1.0)
        };
        CiVerdict { statistic, independent: p > self.alpha, p_value: Some(p) }
    }
}

/// Thresholded plug-in conditional mutual information.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cmi {
    /// Bits per sample; independence is declared at or below it.
    pub cutoff: f64,
}

impl CiTest for Cmi {
    fn name(&self) -> &str {
        "cmi"
    }

    fn test(&self, q: &CiQuery<'_>) -> CiVerdict {
        let statistic = empirical_cmi(q);
        CiVerdict { statistic, independent: statistic <= self.cutoff, p_value: None }
    }
}

/// Test selector used by the CLI and the benchmark harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "test")]
pub enum TestKind {
    Sci,
    G2 { alpha: f64 },
    Cmi { cutoff: f64 },
}

impl TestKind {
    pub fn build(self) -> Box<dyn CiTest> {
        match self {
            TestKind::Sci => Box::new(Sci),
            TestKind::G2 { alpha } => Box::new(G2::new(alpha)),
            TestKind::Cmi { cutoff } => Box::new(Cmi { cutoff }),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TestKind::Sci => "sci",
            TestKind::G2 { .. } => "g2",
            TestKind::Cmi { .. } => "cmi",
        }
    }
}
