use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BayesNet;
use crate::error::{Error, Result};
use crate::table::CategoricalTable;

/// How much data to draw, and how noisily.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub n: usize,
    /// Probability that a drawn value is replaced by a uniform one.
    pub noise: f64,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(n: usize, noise: f64, seed: u64) -> Result<Self> {
        let spec = Self { n, noise, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::Shape(format!("noise must be in [0, 1], got {}", self.noise)));
        }
        Ok(())
    }
}

/// Draws an index from a probability row by inversion.
pub(crate) fn draw(row: &[f64], rng: &mut impl Rng) -> u32 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (s, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = s;
            if u < acc {
                return s as u32;
            }
        }
    }
    last as u32
}

/// Ancestral sampling with uniform replacement noise.
///
/// Each node is drawn from its table given its (already noisy) parents; then,
/// with probability `noise`, replaced by a uniform draw over its states.
/// Output is a deterministic function of the network and the spec.
pub fn forward_sample(net: &BayesNet, spec: &SampleSpec) -> Result<CategoricalTable> {
    spec.validate()?;
    let m = net.n_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut columns = vec![Vec::with_capacity(spec.n); m];
    let mut row = vec![0u32; m];
    for _ in 0..spec.n {
        for &v in net.topological_order() {
            let config = net.config_index(v, &row);
            let mut value = draw(net.row(v, config), &mut rng);
            if spec.noise > 0.0 && rng.random::<f64>() < spec.noise {
                value = rng.random_range(0..net.card(v) as u32);
            }
            row[v] = value;
        }
        for (col, &value) in columns.iter_mut().zip(&row) {
            col.push(value);
        }
    }
    let labels = (0..m).map(|v| net.states(v).to_vec()).collect();
    CategoricalTable::new(net.names(), labels, columns)
}
