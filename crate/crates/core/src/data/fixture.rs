use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{forward_sample, BayesNet, SampleSpec, Variable};
use crate::error::Result;
use crate::table::CategoricalTable;

/// Domain size of every fixture variable.
const K: usize = 4;

/// The four-node diamond `F -> D, F -> E, D -> T, E -> T` and a sample from it.
#[derive(Debug, Clone)]
pub struct DsepFixture {
    /// Noise-free generating network; columns of `table` follow its order F, D, E, T.
    pub net: BayesNet,
    pub table: CategoricalTable,
}

fn one_hot(values: &[usize]) -> Vec<f64> {
    let mut cpt = vec![0.0; values.len() * K];
    for (config, &v) in values.iter().enumerate() {
        cpt[config * K + v] = 1.0;
    }
    cpt
}

/// Builds the diamond with random deterministic mechanisms and samples it.
///
/// F is uniform; D and E are random bijections of F; T is a random
/// surjective function of (D, E). Mechanisms come from stream 1 of the seed,
/// the sample from stream 0, so both are fixed by `spec.seed`.
pub fn dsep_fixture(spec: &SampleSpec) -> Result<DsepFixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let mut bijection = || {
        let mut p: Vec<usize> = (0..K).collect();
        p.shuffle(&mut rng);
        p
    };
    let d = bijection();
    let e = bijection();
    // Every value of T is hit by at least one (D, E) cell.
    let mut cells: Vec<usize> = (0..K * K).collect();
    cells.shuffle(&mut rng);
    let mut t = vec![0; K * K];
    let mut hit: Vec<usize> = (0..K).collect();
    hit.shuffle(&mut rng);
    for (i, &cell) in cells.iter().enumerate() {
        t[cell] = if i < K { hit[i] } else { rng.random_range(0..K) };
    }

    let var = |name: &str| Variable { name: name.into(), states: (0..K).map(|s| s.to_string()).collect() };
    let net = BayesNet::new(
        vec![var("F"), var("D"), var("E"), var("T")],
        vec![vec![], vec![0], vec![0], vec![1, 2]],
        vec![vec![1.0 / K as f64; K], one_hot(&d), one_hot(&e), one_hot(&t)],
    )?;
    let table = forward_sample(&net, spec)?;
    Ok(DsepFixture { net, table })
}
