#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use climb_core::data::{BayesNet, Variable};

pub fn var(name: &str, k: usize) -> Variable {
    Variable { name: name.into(), states: (0..k).map(|s| format!("s{s}")).collect() }
}

/// Random DAG over `n` nodes (edges only from lower to higher index) with
/// random CPT rows. `sharpness` > 1 pushes rows toward one-hot.
pub fn random_net(seed: u64, n: usize, max_card: usize, edge_prob: f64, sharpness: i32) -> BayesNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cards: Vec<usize> = (0..n).map(|_| rng.random_range(2..=max_card)).collect();
    let parents: Vec<Vec<usize>> =
        (0..n).map(|v| (0..v).filter(|_| rng.random_bool(edge_prob)).collect()).collect();
    let cpts = (0..n)
        .map(|v| {
            let configs: usize = parents[v].iter().map(|&p| cards[p]).product();
            (0..configs)
                .flat_map(|_| {
                    let raw: Vec<f64> = (0..cards[v]).map(|_| rng.random::<f64>().powi(sharpness) + 1e-3).collect();
                    let total: f64 = raw.iter().sum();
                    raw.into_iter().map(move |p| p / total).collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();
    let vars = (0..n).map(|v| var(&format!("X{v}"), cards[v])).collect();
    BayesNet::new(vars, parents, cpts).expect("valid random net")
}

/// Net of named binary nodes.
pub fn binary_net(names: &[&str], parents: Vec<Vec<usize>>, cpts: Vec<Vec<f64>>) -> BayesNet {
    BayesNet::new(names.iter().map(|n| var(n, 2)).collect(), parents, cpts).expect("valid net")
}

/// Binary CPT for a majority vote: the child is 1 with probability `strength`
/// when at least half of its parents are 1, and with `1 - strength` otherwise.
pub fn vote_cpt(n_parents: usize, strength: f64) -> Vec<f64> {
    (0..1usize << n_parents)
        .flat_map(|config| {
            let ones = config.count_ones() as usize;
            let hi = if n_parents == 0 { 0.5 } else if 2 * ones >= n_parents { strength } else { 1.0 - strength };
            [1.0 - hi, hi]
        })
        .collect()
}
