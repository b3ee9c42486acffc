//! Exact distributions of small networks, used as ground truth.

use std::collections::HashMap;

use super::BayesNet;
use crate::error::{Error, Result};

/// Largest joint state space [`exact_joint`] will enumerate.
const MAX_STATES: usize = 1 << 24;

/// The network whose samples equal those of `net` drawn with replacement
/// noise: every row becomes `(1 - noise) * p + noise / k`.
pub fn with_uniform_noise(net: &BayesNet, noise: f64) -> Result<BayesNet> {
    let cpts = (0..net.n_vars())
        .map(|v| {
            let k = net.card(v) as f64;
            net.cpt(v).iter().map(|&p| (1.0 - noise) * p + noise / k).collect()
        })
        .collect();
    net.with_cpts(cpts)
}

/// Probability of every joint assignment, variable 0 varying slowest.
pub fn exact_joint(net: &BayesNet) -> Result<Vec<f64>> {
    let cards: Vec<usize> = (0..net.n_vars()).map(|v| net.card(v)).collect();
    let total = cards
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k).filter(|&t| t <= MAX_STATES))
        .ok_or_else(|| Error::Network(format!("joint state space exceeds {MAX_STATES}")))?;
    let mut joint = vec![0.0; total];
    let mut assignment = vec![0u32; cards.len()];
    for (index, slot) in joint.iter_mut().enumerate() {
        let mut rest = index;
        for v in (0..cards.len()).rev() {
            assignment[v] = (rest % cards[v]) as u32;
            rest /= cards[v];
        }
        *slot = (0..cards.len())
            .map(|v| net.row(v, net.config_index(v, &assignment))[assignment[v] as usize])
            .product();
    }
    Ok(joint)
}

/// `I(X; Y | Z)` in bits under the network's exact joint distribution.
pub fn exact_cmi(net: &BayesNet, x: usize, y: usize, z: &[usize]) -> Result<f64> {
    let joint = exact_joint(net)?;
    let cards: Vec<usize> = (0..net.n_vars()).map(|v| net.card(v)).collect();
    let mut p_xyz: HashMap<(u32, u32, Vec<u32>), f64> = HashMap::new();
    let mut assignment = vec![0u32; cards.len()];
    for (index, &p) in joint.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut rest = index;
        for v in (0..cards.len()).rev() {
            assignment[v] = (rest % cards[v]) as u32;
            rest /= cards[v];
        }
        let key = (assignment[x], assignment[y], z.iter().map(|&v| assignment[v]).collect());
        *p_xyz.entry(key).or_default() += p;
    }
    let mut p_xz: HashMap<(u32, Vec<u32>), f64> = HashMap::new();
    let mut p_yz: HashMap<(u32, Vec<u32>), f64> = HashMap::new();
    let mut p_z: HashMap<Vec<u32>, f64> = HashMap::new();
    for ((a, b, c), &p) in &p_xyz {
        *p_xz.entry((*a, c.clone())).or_default() += p;
        *p_yz.entry((*b, c.clone())).or_default() += p;
        *p_z.entry(c.clone()).or_default() += p;
    }
    let mut keys: Vec<_> = p_xyz.keys().cloned().collect();
    keys.sort();
    let mut info = 0.0;
    for key in keys {
        let p = p_xyz[&key];
        let (a, b, c) = key;
        let ratio = p * p_z[&c] / (p_xz[&(a, c.clone())] * p_yz[&(b, c)]);
        info += p * ratio.log2();
    }
    Ok(info.max(0.0))
}
