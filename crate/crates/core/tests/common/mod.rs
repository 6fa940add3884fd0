#![allow(dead_code)]

use pathspt::{PathGenSpec, PathModel, Portfolio, WeightPath};

/// Rebalances a share-holdings account step by step. Capitalizations are the
/// weights themselves (the market is the numeraire), so wealth starts at 1
/// and moves only through the shares held over each step.
pub fn rebalancing_wealth<P: Portfolio>(pi: &P, path: &WeightPath) -> Vec<f64> {
    let j = path.assets();
    let mut wealth = 1.0;
    let mut out = vec![wealth];
    let mut target = vec![0.0; j];
    for k in 1..path.len() {
        let prices = path.weights_at(k - 1);
        pi.weights(prices, &mut target).unwrap();
        let shares: Vec<f64> = (0..j).map(|i| target[i] * wealth / prices[i]).collect();
        let next = path.weights_at(k);
        wealth = shares.iter().zip(next).map(|(s, p)| s * p).sum();
        out.push(wealth);
    }
    out
}

/// Linear scan for the first index whose running `Σ_j Σ_k (Δμ_j)²` reaches `a`.
pub fn first_passage_scan(path: &WeightPath, a: f64) -> Option<usize> {
    if a <= 0.0 {
        return Some(0);
    }
    let mut acc = 0.0;
    for k in 1..path.len() {
        let prev = path.weights_at(k - 1);
        let next = path.weights_at(k);
        for i in 0..path.assets() {
            let d = next[i] - prev[i];
            acc += d * d;
        }
        if acc >= a {
            return Some(k);
        }
    }
    None
}

pub fn spec(model: PathModel, assets: usize, log2_steps: u32, vol: f64, seed: u64) -> PathGenSpec {
    let steps = 1usize << log2_steps;
    PathGenSpec::uniform(model, assets, steps, 1.0 / steps as f64, vol, seed)
}

pub fn path(model: PathModel, assets: usize, log2_steps: u32, vol: f64, seed: u64) -> WeightPath {
    pathspt::simulate_path(&spec(model, assets, log2_steps, vol, seed)).unwrap()
}

/// A point of the open simplex from positive raw draws.
pub fn normalize(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}
