//! Bagged regression trees used as the configuration → AOCC surrogate.

use rand::Rng;
use rayon::prelude::*;

use super::{FeatureMatrix, NUM_FEATURES};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { trees: 100, max_depth: 8, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64; NUM_FEATURES]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Variance-reduction CART on the rows listed in `sample` (may repeat).
    pub fn fit(rows: &[[f64; NUM_FEATURES]], target: &[f64], sample: &[usize], max_depth: usize) -> Self {
        let mut tree = RegressionTree { nodes: Vec::new() };
        let mut idx = sample.to_vec();
        tree.grow(rows, target, &mut idx, max_depth);
        tree
    }

    fn grow(&mut self, rows: &[[f64; NUM_FEATURES]], target: &[f64], idx: &mut [usize], depth_left: usize) -> usize {
        let at = self.nodes.len();
        let n = idx.len() as f64;
        let pivot = target[idx[0]];
        let mean = pivot + idx.iter().map(|&i| target[i] - pivot).sum::<f64>() / n;
        self.nodes.push(Node::Leaf(mean));
        let pure = idx.iter().all(|&i| target[i] == pivot);
        if depth_left == 0 || idx.len() < 2 || pure {
            return at;
        }
        let Some((feature, threshold)) = best_split(rows, target, idx) else {
            return at;
        };
        idx.sort_by(|&a, &b| (rows[a][feature] > threshold).cmp(&(rows[b][feature] > threshold)));
        let cut = idx.partition_point(|&i| rows[i][feature] <= threshold);
        let (lo, hi) = idx.split_at_mut(cut);
        let left = self.grow(rows, target, lo, depth_left - 1);
        let right = self.grow(rows, target, hi, depth_left - 1);
        self.nodes[at] = Node::Split { feature, threshold, left, right };
        at
    }
}

/// Split maximizing `sum_l^2/n_l + sum_r^2/n_r` (equivalently the SSE
/// reduction). Thresholds sit midway between consecutive distinct values.
fn best_split(rows: &[[f64; NUM_FEATURES]], target: &[f64], idx: &[usize]) -> Option<(usize, f64)> {
    let n = idx.len();
    let total: f64 = idx.iter().map(|&i| target[i]).sum();
    let parent = total * total / n as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order = idx.to_vec();
    for f in 0..NUM_FEATURES {
        order.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]));
        let mut left_sum = 0.0;
        for pos in 0..n - 1 {
            left_sum += target[order[pos]];
            let (here, next) = (rows[order[pos]][f], rows[order[pos + 1]][f]);
            if here == next {
                continue;
            }
            let nl = (pos + 1) as f64;
            let nr = (n - pos - 1) as f64;
            let right_sum = total - left_sum;
            let score = left_sum * left_sum / nl + right_sum * right_sum / nr;
            if score - parent > 1e-12 * parent.abs().max(1e-300) && best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, f, 0.5 * (here + next)));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateModel {
    trees: Vec<RegressionTree>,
    params: ForestParams,
    r2_train: f64,
}

impl SurrogateModel {
    pub fn params(&self) -> ForestParams {
        self.params
    }

    pub fn r2_train(&self) -> f64 {
        self.r2_train
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    /// Mean of the tree outputs.
    pub fn predict(&self, x: &[f64; NUM_FEATURES]) -> f64 {
        let mut sum = 0.0;
        let first = self.trees[0].predict(x);
        let mut uniform = true;
        for t in &self.trees {
            let v = t.predict(x);
            uniform &= v == first;
            sum += v;
        }
        if uniform {
            first
        } else {
            sum / self.trees.len() as f64
        }
    }
}

/// Coefficient of determination `1 - SSE/SST`; 1 when the target is constant.
pub fn r_squared(target: &[f64], predicted: &[f64]) -> f64 {
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let constant = target.iter().all(|&y| y == target[0]);
    let sst: f64 = if constant { 0.0 } else { target.iter().map(|y| (y - mean) * (y - mean)).sum() };
    let sse: f64 = target.iter().zip(predicted).map(|(y, p)| (y - p) * (y - p)).sum();
    if sst == 0.0 {
        if sse == 0.0 { 1.0 } else { f64::NEG_INFINITY }
    } else {
        1.0 - sse / sst
    }
}

pub fn fit_surrogate(fm: &FeatureMatrix, params: ForestParams) -> Result<SurrogateModel> {
    if fm.is_empty() {
        return Err(Error::Argument("cannot fit a surrogate on an empty feature matrix".into()));
    }
    if params.trees == 0 {
        return Err(Error::Argument("forest needs at least one tree".into()));
    }
    let rows = fm.rows();
    let target = fm.target();
    let n = rows.len();
    let trees: Vec<RegressionTree> = (0..params.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng_from_words(&[seed::TREE_DOMAIN, params.seed, t as u64]);
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            RegressionTree::fit(rows, target, &sample, params.max_depth)
        })
        .collect();
    let mut model = SurrogateModel { trees, params, r2_train: 0.0 };
    let predicted: Vec<f64> = rows.iter().map(|x| model.predict(x)).collect();
    model.r2_train = r_squared(target, &predicted);
    Ok(model)
}
