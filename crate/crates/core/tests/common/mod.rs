#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use redispatch_core::model::{Branch, Ensemble, RegressionTree, Split, TreeNode};

fn grow(
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<TreeNode>,
    cover: u32,
    depth: usize,
    max_depth: usize,
    n_features: usize,
) -> usize {
    let id = nodes.len();
    let value = rng.random_range(-10.0..10.0);
    nodes.push(TreeNode::leaf(value, cover as f64));
    if depth >= max_depth || cover < 2 || rng.random_bool(0.2) {
        return id;
    }
    let left_cover = rng.random_range(1..cover);
    let feature = rng.random_range(0..n_features);
    let threshold = rng.random_range(0.0..1.0);
    let default = if rng.random_bool(0.5) { Branch::Left } else { Branch::Right };
    let left = grow(rng, nodes, left_cover, depth + 1, max_depth, n_features);
    let right = grow(rng, nodes, cover - left_cover, depth + 1, max_depth, n_features);
    nodes[id].split = Some(Split { feature, threshold, left, right, default });
    id
}

/// A random ensemble with integer, additive covers.
pub fn random_ensemble(seed: u64, n_features: usize, max_depth: usize, max_trees: usize) -> Ensemble {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_trees = rng.random_range(1..=max_trees);
    let mut m = Ensemble::constant((0..n_features).map(|i| format!("f{i}")).collect(), rng.random_range(-5.0..5.0));
    for _ in 0..n_trees {
        let mut nodes = Vec::new();
        let cover = rng.random_range(2..200);
        grow(&mut rng, &mut nodes, cover, 0, max_depth, n_features);
        m.trees.push(RegressionTree::new(nodes));
    }
    m.validate().unwrap();
    m
}

/// Random rows in the unit cube with roughly 10% missing entries.
pub fn random_rows(seed: u64, n: usize, n_features: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..n)
        .map(|_| {
            (0..n_features)
                .map(|_| if rng.random_bool(0.1) { f64::NAN } else { rng.random_range(0.0..1.0) })
                .collect()
        })
        .collect()
}

/// Naive recursive prediction, independent of the library's traversal.
pub fn slow_predict(m: &Ensemble, x: &[f64]) -> f64 {
    fn eval(t: &RegressionTree, i: usize, x: &[f64]) -> f64 {
        let n = &t.nodes[i];
        match &n.split {
            None => n.leaf_value,
            Some(s) => {
                let v = x[s.feature];
                let go_left = if v.is_nan() { s.default == Branch::Left } else { v <= s.threshold };
                eval(t, if go_left { s.left } else { s.right }, x)
            }
        }
    }
    m.base_score + m.trees.iter().map(|t| eval(t, 0, x)).sum::<f64>()
}

/// Coalition value with features in `mask` known and the rest averaged out by cover.
pub fn coalition_value(m: &Ensemble, x: &[f64], mask: u32) -> f64 {
    fn eval(t: &RegressionTree, i: usize, x: &[f64], mask: u32) -> f64 {
        let n = &t.nodes[i];
        match &n.split {
            None => n.leaf_value,
            Some(s) => {
                if mask >> s.feature & 1 == 1 {
                    let v = x[s.feature];
                    let go_left = if v.is_nan() { s.default == Branch::Left } else { v <= s.threshold };
                    eval(t, if go_left { s.left } else { s.right }, x, mask)
                } else {
                    let l = &t.nodes[s.left];
                    let r = &t.nodes[s.right];
                    (l.cover * eval(t, s.left, x, mask) + r.cover * eval(t, s.right, x, mask)) / n.cover
                }
            }
        }
    }
    m.base_score + m.trees.iter().map(|t| eval(t, 0, x, mask)).sum::<f64>()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Shapley interaction index by enumeration, split evenly between (j,k) and (k,j).
pub fn oracle_interaction(m: &Ensemble, x: &[f64], j: usize, k: usize) -> f64 {
    let n = m.n_features();
    let others: Vec<usize> = (0..n).filter(|&i| i != j && i != k).collect();
    let mut total = 0.0;
    for sub in 0u32..(1 << others.len()) {
        let mut mask = 0u32;
        for (b, &f) in others.iter().enumerate() {
            if sub >> b & 1 == 1 {
                mask |= 1 << f;
            }
        }
        let s = sub.count_ones() as usize;
        let w = factorial(s) * factorial(n - s - 2) / factorial(n - 1);
        let delta = coalition_value(m, x, mask | 1 << j | 1 << k)
            - coalition_value(m, x, mask | 1 << j)
            - coalition_value(m, x, mask | 1 << k)
            + coalition_value(m, x, mask);
        total += w * delta;
    }
    total / 2.0
}
