//! Histogram-based gradient boosting for squared-error regression.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::FeatureMatrix;
use crate::model::{Branch, Ensemble, Hyperparameters, RegressionTree, Split, TreeNode};

const MISSING: u16 = u16::MAX;

/// Quantile cut points of one feature plus the bin of every row.
///
/// Bin `b` holds values in `(cuts[b-1], cuts[b]]`, so a split after bin `b`
/// sends `x <= cuts[b]` left.
struct BinnedFeature {
    cuts: Vec<f64>,
    bins: Vec<u16>,
}

fn midpoint(a: f64, b: f64) -> f64 {
    let mut m = a + (b - a) / 2.0;
    if !m.is_finite() {
        m = a / 2.0 + b / 2.0;
    }
    if m >= b || m < a {
        a
    } else {
        m
    }
}

fn cut_points(values: &[f64], max_bins: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut uniq = sorted.clone();
    uniq.dedup();
    if uniq.len() < 2 {
        return Vec::new();
    }
    if uniq.len() <= max_bins {
        return uniq.windows(2).map(|w| midpoint(w[0], w[1])).collect();
    }
    let n = sorted.len();
    let mut cuts = Vec::with_capacity(max_bins - 1);
    for k in 1..max_bins {
        let lo = sorted[(k * n / max_bins).max(1) - 1];
        let next = uniq.partition_point(|u| *u <= lo);
        if next < uniq.len() {
            let c = midpoint(lo, uniq[next]);
            if cuts.last() != Some(&c) {
                cuts.push(c);
            }
        }
    }
    cuts
}

fn bin_feature(values: &[f64], max_bins: usize) -> BinnedFeature {
    let cuts = cut_points(values, max_bins);
    let bins = values
        .iter()
        .map(|&v| {
            if v.is_nan() {
                MISSING
            } else {
                cuts.partition_point(|c| *c < v) as u16
            }
        })
        .collect();
    BinnedFeature { cuts, bins }
}

#[derive(Clone, Copy, Default)]
struct Stat {
    grad: f64,
    count: f64,
}

impl Stat {
    fn add(&mut self, g: f64) {
        self.grad += g;
        self.count += 1.0;
    }

    fn score(self, l2: f64) -> f64 {
        self.grad * self.grad / (self.count + l2)
    }
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    feature: usize,
    cut: usize,
    default: Branch,
    gain: f64,
}

struct Grower<'a> {
    binned: &'a [BinnedFeature],
    grad: &'a [f64],
    features: &'a [usize],
    hp: &'a Hyperparameters,
    nodes: Vec<TreeNode>,
}

impl Grower<'_> {
    fn leaf_value(&self, s: Stat) -> f64 {
        -self.hp.learning_rate * s.grad / (s.count + self.hp.l2_leaf_penalty)
    }

    fn best_for_feature(&self, f: usize, rows: &[u32], total: Stat) -> Option<Candidate> {
        let bf = &self.binned[f];
        let n_bins = bf.cuts.len() + 1;
        if n_bins < 2 {
            return None;
        }
        let mut hist = vec![Stat::default(); n_bins];
        let mut missing = Stat::default();
        for &r in rows {
            let b = bf.bins[r as usize];
            let g = self.grad[r as usize];
            if b == MISSING {
                missing.add(g);
            } else {
                hist[b as usize].add(g);
            }
        }
        let l2 = self.hp.l2_leaf_penalty;
        let min_child = self.hp.min_child_cover.max(1.0);
        let parent = total.score(l2);
        let present = Stat {
            grad: total.grad - missing.grad,
            count: total.count - missing.count,
        };
        let mut best: Option<Candidate> = None;
        let mut left = Stat::default();
        for (cut, h) in hist.iter().enumerate().take(n_bins - 1) {
            left.grad += h.grad;
            left.count += h.count;
            let right = Stat {
                grad: present.grad - left.grad,
                count: present.count - left.count,
            };
            let options: &[Branch] = if missing.count > 0.0 {
                &[Branch::Left, Branch::Right]
            } else if left.count >= right.count {
                &[Branch::Left]
            } else {
                &[Branch::Right]
            };
            for &default in options {
                let (l, r) = match default {
                    Branch::Left if missing.count > 0.0 => (
                        Stat { grad: left.grad + missing.grad, count: left.count + missing.count },
                        right,
                    ),
                    Branch::Right if missing.count > 0.0 => (
                        left,
                        Stat { grad: right.grad + missing.grad, count: right.count + missing.count },
                    ),
                    _ => (left, right),
                };
                if l.count < min_child || r.count < min_child {
                    continue;
                }
                let gain = l.score(l2) + r.score(l2) - parent;
                if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                    best = Some(Candidate { feature: f, cut, default, gain });
                }
            }
        }
        best
    }

    fn best_split(&self, rows: &[u32], total: Stat) -> Option<Candidate> {
        let per_feature: Vec<Option<Candidate>> = self
            .features
            .par_iter()
            .map(|&f| self.best_for_feature(f, rows, total))
            .collect();
        // Features are in ascending order, so a strict comparison keeps the lowest index on ties.
        per_feature
            .into_iter()
            .flatten()
            .fold(None, |acc: Option<Candidate>, c| match acc {
                Some(a) if a.gain >= c.gain => Some(a),
                _ => Some(c),
            })
    }

    fn grow(&mut self, rows: Vec<u32>, depth: usize) -> usize {
        let mut total = Stat::default();
        for &r in &rows {
            total.add(self.grad[r as usize]);
        }
        let id = self.nodes.len();
        self.nodes.push(TreeNode::leaf(self.leaf_value(total), total.count));

        let splittable =
            depth < self.hp.max_depth && total.count >= 2.0 * self.hp.min_child_cover.max(1.0);
        let Some(best) = splittable.then(|| self.best_split(&rows, total)).flatten() else {
            return id;
        };

        let bins = &self.binned[best.feature].bins;
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows.iter().partition(|&&r| {
            let b = bins[r as usize];
            if b == MISSING {
                best.default == Branch::Left
            } else {
                (b as usize) <= best.cut
            }
        });
        drop(rows);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id].split = Some(Split {
            feature: best.feature,
            threshold: self.binned[best.feature].cuts[best.cut],
            left,
            right,
            default: best.default,
        });
        id
    }
}

fn sample_sorted(rng: &mut ChaCha8Rng, n: usize, fraction: f64) -> Vec<usize> {
    if fraction >= 1.0 {
        return (0..n).collect();
    }
    let k = ((n as f64 * fraction).round() as usize).clamp(1, n);
    let mut v = index::sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

/// Fits a squared-error booster.
///
/// The model starts at the target mean and adds one tree per round; a round
/// whose tree cannot split is dropped. Identical inputs and seed give an
/// identical model.
pub fn fit(x: &FeatureMatrix, y: &[f64], hp: &Hyperparameters) -> Result<Ensemble> {
    hp.validate()?;
    let n = x.n_rows();
    if n != y.len() {
        return Err(Error::invalid(format!("{n} rows but {} targets", y.len())));
    }
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 rows, got {n}")));
    }
    if n > u32::MAX as usize {
        return Err(Error::Capacity { what: "rows", actual: n, limit: u32::MAX as usize });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("target value {i} is not finite")));
    }
    for c in x.columns() {
        if c.values.iter().any(|v| v.is_infinite()) {
            return Err(Error::invalid(format!("column {} contains an infinite value", c.name)));
        }
    }

    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut model = Ensemble {
        feature_names: x.names(),
        base_score,
        learning_rate: hp.learning_rate,
        trees: Vec::with_capacity(hp.n_trees),
        hyperparameters: hp.clone(),
    };
    if y.iter().all(|&v| v == y[0]) {
        return Ok(model);
    }

    let binned: Vec<BinnedFeature> = x
        .columns()
        .par_iter()
        .map(|c| bin_feature(&c.values, hp.n_histogram_bins))
        .collect();
    let cols: Vec<&[f64]> = x.columns().iter().map(|c| c.values.as_slice()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut pred = vec![base_score; n];
    let mut grad = vec![0.0; n];
    for _ in 0..hp.n_trees {
        let rows = sample_sorted(&mut rng, n, hp.subsample_rows);
        let features = sample_sorted(&mut rng, x.n_cols(), hp.subsample_features);
        for (g, (p, t)) in grad.iter_mut().zip(pred.iter().zip(y)) {
            *g = p - t;
        }
        let mut grower = Grower {
            binned: &binned,
            grad: &grad,
            features: &features,
            hp,
            nodes: Vec::new(),
        };
        grower.grow(rows.into_iter().map(|r| r as u32).collect(), 0);
        let tree = RegressionTree::new(grower.nodes);
        if tree.root().is_leaf() {
            continue;
        }
        pred.par_iter_mut().enumerate().for_each(|(r, p)| {
            let mut i = 0;
            loop {
                let node = &tree.nodes[i];
                match &node.split {
                    None => {
                        *p += node.leaf_value;
                        break;
                    }
                    Some(s) => i = s.child(cols[s.feature][r]),
                }
            }
        });
        model.trees.push(tree);
    }
    Ok(model)
}
