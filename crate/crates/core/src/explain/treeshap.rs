//! Path-dependent TreeSHAP.
//!
//! Walks each tree once per sample while maintaining, for the features on the
//! current root-to-node path, the proportion of feature subsets that reach the
//! node. Untaken branches are weighted by their share of the parent's cover.
//! The optional conditioning on one feature (fixed present or absent) is what
//! the interaction computation builds on.

use crate::error::{Error, Result};
use crate::model::{Ensemble, RegressionTree};

const NO_FEATURE: usize = usize::MAX;

#[derive(Clone, Copy, Debug)]
struct PathElement {
    feature: usize,
    zero_fraction: f64,
    one_fraction: f64,
    weight: f64,
}

/// Restricts the Shapley game to coalitions that always (or never) contain
/// one feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Condition {
    None,
    Present(usize),
    Absent(usize),
}

impl Condition {
    fn feature(self) -> Option<usize> {
        match self {
            Condition::None => None,
            Condition::Present(f) | Condition::Absent(f) => Some(f),
        }
    }
}

fn extend(path: &mut Vec<PathElement>, zero_fraction: f64, one_fraction: f64, feature: usize) {
    let d = path.len();
    path.push(PathElement {
        feature,
        zero_fraction,
        one_fraction,
        weight: if d == 0 { 1.0 } else { 0.0 },
    });
    let denom = (d + 1) as f64;
    for i in (0..d).rev() {
        path[i + 1].weight += one_fraction * path[i].weight * (i + 1) as f64 / denom;
        path[i].weight = zero_fraction * path[i].weight * (d - i) as f64 / denom;
    }
}

/// Removes element `index`, undoing its contribution to the weights.
fn unwind(path: &mut Vec<PathElement>, index: usize) {
    let d = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let denom = (d + 1) as f64;
    let mut next_one_portion = path[d].weight;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next_one_portion * denom / ((i + 1) as f64 * one);
            next_one_portion = tmp - path[i].weight * zero * (d - i) as f64 / denom;
        } else {
            path[i].weight = path[i].weight * denom / (zero * (d - i) as f64);
        }
    }
    for i in index..d {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
    path.pop();
}

/// Total weight the path would have with element `index` unwound.
fn unwound_sum(path: &[PathElement], index: usize) -> f64 {
    let d = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let denom = (d + 1) as f64;
    let mut total = 0.0;
    if one != 0.0 {
        let mut next_one_portion = path[d].weight;
        for i in (0..d).rev() {
            let tmp = next_one_portion * denom / ((i + 1) as f64 * one);
            total += tmp;
            next_one_portion = path[i].weight - tmp * zero * ((d - i) as f64 / denom);
        }
    } else if zero != 0.0 {
        for i in (0..d).rev() {
            total += (path[i].weight / zero) / ((d - i) as f64 / denom);
        }
    }
    total
}

struct Walk<'a> {
    tree: &'a RegressionTree,
    x: &'a [f64],
    phi: &'a mut [f64],
    condition: Condition,
}

impl Walk<'_> {
    fn recurse(
        &mut self,
        levels: &mut [Vec<PathElement>],
        node: usize,
        zero_fraction: f64,
        one_fraction: f64,
        parent_feature: usize,
        condition_fraction: f64,
    ) {
        if condition_fraction == 0.0 {
            return;
        }
        let (parent, rest) = levels.split_first_mut().expect("path buffer sized to tree depth");
        let path = &mut rest[0];
        path.clear();
        path.extend_from_slice(parent);
        if self.condition.feature() != Some(parent_feature) {
            extend(path, zero_fraction, one_fraction, parent_feature);
        }

        let n = &self.tree.nodes[node];
        let Some(split) = &n.split else {
            for i in 1..path.len() {
                let w = unwound_sum(path, i);
                let el = path[i];
                self.phi[el.feature] +=
                    w * (el.one_fraction - el.zero_fraction) * n.leaf_value * condition_fraction;
            }
            return;
        };

        let hot = split.child(self.x[split.feature]);
        let cold = if hot == split.left { split.right } else { split.left };
        let hot_zero = self.tree.nodes[hot].cover / n.cover;
        let cold_zero = self.tree.nodes[cold].cover / n.cover;

        let mut incoming_zero = 1.0;
        let mut incoming_one = 1.0;
        if let Some(k) = path.iter().position(|e| e.feature == split.feature) {
            incoming_zero = path[k].zero_fraction;
            incoming_one = path[k].one_fraction;
            unwind(path, k);
        }

        let mut hot_fraction = condition_fraction;
        let mut cold_fraction = condition_fraction;
        match self.condition {
            Condition::Present(c) if c == split.feature => cold_fraction = 0.0,
            Condition::Absent(c) if c == split.feature => {
                hot_fraction *= hot_zero;
                cold_fraction *= cold_zero;
            }
            _ => {}
        }

        self.recurse(
            rest,
            hot,
            hot_zero * incoming_zero,
            incoming_one,
            split.feature,
            hot_fraction,
        );
        self.recurse(rest, cold, cold_zero * incoming_zero, 0.0, split.feature, cold_fraction);
    }
}

/// Adds one tree's attributions for row `x` into `phi`.
pub(crate) fn tree_attributions(
    tree: &RegressionTree,
    x: &[f64],
    phi: &mut [f64],
    condition: Condition,
) {
    let depth = tree.depth();
    let mut levels: Vec<Vec<PathElement>> =
        (0..depth + 3).map(|_| Vec::with_capacity(depth + 2)).collect();
    let mut walk = Walk { tree, x, phi, condition };
    walk.recurse(&mut levels, 0, 1.0, 1.0, NO_FEATURE, 1.0);
}

/// Cover-weighted mean output of a tree: its prediction with every feature hidden.
pub(crate) fn expected_value(tree: &RegressionTree) -> f64 {
    fn walk(t: &RegressionTree, i: usize) -> f64 {
        let n = &t.nodes[i];
        match &n.split {
            None => n.leaf_value,
            Some(s) => {
                let (l, r) = (&t.nodes[s.left], &t.nodes[s.right]);
                (l.cover * walk(t, s.left) + r.cover * walk(t, s.right)) / n.cover
            }
        }
    }
    walk(tree, 0)
}

/// Rejects models whose conditional expectations are undefined.
pub(crate) fn check_covers(model: &Ensemble) -> Result<()> {
    for (t, tree) in model.trees.iter().enumerate() {
        for (i, n) in tree.nodes.iter().enumerate() {
            if n.split.is_some() && !(n.cover > 0.0 && n.cover.is_finite()) {
                return Err(Error::ModelIntegrity(format!(
                    "tree {t} node {i} is internal with cover {}",
                    n.cover
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn ensemble_base_value(model: &Ensemble) -> f64 {
    model.base_score + model.trees.iter().map(expected_value).sum::<f64>()
}

pub(crate) fn row_attributions(model: &Ensemble, x: &[f64], condition: Condition) -> Vec<f64> {
    let mut phi = vec![0.0; model.n_features()];
    for tree in &model.trees {
        tree_attributions(tree, x, &mut phi, condition);
    }
    phi
}
