use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::FeatureMatrix;
use crate::model::Hyperparameters;

/// Side taken by rows whose split feature is missing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    #[serde(rename = "split_feature")]
    pub feature: usize,
    /// Rows with `x <= threshold` go left.
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    #[serde(rename = "default_branch")]
    pub default: Branch,
}

impl Split {
    #[inline]
    pub fn child(&self, value: f64) -> usize {
        if value.is_nan() {
            match self.default {
                Branch::Left => self.left,
                Branch::Right => self.right,
            }
        } else if value <= self.threshold {
            self.left
        } else {
            self.right
        }
    }
}

/// One node; `split` is `None` for leaves.
///
/// Internal nodes also carry the value they would have had as a leaf, which is
/// informational only. `cover` is the number of training rows that reached the
/// node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    #[serde(flatten)]
    pub split: Option<Split>,
    pub leaf_value: f64,
    pub cover: f64,
}

impl TreeNode {
    pub fn leaf(value: f64, cover: f64) -> Self {
        TreeNode {
            split: None,
            leaf_value: value,
            cover,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

/// A binary regression tree stored as a node array with the root at index 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn new(nodes: Vec<TreeNode>) -> Self {
        RegressionTree { nodes }
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Output for a row given in model feature order.
    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            let node = &self.nodes[i];
            match &node.split {
                None => return node.leaf_value,
                Some(s) => i = s.child(row[s.feature]),
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &RegressionTree, i: usize) -> usize {
            match &t.nodes[i].split {
                None => 0,
                Some(s) => 1 + walk(t, s.left).max(walk(t, s.right)),
            }
        }
        walk(self, 0)
    }

    /// Features referenced by any split.
    pub fn used_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| n.split.as_ref().map(|s| s.feature))
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    /// Checks the structural invariants: a single root, two in-range children
    /// per internal node, every node reachable exactly once, finite thresholds,
    /// nonnegative covers that add up at every split.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::ModelIntegrity("tree has no nodes".into()));
        }
        let mut parents = vec![0usize; n];
        for (i, node) in self.nodes.iter().enumerate() {
            if !(node.cover.is_finite() && node.cover >= 0.0) {
                return Err(Error::ModelIntegrity(format!("node {i} has invalid cover {}", node.cover)));
            }
            if !node.leaf_value.is_finite() {
                return Err(Error::ModelIntegrity(format!("node {i} has non-finite value")));
            }
            if let Some(s) = &node.split {
                if s.feature >= n_features {
                    return Err(Error::ModelIntegrity(format!(
                        "node {i} splits on feature {} of {n_features}",
                        s.feature
                    )));
                }
                if !s.threshold.is_finite() {
                    return Err(Error::ModelIntegrity(format!("node {i} has non-finite threshold")));
                }
                for c in [s.left, s.right] {
                    if c >= n || c == 0 || c == i {
                        return Err(Error::ModelIntegrity(format!("node {i} has invalid child {c}")));
                    }
                    parents[c] += 1;
                }
                if s.left == s.right {
                    return Err(Error::ModelIntegrity(format!("node {i} has identical children")));
                }
                let sum = self.nodes[s.left].cover + self.nodes[s.right].cover;
                if (node.cover - sum).abs() > 1e-9 * node.cover.abs().max(1.0) {
                    return Err(Error::ModelIntegrity(format!(
                        "node {i} cover {} != children {sum}",
                        node.cover
                    )));
                }
            }
        }
        if let Some(bad) = (1..n).find(|&i| parents[i] != 1) {
            return Err(Error::ModelIntegrity(format!(
                "node {bad} has {} parents",
                parents[bad]
            )));
        }
        // One parent each plus the root has none, so reachability rules out cycles.
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::ModelIntegrity(format!("cycle through node {i}")));
            }
            if let Some(s) = &self.nodes[i].split {
                stack.push(s.left);
                stack.push(s.right);
            }
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return Err(Error::ModelIntegrity(format!("node {orphan} unreachable from root")));
        }
        Ok(())
    }
}

/// Boosted ensemble. Prediction is `base_score + Σ tree(x)`; shrinkage is
/// already folded into the leaf values.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub feature_names: Vec<String>,
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
    pub hyperparameters: Hyperparameters,
}

impl Ensemble {
    /// A model without trees.
    pub fn constant(feature_names: Vec<String>, base_score: f64) -> Self {
        Ensemble {
            feature_names,
            base_score,
            learning_rate: 1.0,
            trees: Vec::new(),
            hyperparameters: Hyperparameters {
                n_trees: 0,
                ..Hyperparameters::default()
            },
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.base_score.is_finite() {
            return Err(Error::ModelIntegrity("non-finite base score".into()));
        }
        for (t, tree) in self.trees.iter().enumerate() {
            tree.validate(self.n_features())
                .map_err(|e| Error::ModelIntegrity(format!("tree {t}: {e}")))?;
        }
        Ok(())
    }

    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }

    /// Resolves the model's feature names against `x` and returns rows in
    /// model order. Extra columns in `x` are ignored.
    pub fn rows(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        let idx = x.resolve(&self.feature_names)?;
        let cols = x.columns();
        Ok((0..x.n_rows())
            .map(|r| idx.iter().map(|&c| cols[c].values[r]).collect())
            .collect())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        let rows = self.rows(x)?;
        Ok(rows.par_iter().map(|r| self.predict_row(r)).collect())
    }

    pub fn used_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.trees.iter().flat_map(|t| t.used_features()).collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn stump() -> RegressionTree {
        RegressionTree::new(vec![
            TreeNode {
                split: Some(Split {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                    default: Branch::Right,
                }),
                leaf_value: 5.0,
                cover: 100.0,
            },
            TreeNode::leaf(0.0, 50.0),
            TreeNode::leaf(10.0, 50.0),
        ])
    }

    #[test]
    fn constant_model_predicts_base() {
        let m = Ensemble::constant(vec!["a".into()], 5.0);
        assert_eq!(m.predict_row(&[123.0]), 5.0);
        assert_eq!(m.predict_row(&[f64::NAN]), 5.0);
    }

    #[test]
    fn stump_routes_missing_to_default() {
        let t = stump();
        assert_eq!(t.predict_row(&[0.0]), 0.0);
        assert_eq!(t.predict_row(&[1.0]), 10.0);
        assert_eq!(t.predict_row(&[0.5]), 0.0);
        assert_eq!(t.predict_row(&[f64::NAN]), 10.0);
        t.validate(1).unwrap();
    }

    #[test]
    fn validate_catches_structural_defects() {
        let mut t = stump();
        t.nodes[1].cover = 49.0;
        assert!(t.validate(1).is_err());

        let mut t = stump();
        if let Some(s) = t.nodes[0].split.as_mut() {
            s.right = 1;
        }
        assert!(t.validate(1).is_err());

        let mut t = stump();
        t.nodes.push(TreeNode::leaf(1.0, 1.0));
        assert!(t.validate(1).is_err());

        assert!(stump().validate(0).is_err());
    }
}
