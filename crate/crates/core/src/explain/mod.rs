//! Exact SHAP explanations for [`Ensemble`] models.
//!
//! Attributions use path-dependent conditioning: hiding a feature means
//! descending both branches of its splits weighted by training cover. The
//! fast explainer and the brute-force oracle share these semantics, so they
//! agree up to round-off.

mod brute;
mod dependence;
mod export;
mod importance;
mod interaction;
mod treeshap;

use rayon::prelude::*;

use crate::error::Result;
use crate::frame::{FeatureMatrix, Hour};
use crate::model::Ensemble;

pub use brute::{brute_force_shap, MAX_BRUTE_FORCE_FEATURES};
pub use dependence::{dependence_data, ColorBy, DependenceRow, DependenceTable};
pub use export::{
    read_attributions, read_interactions, write_attributions, write_interactions,
};
pub use importance::{feature_importance, mean_importance, FeatureImportance};
pub use interaction::{interaction_values, InteractionResult};

use treeshap::Condition;

/// Per-sample attributions in target units.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapResult {
    pub feature_names: Vec<String>,
    pub hours: Vec<Hour>,
    /// Expected model output over the training distribution.
    pub base_value: f64,
    /// `attributions[s][j]` is feature `j`'s share of sample `s`'s prediction.
    pub attributions: Vec<Vec<f64>>,
}

impl ShapResult {
    pub fn n_samples(&self) -> usize {
        self.attributions.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// `base_value + Σ_j φ_j` for each sample.
    pub fn reconstructed(&self) -> Vec<f64> {
        self.attributions
            .iter()
            .map(|phi| self.base_value + phi.iter().sum::<f64>())
            .collect()
    }
}

/// SHAP values of every row of `x` under `model`.
pub fn tree_shap(model: &Ensemble, x: &FeatureMatrix) -> Result<ShapResult> {
    treeshap::check_covers(model)?;
    let rows = model.rows(x)?;
    let attributions = rows
        .par_iter()
        .map(|r| treeshap::row_attributions(model, r, Condition::None))
        .collect();
    Ok(ShapResult {
        feature_names: model.feature_names.clone(),
        hours: x.hours().to_vec(),
        base_value: treeshap::ensemble_base_value(model),
        attributions,
    })
}

/// SHAP values for a single row given in model feature order.
pub fn tree_shap_row(model: &Ensemble, x: &[f64]) -> Result<Vec<f64>> {
    treeshap::check_covers(model)?;
    if x.len() != model.n_features() {
        return Err(crate::Error::schema(format!(
            "row has {} values, model has {} features",
            x.len(),
            model.n_features()
        )));
    }
    Ok(treeshap::row_attributions(model, x, Condition::None))
}

/// Expected model output with every feature hidden.
pub fn base_value(model: &Ensemble) -> Result<f64> {
    treeshap::check_covers(model)?;
    Ok(treeshap::ensemble_base_value(model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Branch, RegressionTree, Split, TreeNode};

    fn stump_model(n_features: usize) -> Ensemble {
        let mut m = Ensemble::constant((0..n_features).map(|i| format!("f{i}")).collect(), 0.0);
        m.trees.push(RegressionTree::new(vec![
            TreeNode {
                split: Some(Split { feature: 0, threshold: 0.5, left: 1, right: 2, default: Branch::Left }),
                leaf_value: 5.0,
                cover: 100.0,
            },
            TreeNode::leaf(0.0, 50.0),
            TreeNode::leaf(10.0, 50.0),
        ]));
        m
    }

    #[test]
    fn constant_model_has_zero_attributions() {
        let m = Ensemble::constant(vec!["a".into(), "b".into()], 5.0);
        assert_eq!(base_value(&m).unwrap(), 5.0);
        assert_eq!(tree_shap_row(&m, &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn stump_attribution() {
        let m = stump_model(3);
        assert_eq!(base_value(&m).unwrap(), 5.0);
        assert_eq!(tree_shap_row(&m, &[1.0, 0.0, 0.0]).unwrap(), vec![5.0, 0.0, 0.0]);
        assert_eq!(tree_shap_row(&m, &[0.0, 9.0, 9.0]).unwrap(), vec![-5.0, 0.0, 0.0]);
        // Missing goes to the default (left) branch.
        assert_eq!(tree_shap_row(&m, &[f64::NAN, 0.0, 0.0]).unwrap(), vec![-5.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_cover_internal_node_is_integrity_error() {
        let mut m = stump_model(1);
        m.trees[0].nodes[0].cover = 0.0;
        assert!(matches!(tree_shap_row(&m, &[1.0]), Err(crate::Error::ModelIntegrity(_))));
    }

    #[test]
    fn repeated_feature_on_path_matches_oracle() {
        // x0 split twice along one path, x1 once.
        let node = |f, t, l, r, c| TreeNode {
            split: Some(Split { feature: f, threshold: t, left: l, right: r, default: Branch::Right }),
            leaf_value: 0.0,
            cover: c,
        };
        let mut m = Ensemble::constant(vec!["a".into(), "b".into()], 1.0);
        m.trees.push(RegressionTree::new(vec![
            node(0, 0.5, 1, 2, 10.0),
            node(1, 0.5, 3, 4, 6.0),
            TreeNode::leaf(-2.0, 4.0),
            node(0, 0.2, 5, 6, 4.0),
            TreeNode::leaf(3.0, 2.0),
            TreeNode::leaf(7.0, 1.0),
            TreeNode::leaf(-1.0, 3.0),
        ]));
        m.validate().unwrap();
        for x in [[0.1, 0.1], [0.3, 0.1], [0.3, 0.9], [0.9, 0.9], [f64::NAN, 0.0]] {
            let fast = tree_shap_row(&m, &x).unwrap();
            let slow = brute_force_shap(&m, &x).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "{x:?}: {fast:?} vs {slow:?}");
            }
        }
    }
}
