use rayon::prelude::*;

use crate::error::Result;
use crate::frame::{FeatureMatrix, Hour};
use crate::model::Ensemble;

use super::treeshap::{self, Condition};

/// Pairwise SHAP interaction values.
///
/// `matrices[s]` is a row-major `n × n` matrix: off-diagonal entries hold half
/// of each pair's interaction, the diagonal the remaining main effect, so each
/// row sums to the feature's SHAP value.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionResult {
    pub feature_names: Vec<String>,
    pub hours: Vec<Hour>,
    pub base_value: f64,
    pub matrices: Vec<Vec<f64>>,
}

impl InteractionResult {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_samples(&self) -> usize {
        self.matrices.len()
    }

    #[inline]
    pub fn get(&self, sample: usize, j: usize, k: usize) -> f64 {
        self.matrices[sample][j * self.n_features() + k]
    }

    /// `Σ_k Φ_jk` for every feature of one sample.
    pub fn row_sums(&self, sample: usize) -> Vec<f64> {
        let n = self.n_features();
        self.matrices[sample].chunks(n).map(|r| r.iter().sum()).collect()
    }
}

fn sample_matrix(model: &Ensemble, used: &[Vec<usize>], x: &[f64]) -> Vec<f64> {
    let n = model.n_features();
    let phi = treeshap::row_attributions(model, x, Condition::None);
    let mut m = vec![0.0; n * n];
    let mut on = vec![0.0; n];
    let mut off = vec![0.0; n];
    let features: Vec<usize> = {
        let mut f: Vec<usize> = used.iter().flatten().copied().collect();
        f.sort_unstable();
        f.dedup();
        f
    };
    for &j in &features {
        on.iter_mut().for_each(|v| *v = 0.0);
        off.iter_mut().for_each(|v| *v = 0.0);
        for (tree, tree_used) in model.trees.iter().zip(used) {
            // Trees without `j` contribute equally to both runs.
            if tree_used.binary_search(&j).is_err() {
                continue;
            }
            treeshap::tree_attributions(tree, x, &mut on, Condition::Present(j));
            treeshap::tree_attributions(tree, x, &mut off, Condition::Absent(j));
        }
        for k in 0..n {
            if k != j {
                m[j * n + k] = (on[k] - off[k]) / 2.0;
            }
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            let s = (m[j * n + k] + m[k * n + j]) / 2.0;
            m[j * n + k] = s;
            m[k * n + j] = s;
        }
    }
    for j in 0..n {
        let off_diag: f64 = (0..n).filter(|&k| k != j).map(|k| m[j * n + k]).sum();
        m[j * n + j] = phi[j] - off_diag;
    }
    m
}

/// SHAP interaction values of every row of `x`.
///
/// Costs one conditioned TreeSHAP pass per used feature on top of the plain
/// attributions.
pub fn interaction_values(model: &Ensemble, x: &FeatureMatrix) -> Result<InteractionResult> {
    treeshap::check_covers(model)?;
    let rows = model.rows(x)?;
    let used: Vec<Vec<usize>> = model.trees.iter().map(|t| t.used_features()).collect();
    let matrices = rows.par_iter().map(|r| sample_matrix(model, &used, r)).collect();
    Ok(InteractionResult {
        feature_names: model.feature_names.clone(),
        hours: x.hours().to_vec(),
        base_value: treeshap::ensemble_base_value(model),
        matrices,
    })
}
