use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ShapResult;

/// Mean absolute attribution per feature, scaled so the largest is 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature_names: Vec<String>,
    pub values: Vec<f64>,
    /// Mean |φ| of the top feature, in target units; `values[j] * normalizer`
    /// recovers the unnormalized importance.
    pub normalizer: f64,
    /// Set when every attribution is zero and nothing could be normalized.
    pub degenerate: bool,
}

impl FeatureImportance {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.feature_names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    /// Feature names by descending importance; ties keep declared order.
    pub fn ranking(&self) -> Vec<&str> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[b].total_cmp(&self.values[a]));
        idx.into_iter().map(|i| self.feature_names[i].as_str()).collect()
    }
}

pub fn feature_importance(shap: &ShapResult) -> Result<FeatureImportance> {
    let n_samples = shap.n_samples();
    if n_samples == 0 {
        return Err(Error::invalid("feature importance needs at least one sample"));
    }
    let mut mean_abs = vec![0.0; shap.n_features()];
    for phi in &shap.attributions {
        for (m, p) in mean_abs.iter_mut().zip(phi) {
            *m += p.abs();
        }
    }
    for m in &mut mean_abs {
        *m /= n_samples as f64;
    }
    let normalizer = mean_abs.iter().copied().fold(0.0, f64::max);
    let (values, degenerate) = if normalizer > 0.0 {
        (mean_abs.iter().map(|m| m / normalizer).collect(), false)
    } else {
        (vec![0.0; mean_abs.len()], true)
    };
    Ok(FeatureImportance {
        feature_names: shap.feature_names.clone(),
        values,
        normalizer,
        degenerate,
    })
}

/// Combines importances computed on several sample sets (e.g. CV folds) by
/// averaging the unnormalized mean |φ| and renormalizing.
pub fn mean_importance(parts: &[FeatureImportance]) -> Result<FeatureImportance> {
    let first = parts
        .first()
        .ok_or_else(|| Error::invalid("no importances to average"))?;
    let n = first.values.len();
    let mut acc = vec![0.0; n];
    for p in parts {
        if p.feature_names != first.feature_names {
            return Err(Error::schema("importances over different features"));
        }
        for (a, v) in acc.iter_mut().zip(&p.values) {
            *a += v * p.normalizer / parts.len() as f64;
        }
    }
    let normalizer = acc.iter().copied().fold(0.0, f64::max);
    let degenerate = normalizer <= 0.0;
    let values = if degenerate {
        vec![0.0; n]
    } else {
        acc.iter().map(|a| a / normalizer).collect()
    };
    Ok(FeatureImportance {
        feature_names: first.feature_names.clone(),
        values,
        normalizer,
        degenerate,
    })
}
