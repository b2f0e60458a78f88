use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{FeatureMatrix, Hour};

use super::{InteractionResult, ShapResult};

/// How to pick the colour column of a dependence table.
#[derive(Clone, Copy, Debug)]
pub enum ColorBy<'a> {
    None,
    Feature(&'a str),
    /// The feature with the largest total |interaction| with the target feature.
    Auto(&'a InteractionResult),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DependenceRow {
    pub hour: Hour,
    pub value: f64,
    pub shap: f64,
    pub color: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DependenceTable {
    pub feature: String,
    pub color_feature: Option<String>,
    pub rows: Vec<DependenceRow>,
}

fn strongest_partner(ir: &InteractionResult, j: usize) -> Option<usize> {
    let n = ir.n_features();
    let mut best: Option<(usize, f64)> = None;
    for k in (0..n).filter(|&k| k != j) {
        let total: f64 = (0..ir.n_samples()).map(|s| ir.get(s, j, k).abs()).sum();
        if best.is_none_or(|(_, b)| total > b) {
            best = Some((k, total));
        }
    }
    best.map(|(k, _)| k)
}

/// One `(x_j, φ_j, colour)` row per sample.
pub fn dependence_data(
    shap: &ShapResult,
    x: &FeatureMatrix,
    feature: &str,
    color: ColorBy<'_>,
) -> Result<DependenceTable> {
    let j = shap
        .feature_index(feature)
        .ok_or_else(|| Error::schema(format!("unknown feature {feature}")))?;
    if x.n_rows() != shap.n_samples() {
        return Err(Error::invalid(format!(
            "{} feature rows but {} explained samples",
            x.n_rows(),
            shap.n_samples()
        )));
    }
    let values = &x.require(feature)?.values;
    let color_feature = match color {
        ColorBy::None => None,
        ColorBy::Feature(name) => Some(name.to_string()),
        ColorBy::Auto(ir) => {
            if ir.feature_names != shap.feature_names || ir.n_samples() != shap.n_samples() {
                return Err(Error::invalid("interaction values do not match the attributions"));
            }
            strongest_partner(ir, j).map(|k| shap.feature_names[k].clone())
        }
    };
    let color_values = match &color_feature {
        Some(name) => Some(&x.require(name)?.values),
        None => None,
    };
    let rows = (0..shap.n_samples())
        .map(|s| DependenceRow {
            hour: x.hours()[s],
            value: values[s],
            shap: shap.attributions[s][j],
            color: color_values.map(|c| c[s]),
        })
        .collect();
    Ok(DependenceTable {
        feature: feature.to_string(),
        color_feature,
        rows,
    })
}
