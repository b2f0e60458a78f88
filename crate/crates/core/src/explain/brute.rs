//! Exact Shapley values by enumerating every feature coalition.
//!
//! Exponential in the feature count; exists to check the polynomial-time
//! explainer on small models.

use crate::error::{Error, Result};
use crate::model::{Ensemble, RegressionTree};

pub const MAX_BRUTE_FORCE_FEATURES: usize = 15;

/// Expected output of `tree` when only features in `present` (a bitmask) are
/// known; hidden splits average their children by cover.
fn conditional_expectation(tree: &RegressionTree, x: &[f64], present: u32) -> f64 {
    fn walk(t: &RegressionTree, i: usize, x: &[f64], present: u32) -> f64 {
        let n = &t.nodes[i];
        match &n.split {
            None => n.leaf_value,
            Some(s) if present & (1 << s.feature) != 0 => walk(t, s.child(x[s.feature]), x, present),
            Some(s) => {
                let (l, r) = (&t.nodes[s.left], &t.nodes[s.right]);
                (l.cover * walk(t, s.left, x, present) + r.cover * walk(t, s.right, x, present))
                    / n.cover
            }
        }
    }
    walk(tree, 0, x, present)
}

/// Value of every coalition, indexed by bitmask.
pub(crate) fn coalition_values(model: &Ensemble, x: &[f64]) -> Vec<f64> {
    let n = model.n_features();
    (0..1u32 << n)
        .map(|mask| {
            model.base_score
                + model
                    .trees
                    .iter()
                    .map(|t| conditional_expectation(t, x, mask))
                    .sum::<f64>()
        })
        .collect()
}

/// `w[s] = s! (n - s - 1)! / n!`
pub(crate) fn shapley_weights(n: usize) -> Vec<f64> {
    let fact: Vec<f64> = (0..=n).scan(1.0, |acc, k| {
        if k > 0 {
            *acc *= k as f64;
        }
        Some(*acc)
    }).collect();
    (0..n).map(|s| fact[s] * fact[n - s - 1] / fact[n]).collect()
}

/// Exact Shapley values of `model` at `x` (model feature order).
pub fn brute_force_shap(model: &Ensemble, x: &[f64]) -> Result<Vec<f64>> {
    let n = model.n_features();
    if n > MAX_BRUTE_FORCE_FEATURES {
        return Err(Error::Capacity {
            what: "features for subset enumeration",
            actual: n,
            limit: MAX_BRUTE_FORCE_FEATURES,
        });
    }
    if x.len() != n {
        return Err(Error::schema(format!("row has {} values, model has {n} features", x.len())));
    }
    super::treeshap::check_covers(model)?;
    let v = coalition_values(model, x);
    let w = shapley_weights(n);
    let mut phi = vec![0.0; n];
    for (j, p) in phi.iter_mut().enumerate() {
        let bit = 1u32 << j;
        for mask in (0..1u32 << n).filter(|m| m & bit == 0) {
            *p += w[mask.count_ones() as usize] * (v[(mask | bit) as usize] - v[mask as usize]);
        }
    }
    Ok(phi)
}
