use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Booster configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Shrinkage in (0, 1], folded into leaf values.
    pub learning_rate: f64,
    /// Minimum number of training rows in each child of a split.
    pub min_child_cover: f64,
    pub subsample_rows: f64,
    pub subsample_features: f64,
    pub n_histogram_bins: usize,
    pub l2_leaf_penalty: f64,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            n_trees: 300,
            max_depth: 6,
            learning_rate: 0.1,
            min_child_cover: 5.0,
            subsample_rows: 1.0,
            subsample_features: 1.0,
            n_histogram_bins: 256,
            l2_leaf_penalty: 1.0,
            seed: 0,
        }
    }
}

pub const MAX_HISTOGRAM_BINS: usize = 4096;

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in (0, 1], got {v}")))
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        unit_interval("learning_rate", self.learning_rate)?;
        unit_interval("subsample_rows", self.subsample_rows)?;
        unit_interval("subsample_features", self.subsample_features)?;
        if !(self.min_child_cover.is_finite() && self.min_child_cover >= 0.0) {
            return Err(Error::invalid("min_child_cover must be finite and nonnegative"));
        }
        if !(self.l2_leaf_penalty.is_finite() && self.l2_leaf_penalty >= 0.0) {
            return Err(Error::invalid("l2_leaf_penalty must be finite and nonnegative"));
        }
        if !(2..=MAX_HISTOGRAM_BINS).contains(&self.n_histogram_bins) {
            return Err(Error::invalid(format!(
                "n_histogram_bins must lie in [2, {MAX_HISTOGRAM_BINS}]"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let hp = Hyperparameters::default();
        hp.validate().unwrap();
        let s = serde_json::to_string(&hp).unwrap();
        assert_eq!(serde_json::from_str::<Hyperparameters>(&s).unwrap(), hp);
    }

    #[test]
    fn out_of_range_rejected() {
        let bad = [
            Hyperparameters { learning_rate: 0.0, ..Default::default() },
            Hyperparameters { learning_rate: 1.5, ..Default::default() },
            Hyperparameters { subsample_rows: 0.0, ..Default::default() },
            Hyperparameters { max_depth: 0, ..Default::default() },
            Hyperparameters { l2_leaf_penalty: -1.0, ..Default::default() },
            Hyperparameters { n_histogram_bins: 1, ..Default::default() },
        ];
        for hp in bad {
            assert!(hp.validate().is_err(), "{hp:?}");
        }
    }
}
