//! JSON model documents.
//!
//! Floats are written in shortest round-trip form, so a save/load cycle
//! reproduces every value bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Ensemble, Hyperparameters, RegressionTree};

pub const FORMAT_VERSION: &str = "1";

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: String,
    feature_names: Vec<String>,
    base_score: f64,
    learning_rate: f64,
    trees: Vec<RegressionTree>,
    hyperparameters: Hyperparameters,
    seed: u64,
}

impl Ensemble {
    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            format_version: FORMAT_VERSION.to_string(),
            feature_names: self.feature_names.clone(),
            base_score: self.base_score,
            learning_rate: self.learning_rate,
            trees: self.trees.clone(),
            hyperparameters: self.hyperparameters.clone(),
            seed: self.hyperparameters.seed,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(s)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format_version {:?}",
                doc.format_version
            )));
        }
        if doc.seed != doc.hyperparameters.seed {
            return Err(Error::invalid("seed disagrees with hyperparameters.seed"));
        }
        let m = Ensemble {
            feature_names: doc.feature_names,
            base_score: doc.base_score,
            learning_rate: doc.learning_rate,
            trees: doc.trees,
            hyperparameters: doc.hyperparameters,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ensemble::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Branch, Split, TreeNode};

    #[test]
    fn awkward_floats_survive_round_trip() {
        let vals = [0.1 + 0.2, 1.0 / 3.0, f64::MIN_POSITIVE, 1e300, -2.5e-310, 123456789.123456789];
        let nodes = vec![
            TreeNode {
                split: Some(Split {
                    feature: 0,
                    threshold: vals[1],
                    left: 1,
                    right: 2,
                    default: Branch::Left,
                }),
                leaf_value: vals[0],
                cover: 3.0,
            },
            TreeNode::leaf(vals[2], 1.0),
            TreeNode::leaf(vals[4], 2.0),
        ];
        let mut m = Ensemble::constant(vec!["x".into()], vals[5]);
        m.trees.push(RegressionTree::new(nodes));
        let back = Ensemble::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.trees[0].nodes[2].leaf_value.to_bits(), vals[4].to_bits());
    }

    #[test]
    fn leaf_nodes_omit_split_fields() {
        let m = Ensemble {
            trees: vec![RegressionTree::new(vec![TreeNode::leaf(1.0, 4.0)])],
            ..Ensemble::constant(vec!["x".into()], 0.0)
        };
        let json = m.to_json().unwrap();
        assert!(!json.contains("split_feature"));
        assert!(json.contains("\"format_version\": \"1\""));
    }

    #[test]
    fn wrong_version_rejected() {
        let json = Ensemble::constant(vec![], 1.0)
            .to_json()
            .unwrap()
            .replace("\"format_version\": \"1\"", "\"format_version\": \"2\"");
        assert!(Ensemble::from_json(&json).is_err());
    }
}
