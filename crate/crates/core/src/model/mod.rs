//! Gradient-boosted regression trees.
//!
//! Trees record per-node training covers so that the explainer can evaluate
//! conditional expectations without access to the training data.

mod hyper;
mod serial;
mod train;
mod tree;

pub use hyper::{Hyperparameters, MAX_HISTOGRAM_BINS};
pub use serial::FORMAT_VERSION;
pub use train::fit;
pub use tree::{Branch, Ensemble, RegressionTree, Split, TreeNode};
