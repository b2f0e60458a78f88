//! Redispatch-volume regression with gradient-boosted trees and exact
//! Shapley explanations.
//!
//! The crate covers the modelling side of the study: building the hourly
//! target from intervention records ([`dataset`]), training boosted trees
//! ([`model`]), explaining them ([`explain`]) and validating them ([`eval`]).

pub mod dataset;
pub mod error;
pub mod frame;
pub mod eval;
pub mod explain;
pub mod model;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use frame::{Column, Dataset, FeatureMatrix, FeatureSet, Hour, Unit};
