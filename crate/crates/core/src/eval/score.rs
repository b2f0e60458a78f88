use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Dataset;
use crate::model::{fit, Hyperparameters};

use super::Fold;

/// Coefficient of determination, `1 − SS_res / SS_tot`.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::invalid(format!(
            "{} observations but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.len() < 2 {
        return Err(Error::invalid("R² needs at least two observations"));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedScore("observations are constant".into()));
    }
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvScores {
    pub fold_scores: Vec<f64>,
    pub mean: f64,
}

impl CvScores {
    pub fn from_folds(fold_scores: Vec<f64>) -> Self {
        let mean = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
        CvScores { fold_scores, mean }
    }
}

/// Fits on each training fold and scores on its test fold.
pub fn cross_validate(data: &Dataset, hp: &Hyperparameters, folds: &[Fold]) -> Result<CvScores> {
    if folds.is_empty() {
        return Err(Error::invalid("no folds"));
    }
    let scores = folds
        .par_iter()
        .map(|f| {
            let train = data.take_rows(&f.train);
            let test = data.take_rows(&f.test);
            let m = fit(&train.features, &train.target, hp)?;
            r2(&test.target, &m.predict(&test.features)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvScores::from_folds(scores))
}

/// In-sample score of a model fit on every row. Optimistic by construction.
pub fn retrained_score(data: &Dataset, hp: &Hyperparameters) -> Result<f64> {
    let m = fit(&data.features, &data.target, hp)?;
    r2(&data.target, &m.predict(&data.features)?)
}
