use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::{feature_importance, mean_importance, tree_shap};
use crate::frame::Dataset;
use crate::model::{fit, Hyperparameters};

use super::{r2, retrained_score, split, CvScores, Fold, GroupGapSplit};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfeConfig {
    pub cv: GroupGapSplit,
    /// Also fit on every row at each step and report the in-sample score.
    pub retrained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfeStep {
    pub features: Vec<String>,
    pub fold_scores: Vec<f64>,
    pub mean_score: f64,
    /// Fold-averaged importance, aligned with `features`.
    pub importance: Vec<f64>,
    pub eliminated: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrained_score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfeTrace {
    pub steps: Vec<RfeStep>,
}

impl RfeTrace {
    /// Features in the order they were removed.
    pub fn elimination_order(&self) -> Vec<&str> {
        self.steps.iter().filter_map(|s| s.eliminated.as_deref()).collect()
    }

    /// The step with the given number of active features.
    pub fn step_with(&self, n_features: usize) -> Option<&RfeStep> {
        self.steps.iter().find(|s| s.features.len() == n_features)
    }

    /// `n_features,mean_r2,fold_1,…` with one row per step.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let k = self.steps.first().map_or(0, |s| s.fold_scores.len());
        let mut header = vec!["n_features".to_string(), "mean_r2".to_string()];
        header.extend((1..=k).map(|i| format!("fold_{i}")));
        if self.steps.iter().any(|s| s.retrained_score.is_some()) {
            header.push("retrained_r2".into());
        }
        w.write_record(&header)?;
        for s in &self.steps {
            let mut rec = vec![s.features.len().to_string(), s.mean_score.to_string()];
            rec.extend(s.fold_scores.iter().map(f64::to_string));
            if let Some(r) = s.retrained_score {
                rec.push(r.to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn evaluate(data: &Dataset, hp: &Hyperparameters, folds: &[Fold]) -> Result<(CvScores, Vec<f64>)> {
    let per_fold = folds
        .par_iter()
        .map(|f| {
            let train = data.take_rows(&f.train);
            let test = data.take_rows(&f.test);
            let m = fit(&train.features, &train.target, hp)?;
            let score = r2(&test.target, &m.predict(&test.features)?)?;
            let fi = feature_importance(&tree_shap(&m, &test.features)?)?;
            Ok((score, fi))
        })
        .collect::<Result<Vec<_>>>()?;
    let (scores, fis): (Vec<f64>, Vec<_>) = per_fold.into_iter().unzip();
    Ok((CvScores::from_folds(scores), mean_importance(&fis)?.values))
}

/// Recursive feature elimination guided by held-out SHAP importance.
///
/// Each step cross-validates the active set, averages the test-fold
/// importances and drops the least important feature; on ties the one
/// declared later goes. Runs down to a single feature.
pub fn rfe(data: &Dataset, hp: &Hyperparameters, cfg: &RfeConfig) -> Result<RfeTrace> {
    if data.features.n_cols() < 2 {
        return Err(Error::invalid("feature elimination needs at least two features"));
    }
    let folds = split(data.hours(), &cfg.cv)?;
    let mut active = data.features.names();
    let mut steps = Vec::with_capacity(active.len());
    loop {
        let subset = data.select(&active)?;
        let (scores, importance) = evaluate(&subset, hp, &folds)?;
        let retrained = if cfg.retrained {
            Some(retrained_score(&subset, hp)?)
        } else {
            None
        };
        let eliminated = if active.len() > 1 {
            let mut worst = 0;
            for (j, v) in importance.iter().enumerate() {
                if *v <= importance[worst] {
                    worst = j;
                }
            }
            Some(active[worst].clone())
        } else {
            None
        };
        steps.push(RfeStep {
            features: active.clone(),
            fold_scores: scores.fold_scores,
            mean_score: scores.mean,
            importance,
            eliminated: eliminated.clone(),
            retrained_score: retrained,
        });
        match eliminated {
            Some(name) => active.retain(|n| *n != name),
            None => break,
        }
    }
    Ok(RfeTrace { steps })
}
