use std::fs;

use anyhow::Context as _;
use redispatch_core::eval::{
    cross_validate, random_search, rfe as run_rfe, split, write_jsonl, RfeConfig,
};
use redispatch_core::model::{fit, Hyperparameters};
use serde::{Deserialize, Serialize};

use super::{create, write_json, Context};
use crate::failure::{Failure, Tag};

/// Summary written by `train` and read back by `rfe`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub features: Vec<String>,
    pub rows: usize,
    pub hyperparameters: Hyperparameters,
    pub fold_scores: Vec<f64>,
    pub mean_r2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_best_trial: Option<usize>,
}

pub fn train(ctx: &Context) -> anyhow::Result<()> {
    let data = ctx.load_dataset()?;
    let cfg = &ctx.cfg;
    let (hp, best_trial) = match &cfg.search {
        Some(s) => {
            let result = random_search(
                &data,
                &s.space,
                s.n_trials,
                &cfg.hyperparameters,
                &cfg.cv,
                cfg.seed,
            )?;
            let mut out = create(&ctx.paths.search_trials())?;
            write_jsonl(&mut out, &result.trials)?;
            println!(
                "search: best trial {} with mean R² {:.4}",
                result.best_trial,
                result.best_score()
            );
            (result.best, Some(result.best_trial))
        }
        None => (cfg.hyperparameters.clone(), None),
    };
    let folds = split(data.hours(), &cfg.cv)?;
    let scores = cross_validate(&data, &hp, &folds)?;
    let model = fit(&data.features, &data.target, &hp)?;
    ctx.save_config()?;
    model.save(&ctx.paths.model())?;
    let report = TrainReport {
        features: data.features.names(),
        rows: data.len(),
        hyperparameters: hp,
        fold_scores: scores.fold_scores,
        mean_r2: scores.mean,
        search_best_trial: best_trial,
    };
    write_json(&ctx.paths.train_report(), &report)?;
    println!(
        "model {}: mean CV R² {:.4}",
        ctx.paths.model().display(),
        report.mean_r2
    );
    Ok(())
}

/// Hyperparameters chosen by `train` when it has run, else the configured ones.
fn tuned_hyperparameters(ctx: &Context) -> anyhow::Result<Hyperparameters> {
    let path = ctx.paths.train_report();
    if !path.exists() {
        return Ok(ctx.cfg.hyperparameters.clone());
    }
    let report: TrainReport = serde_json::from_slice(&fs::read(&path).tag(Failure::Runtime)?)
        .with_context(|| format!("reading {}", path.display()))
        .tag(Failure::Data)?;
    Ok(report.hyperparameters)
}

pub fn rfe(ctx: &Context) -> anyhow::Result<()> {
    let data = ctx.load_dataset()?;
    let hp = tuned_hyperparameters(ctx)?;
    let trace = run_rfe(
        &data,
        &hp,
        &RfeConfig {
            cv: ctx.cfg.cv.clone(),
            retrained: ctx.cfg.rfe.retrained,
        },
    )?;
    ctx.save_config()?;
    let mut out = create(&ctx.paths.rfe_trace())?;
    write_jsonl(&mut out, &trace.steps)?;
    drop(out);
    let mut out = create(&ctx.paths.rfe_summary())?;
    trace.write_summary_csv(&mut out)?;
    println!(
        "elimination order: {}",
        trace.elimination_order().join(", ")
    );
    Ok(())
}
