use anyhow::anyhow;
use redispatch_core::explain::{
    feature_importance, interaction_values, tree_shap, write_attributions, write_interactions,
};
use redispatch_core::model::Ensemble;

use super::{create, require, write_json, Context};
use crate::failure::{Failure, Tag};

pub fn explain(ctx: &Context) -> anyhow::Result<()> {
    let data = ctx.load_dataset()?;
    require(&ctx.paths.model(), "train")?;
    let model = Ensemble::load(&ctx.paths.model())?;
    if model.feature_names != data.features.names() {
        return Err(anyhow!(
            "model features {:?} differ from the dataset; rerun `redispatch train`",
            model.feature_names
        ))
        .tag(Failure::Data);
    }
    let shap = tree_shap(&model, &data.features)?;
    let fi = feature_importance(&shap)?;
    ctx.save_config()?;
    let mut out = create(&ctx.paths.shap())?;
    write_attributions(&mut out, &shap)?;
    drop(out);
    write_json(&ctx.paths.importance(), &fi)?;
    if ctx.cfg.explain.interactions {
        let ir = interaction_values(&model, &data.features)?;
        let mut out = create(&ctx.paths.interactions())?;
        write_interactions(&mut out, &ir)?;
    } else if ctx.paths.interactions().exists() {
        std::fs::remove_file(ctx.paths.interactions()).tag(Failure::Runtime)?;
    }
    println!("importance: {}", fi.ranking().join(" > "));
    Ok(())
}
