use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context as _};
use redispatch_core::explain::{
    dependence_data, read_attributions, read_interactions, ColorBy, FeatureImportance,
    InteractionResult, ShapResult,
};
use redispatch_core::frame::{format_hour, format_value};
use redispatch_core::report::{binned_mean, gaussian_kde};
use serde::Serialize;

use super::{create, require, write_json, Context};
use crate::config::RunConfig;
use crate::failure::{Failure, Tag};

#[derive(Serialize)]
struct DensityMeta {
    file: String,
    bandwidth_x: f64,
    bandwidth_y: f64,
    bandwidth_rule: String,
    grid: [usize; 2],
}

#[derive(Serialize)]
struct Metadata<'a> {
    features: Vec<String>,
    rows: usize,
    /// Colour column of each dependence file.
    dependence_color: BTreeMap<String, Option<String>>,
    heatmap_bins: [usize; 2],
    heatmaps: Vec<String>,
    densities: Vec<DensityMeta>,
    skipped: Vec<String>,
    config: &'a RunConfig,
}

fn read_with<T>(
    path: &Path,
    f: impl FnOnce(fs::File) -> redispatch_core::Result<T>,
) -> anyhow::Result<T> {
    let file = fs::File::open(path).tag(Failure::Runtime)?;
    f(file)
        .with_context(|| format!("reading {}", path.display()))
        .tag(Failure::Data)
}

fn write_importance(path: &Path, fi: &FeatureImportance) -> anyhow::Result<()> {
    let mut w = create(path)?;
    let body = (|| -> std::io::Result<()> {
        writeln!(w, "rank,feature,importance,mean_abs_shap")?;
        for (rank, name) in fi.ranking().into_iter().enumerate() {
            let v = fi.get(name).expect("ranked name");
            writeln!(
                w,
                "{},{},{},{}",
                rank + 1,
                name,
                format_value(v),
                format_value(v * fi.normalizer)
            )?;
        }
        w.flush()
    })();
    body.tag(Failure::Runtime)
}

pub fn report(ctx: &Context) -> anyhow::Result<()> {
    let data = ctx.load_dataset()?;
    require(&ctx.paths.shap(), "explain")?;
    require(&ctx.paths.importance(), "explain")?;
    let shap: ShapResult = read_with(&ctx.paths.shap(), read_attributions)?;
    if shap.feature_names != data.features.names() || shap.hours != data.hours() {
        return Err(anyhow!(
            "attributions do not match the dataset; rerun `redispatch explain`"
        ))
        .tag(Failure::Data);
    }
    let fi: FeatureImportance =
        serde_json::from_slice(&fs::read(ctx.paths.importance()).tag(Failure::Runtime)?)
            .context("reading importance.json")
            .tag(Failure::Data)?;
    let interactions: Option<InteractionResult> = if ctx.paths.interactions().exists() {
        Some(read_with(&ctx.paths.interactions(), read_interactions)?)
    } else {
        None
    };
    let interactions =
        interactions.filter(|ir| ir.feature_names == shap.feature_names && ir.hours == shap.hours);

    let dir = ctx.paths.report_dir();
    if dir.exists() {
        fs::remove_dir_all(&dir).tag(Failure::Runtime)?;
    }
    fs::create_dir_all(&dir).tag(Failure::Runtime)?;
    ctx.save_config()?;
    write_importance(&dir.join("importance.csv"), &fi)?;

    let rc = &ctx.cfg.report;
    let wind = rc.wind_feature.as_str();
    let wind_index = shap.feature_index(wind);
    let mut skipped = Vec::new();
    let mut colors = BTreeMap::new();
    for (j, name) in shap.feature_names.iter().enumerate() {
        let color = match &interactions {
            Some(ir) => ColorBy::Auto(ir),
            None => ColorBy::None,
        };
        let table = dependence_data(&shap, &data.features, name, color)?;
        let mut w = create(&dir.join(format!("dependence_{name}.csv")))?;
        let mut header = format!("timestamp,{name},shap_{name}");
        if let Some(c) = &table.color_feature {
            header.push_str(&format!(",{c}"));
        }
        let body = (|| -> std::io::Result<()> {
            writeln!(w, "{header}")?;
            for r in &table.rows {
                write!(
                    w,
                    "{},{},{}",
                    format_hour(&r.hour),
                    format_value(r.value),
                    format_value(r.shap)
                )?;
                if let Some(c) = r.color {
                    write!(w, ",{}", format_value(c))?;
                }
                writeln!(w)?;
            }
            w.flush()
        })();
        body.tag(Failure::Runtime)?;
        colors.insert(name.clone(), table.color_feature);

        let Some(k) = wind_index.filter(|&k| k != j) else {
            continue;
        };
        let wind_values = &data.features.columns()[k].values;
        let values = &data.features.columns()[j].values;
        let mut w = create(&dir.join(format!("wind_interaction_{name}.csv")))?;
        let body = (|| -> std::io::Result<()> {
            write!(w, "timestamp,{wind},{name},shap_{name}")?;
            if interactions.is_some() {
                write!(w, ",interaction")?;
            }
            writeln!(w)?;
            for s in 0..shap.n_samples() {
                write!(
                    w,
                    "{},{},{},{}",
                    format_hour(&shap.hours[s]),
                    format_value(wind_values[s]),
                    format_value(values[s]),
                    format_value(shap.attributions[s][j])
                )?;
                if let Some(ir) = &interactions {
                    write!(w, ",{}", format_value(ir.get(s, k, j)))?;
                }
                writeln!(w)?;
            }
            w.flush()
        })();
        body.tag(Failure::Runtime)?;
    }
    if wind_index.is_none() {
        skipped.push(format!(
            "wind interaction tables: {wind} is not a model feature"
        ));
    }

    let mut heatmaps = Vec::new();
    let mut densities = Vec::new();
    match data.features.column(wind) {
        None => skipped.push(format!("heat maps: {wind} is not in the dataset")),
        Some(wc) => {
            for flow in &rc.flow_features {
                let Some(fc) = data.features.column(flow) else {
                    skipped.push(format!("heat map for {flow}: not in the dataset"));
                    continue;
                };
                let hm = binned_mean(
                    (wind, &wc.values),
                    (flow, &fc.values),
                    &data.target,
                    rc.heatmap_bins[0],
                    rc.heatmap_bins[1],
                )?;
                let file = format!("heatmap_{wind}_{flow}.csv");
                hm.write_csv(create(&dir.join(&file))?)?;
                heatmaps.push(file);
                match gaussian_kde(
                    (wind, &wc.values),
                    (flow, &fc.values),
                    rc.density_grid[0],
                    rc.density_grid[1],
                ) {
                    Ok(kde) => {
                        let file = format!("density_{wind}_{flow}.csv");
                        kde.write_csv(create(&dir.join(&file))?)?;
                        densities.push(DensityMeta {
                            file,
                            bandwidth_x: kde.bandwidth_x,
                            bandwidth_y: kde.bandwidth_y,
                            bandwidth_rule: kde.bandwidth_rule.clone(),
                            grid: rc.density_grid,
                        });
                    }
                    Err(e) => skipped.push(format!("density for {flow}: {e}")),
                }
            }
        }
    }
    let meta = Metadata {
        features: shap.feature_names.clone(),
        rows: data.len(),
        dependence_color: colors,
        heatmap_bins: rc.heatmap_bins,
        heatmaps,
        densities,
        skipped,
        config: &ctx.cfg,
    };
    write_json(&dir.join("metadata.json"), &meta)?;
    println!("report written to {}", dir.display());
    Ok(())
}
