use anyhow::anyhow;
use redispatch_core::dataset::{
    add_engineered_columns, assemble, complete_cross_border, filter_records, hourly_volume,
    write_dataset_csv,
};
use redispatch_ingest::snapshot::{load_rejects, Manifest};
use redispatch_ingest::{load_base_table, load_interventions};
use serde::Serialize;

use super::{create, require, write_json, Context};
use crate::failure::{Failure, Tag};

#[derive(Serialize)]
struct BuildSummary {
    records: usize,
    rejected_rows: usize,
    kept_after_filter: usize,
    mirrors_added: usize,
    intervention_energy_mwh: f64,
    target_energy_mwh: f64,
    rows: usize,
    features: Vec<String>,
}

pub fn build(ctx: &Context) -> anyhow::Result<()> {
    let bundle = &ctx.paths.bundle;
    require(&bundle.join("manifest.json"), "ingest")?;
    let manifest = Manifest::read(bundle)?;
    if manifest.incomplete {
        return Err(anyhow!(
            "bundle {} is incomplete ({} missing series); rerun `redispatch ingest`",
            bundle.display(),
            manifest.gaps.len()
        ))
        .tag(Failure::Data);
    }
    if manifest.interventions.is_none() {
        return Err(anyhow!(
            "bundle {} has no redispatch records; set `redispatch_csv` and rerun `redispatch ingest`",
            bundle.display()
        ))
        .tag(Failure::Data);
    }
    let window = ctx.cfg.window.unwrap_or(manifest.window);
    let records = load_interventions(bundle)?;
    let n_records = records.len();
    let filtered = filter_records(records);
    let kept = filtered.len();
    let completed = complete_cross_border(filtered);
    let mirrors = completed.len() - kept;
    let target = hourly_volume(&completed, window)?;

    let base = load_base_table(bundle, Some(window))?;
    let names = ctx.cfg.feature_names();
    let mut features = add_engineered_columns(&base)?.select(&names)?;
    features.set_feature_set(ctx.cfg.feature_set);
    let (data, provenance) = assemble(&target, &features, ctx.cfg.max_gap_hours)?;
    if data.is_empty() {
        return Err(anyhow!("no complete rows remain after assembly")).tag(Failure::Data);
    }

    ctx.save_config()?;
    let mut out = create(&ctx.paths.dataset())?;
    write_dataset_csv(&mut out, &data)?;
    drop(out);
    write_json(&ctx.paths.provenance(), &provenance)?;
    let summary = BuildSummary {
        records: n_records,
        rejected_rows: load_rejects(bundle).map(|r| r.len()).unwrap_or(0),
        kept_after_filter: kept,
        mirrors_added: mirrors,
        intervention_energy_mwh: completed.iter().map(|r| r.energy_mwh()).sum(),
        target_energy_mwh: target.total(),
        rows: data.len(),
        features: names,
    };
    write_json(&ctx.paths.build_summary(), &summary)?;
    println!(
        "dataset {}: {} rows × {} features ({} dropped)",
        ctx.paths.dataset().display(),
        data.len(),
        data.features.n_cols(),
        provenance.dropped_rows
    );
    Ok(())
}
