use std::fs;

use anyhow::{anyhow, Context as _};
use redispatch_ingest::{snapshot, study_requests, Cache, Client, Fetcher};

use super::Context;
use crate::failure::{Failure, Tag};

/// Redispatch file picked up from a fixture directory when none is configured.
pub const FIXTURE_REDISPATCH: &str = "redispatch.csv";

pub fn ingest(ctx: &Context) -> anyhow::Result<()> {
    let window = ctx
        .cfg
        .window
        .ok_or_else(|| anyhow!("`window` must be set to ingest"))
        .tag(Failure::Config)?;
    let fetcher = match (&ctx.fixtures, ctx.offline) {
        (Some(dir), _) => {
            if !dir.is_dir() {
                return Err(anyhow!(
                    "fixture directory {} does not exist",
                    dir.display()
                ))
                .tag(Failure::Config);
            }
            Fetcher::fixtures(dir)
        }
        (None, true) => {
            if !ctx.paths.cache.is_dir() {
                return Err(anyhow!(
                    "offline mode needs a download cache at {} or a fixture directory (--fixtures)",
                    ctx.paths.cache.display()
                ))
                .tag(Failure::Config);
            }
            Fetcher::offline(Cache::new(&ctx.paths.cache)?)
        }
        (None, false) => Fetcher::live(
            Client::from_env(ctx.cfg.client.clone())?,
            Some(Cache::new(&ctx.paths.cache)?),
        ),
    };
    let csv_path = ctx.cfg.redispatch_csv.clone().or_else(|| {
        ctx.fixtures
            .as_ref()
            .map(|d| d.join(FIXTURE_REDISPATCH))
            .filter(|p| p.exists())
    });
    let csv = match &csv_path {
        Some(p) => Some(
            fs::read(p)
                .with_context(|| format!("reading redispatch file {}", p.display()))
                .tag(Failure::Data)?,
        ),
        None => None,
    };
    ctx.save_config()?;
    let manifest = snapshot(
        &fetcher,
        &study_requests(window),
        window,
        csv.as_deref(),
        &ctx.paths.bundle,
    )?;
    println!(
        "bundle {}: {} series, {} gaps, {} interventions",
        ctx.paths.bundle.display(),
        manifest.series.len(),
        manifest.gaps.len(),
        manifest.interventions.as_ref().map_or(0, |i| i.records)
    );
    if manifest.incomplete {
        let first = &manifest.gaps[0];
        return Err(anyhow!(
            "bundle is incomplete: {} of {} series failed (first: {}: {})",
            manifest.gaps.len(),
            manifest.gaps.len() + manifest.series.len(),
            first.stem,
            first.error
        ))
        .tag(Failure::Data);
    }
    Ok(())
}
