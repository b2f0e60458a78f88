//! Command-line driver: ingest, build, train, rfe, explain and report.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod failure;

pub use config::{RunConfig, RunPaths};
pub use failure::{classify, Failure};

#[derive(Debug, Parser)]
#[command(
    name = "redispatch",
    version,
    about = "Explainable redispatch-volume study"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Never touch the network; serve downloads from the cache.
    #[arg(long, global = true)]
    pub offline: bool,

    /// Read market documents from this directory instead of the API.
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,

    /// Run directory for all outputs.
    #[arg(long, global = true, default_value = "run")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Download or load every input series into a bundle.
    Ingest,
    /// Turn the bundle into the hourly modelling table.
    Build,
    /// Cross-validate and fit the model, optionally after a random search.
    Train,
    /// SHAP-guided recursive feature elimination.
    Rfe,
    /// Attributions, interaction values and importances.
    Explain,
    /// Plot-ready tables: importance, dependence, heat maps, densities.
    Report,
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.seed);
    let ctx = commands::Context::new(
        cfg.with_seed(seed),
        &cli.out,
        cli.offline,
        cli.fixtures.clone(),
    )?;
    match cli.command {
        Command::Ingest => commands::ingest(&ctx),
        Command::Build => commands::build(&ctx),
        Command::Train => commands::train(&ctx),
        Command::Rfe => commands::rfe(&ctx),
        Command::Explain => commands::explain(&ctx),
        Command::Report => commands::report(&ctx),
    }
}
