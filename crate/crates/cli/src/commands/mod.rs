use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use redispatch_core::dataset::read_dataset_csv;
use redispatch_core::Dataset;
use serde::Serialize;

use crate::config::{RunConfig, RunPaths};
use crate::failure::{Failure, Tag};

mod build;
mod explain;
mod ingest;
mod report;
mod train;

pub use build::build;
pub use explain::explain;
pub use ingest::ingest;
pub use report::report;
pub use train::{rfe, train};

/// Resolved inputs shared by every command.
pub struct Context {
    pub cfg: RunConfig,
    pub paths: RunPaths,
    pub offline: bool,
    pub fixtures: Option<PathBuf>,
}

impl Context {
    pub fn new(
        cfg: RunConfig,
        out: &Path,
        offline: bool,
        fixtures: Option<PathBuf>,
    ) -> anyhow::Result<Context> {
        cfg.validate()?;
        let paths = RunPaths::new(out, &cfg);
        fs::create_dir_all(out)
            .with_context(|| format!("creating {}", out.display()))
            .tag(Failure::Runtime)?;
        Ok(Context {
            cfg,
            paths,
            offline,
            fixtures,
        })
    }

    /// Records the configuration next to the outputs.
    pub fn save_config(&self) -> anyhow::Result<()> {
        write_json(&self.paths.config(), &self.cfg)
    }

    pub fn load_dataset(&self) -> anyhow::Result<Dataset> {
        let path = self.paths.dataset();
        require(&path, "build")?;
        let file = fs::File::open(&path).tag(Failure::Runtime)?;
        let data = read_dataset_csv(std::io::BufReader::new(file), self.cfg.feature_set)
            .with_context(|| format!("reading {}", path.display()))
            .tag(Failure::Data)?;
        let want = self.cfg.feature_names();
        if data.features.names() != want {
            return Err(anyhow!(
                "{} holds features {:?} but the config selects {:?}; rerun `redispatch build`",
                path.display(),
                data.features.names(),
                want
            ))
            .tag(Failure::Data);
        }
        Ok(data)
    }
}

/// Fails with a pointer to the command that produces `path`.
pub fn require(path: &Path, producer: &str) -> anyhow::Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(anyhow!(
            "{} not found; run `redispatch {producer}` first",
            path.display()
        ))
        .tag(Failure::Data)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).tag(Failure::Runtime)?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).tag(Failure::Runtime)?;
    }
    fs::write(path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .tag(Failure::Runtime)
}

/// Opens `path` for writing through a buffer.
pub fn create(path: &Path) -> anyhow::Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).tag(Failure::Runtime)?;
    }
    let f = fs::File::create(path)
        .with_context(|| format!("writing {}", path.display()))
        .tag(Failure::Runtime)?;
    Ok(BufWriter::new(f))
}
