use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::request::SeriesRequest;
use crate::series::{RawSeries, Source};

/// Parsed series on disk, one JSON file per request hash. Entries never
/// expire; published market data does not change.
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Cache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, req: &SeriesRequest) -> PathBuf {
        self.dir.join(format!("{}.json", req.cache_key()))
    }

    pub fn get(&self, req: &SeriesRequest) -> Result<Option<RawSeries>> {
        let p = self.path(req);
        if !p.exists() {
            return Ok(None);
        }
        let mut s: RawSeries = serde_json::from_slice(&fs::read(p)?)?;
        s.source = Source::Cache;
        Ok(Some(s))
    }

    /// Writes to a temporary file in the cache directory, then renames.
    pub fn put(&self, series: &RawSeries) -> Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, series)?;
        tmp.flush()?;
        tmp.persist(self.path(&series.request)).map_err(|e| e.error)?;
        Ok(())
    }
}
