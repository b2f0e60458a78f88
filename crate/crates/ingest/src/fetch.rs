use std::path::PathBuf;

use crate::cache::Cache;
use crate::client::Client;
use crate::error::{IngestError, Result};
use crate::request::SeriesRequest;
use crate::series::{RawSeries, Source};

/// Where series come from.
///
/// With a fixture directory set, requests are answered from
/// `<dir>/<quantity>__<area>[__<counterparty>].xml` only; the cache and the
/// client are never consulted. Otherwise the cache is tried first and the
/// client fills misses, unless the fetcher is offline.
pub struct Fetcher {
    fixtures: Option<PathBuf>,
    cache: Option<Cache>,
    client: Option<Client>,
    offline: bool,
}

impl Fetcher {
    pub fn fixtures(dir: impl Into<PathBuf>) -> Self {
        Fetcher { fixtures: Some(dir.into()), cache: None, client: None, offline: true }
    }

    pub fn live(client: Client, cache: Option<Cache>) -> Self {
        Fetcher { fixtures: None, cache, client: Some(client), offline: false }
    }

    /// Serves cached series only.
    pub fn offline(cache: Cache) -> Self {
        Fetcher { fixtures: None, cache: Some(cache), client: None, offline: true }
    }

    /// Attaches a client that fixture or offline mode must leave untouched.
    pub fn with_client(mut self, client: Client) -> Self {
        self.client = Some(client);
        self
    }

    pub fn is_fixture_mode(&self) -> bool {
        self.fixtures.is_some()
    }

    /// HTTP requests issued by the attached client.
    pub fn network_calls(&self) -> usize {
        self.client.as_ref().map_or(0, Client::calls)
    }

    pub fn fixture_path(&self, req: &SeriesRequest) -> Option<PathBuf> {
        self.fixtures.as_ref().map(|d| d.join(format!("{}.xml", req.stem())))
    }

    pub fn fetch(&self, req: &SeriesRequest) -> Result<RawSeries> {
        req.validate()?;
        if let Some(path) = self.fixture_path(req) {
            if !path.exists() {
                return Err(IngestError::MissingFixture(path));
            }
            let s = RawSeries::from_xml(req, &std::fs::read(&path)?, Source::Fixture)?;
            s.validate()?;
            return Ok(s);
        }
        if let Some(cache) = &self.cache {
            if let Some(s) = cache.get(req)? {
                return Ok(s);
            }
        }
        if self.offline {
            return Err(IngestError::Offline(format!("{} is not cached", req.stem())));
        }
        let client = self
            .client
            .as_ref()
            .ok_or_else(|| IngestError::Offline("no client configured".into()))?;
        let s = client.fetch(req)?;
        if let Some(cache) = &self.cache {
            cache.put(&s)?;
        }
        Ok(s)
    }
}
