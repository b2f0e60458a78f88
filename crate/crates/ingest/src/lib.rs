//! Data acquisition: day-ahead series from the transparency platform, the
//! public redispatch download, and reproducible on-disk bundles.

pub mod cache;
pub mod client;
pub mod error;
pub mod fetch;
pub mod redispatch_csv;
pub mod request;
pub mod series;
pub mod snapshot;
pub mod xml;

pub use cache::Cache;
pub use client::{Client, ClientConfig, HttpResponse, Transport};
pub use error::{IngestError, Result};
pub use fetch::Fetcher;
pub use request::{Quantity, SeriesRequest};
pub use series::{RawSeries, Source};
pub use redispatch_csv::{parse_redispatch_csv, render_redispatch_csv, ParsedInterventions, Reject};
pub use snapshot::{load_base_table, load_interventions, snapshot, study_requests, write_fixture_set, Manifest};
