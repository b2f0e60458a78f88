//! Reproducible on-disk bundles: `manifest.json`, `raw/`, `normalized/`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use redispatch_core::dataset::features::{base_columns, CONTROL_AREAS, NEIGHBOURS, OFFSHORE_AREAS, PRICE_DE};
use redispatch_core::dataset::{read_records_jsonl, write_records_jsonl, InterventionRecord, Window};
use redispatch_core::frame::{Column, FeatureMatrix, FeatureSet, Hour, Unit};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{IngestError, Result};
use crate::fetch::Fetcher;
use crate::redispatch_csv::{parse_redispatch_csv, Reject};
use crate::request::{Quantity, SeriesRequest};
use crate::series::{read_normalized_csv, Source};

pub const MANIFEST_VERSION: u32 = 1;
pub const GERMANY: &str = "DE_LU";
pub const INTERVENTIONS_FILE: &str = "interventions.jsonl";
pub const REJECTS_FILE: &str = "interventions_rejects.json";

/// Bidding zones behind one neighbour column.
pub fn zones_of(neighbour: &str) -> Vec<&'static str> {
    match neighbour {
        "DK" => vec!["DK1", "DK2"],
        "AT" => vec!["AT"],
        "CH" => vec!["CH"],
        "CZ" => vec!["CZ"],
        "FR" => vec!["FR"],
        "NL" => vec!["NL"],
        "PL" => vec!["PL"],
        other => panic!("unknown neighbour {other}"),
    }
}

/// Zone whose price stands for the neighbour.
fn price_zone(neighbour: &str) -> &'static str {
    zones_of(neighbour)[0]
}

/// Every series the base table is built from.
pub fn study_requests(window: Window) -> Vec<SeriesRequest> {
    let (s, e) = (window.start, window.end);
    let mut out = Vec::new();
    for ca in CONTROL_AREAS {
        out.push(SeriesRequest::new(Quantity::LoadForecast, ca, s, e));
        out.push(SeriesRequest::new(Quantity::WindOnshoreFc, ca, s, e));
        if OFFSHORE_AREAS.contains(&ca) {
            out.push(SeriesRequest::new(Quantity::WindOffshoreFc, ca, s, e));
        }
        out.push(SeriesRequest::new(Quantity::SolarFc, ca, s, e));
        out.push(SeriesRequest::new(Quantity::RorHydroFc, ca, s, e));
        out.push(SeriesRequest::new(Quantity::OtherGenerationFc, ca, s, e));
    }
    for n in NEIGHBOURS {
        for z in zones_of(n) {
            out.push(SeriesRequest::exchange(GERMANY, z, s, e));
            out.push(SeriesRequest::exchange(z, GERMANY, s, e));
        }
    }
    for n in NEIGHBOURS {
        out.push(SeriesRequest::new(Quantity::DayAheadPrice, price_zone(n), s, e));
    }
    out.push(SeriesRequest::new(Quantity::DayAheadPrice, GERMANY, s, e));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub stem: String,
    pub request: SeriesRequest,
    pub source: Source,
    pub points: usize,
    pub empty: bool,
    /// SHA-256 of the normalized CSV.
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub stem: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterventionsEntry {
    pub records: usize,
    pub rejects: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub window: Window,
    pub incomplete: bool,
    pub series: Vec<SeriesEntry>,
    pub gaps: Vec<Gap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interventions: Option<InterventionsEntry>,
}

impl Manifest {
    pub fn read(bundle: &Path) -> Result<Manifest> {
        let p = bundle.join("manifest.json");
        if !p.exists() {
            return Err(IngestError::Schema(format!("no manifest.json in {}", bundle.display())));
        }
        let m: Manifest = serde_json::from_slice(&fs::read(p)?)?;
        if m.version != MANIFEST_VERSION {
            return Err(IngestError::Schema(format!("unsupported bundle version {}", m.version)));
        }
        Ok(m)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Replaces `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn remove_if_exists(path: &Path) -> Result<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e.into()),
        _ => Ok(()),
    }
}

pub struct BundlePaths {
    pub root: PathBuf,
}

impl BundlePaths {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        BundlePaths { root: root.into() }
    }
    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }
    pub fn raw(&self, stem: &str) -> PathBuf {
        self.root.join("raw").join(format!("{stem}.json"))
    }
    pub fn normalized(&self, stem: &str) -> PathBuf {
        self.root.join("normalized").join(format!("{stem}.csv"))
    }
    pub fn interventions(&self) -> PathBuf {
        self.root.join("normalized").join(INTERVENTIONS_FILE)
    }
    pub fn rejects(&self) -> PathBuf {
        self.root.join("normalized").join(REJECTS_FILE)
    }
}

/// Fetches every request and writes the bundle under `out`. Series that
/// fail are listed as gaps and the bundle is marked incomplete;
/// authentication failures abort. Rewriting over an existing bundle
/// replaces files in place.
pub fn snapshot(
    fetcher: &Fetcher,
    requests: &[SeriesRequest],
    window: Window,
    redispatch_csv: Option<&[u8]>,
    out: &Path,
) -> Result<Manifest> {
    window.validate()?;
    let paths = BundlePaths::new(out);
    let mut series = Vec::new();
    let mut gaps = Vec::new();
    for req in requests {
        let stem = req.stem();
        match fetcher.fetch(req) {
            Ok(s) => {
                let mut csv = Vec::new();
                s.write_normalized_csv(&mut csv)?;
                write_atomic(&paths.raw(&stem), &serde_json::to_vec_pretty(&s)?)?;
                write_atomic(&paths.normalized(&stem), &csv)?;
                series.push(SeriesEntry {
                    stem,
                    request: req.clone(),
                    source: s.source,
                    points: s.points.len(),
                    empty: s.empty,
                    sha256: sha256_hex(&csv),
                });
            }
            Err(e @ IngestError::Auth { .. }) => return Err(e),
            Err(e) => {
                remove_if_exists(&paths.raw(&stem))?;
                remove_if_exists(&paths.normalized(&stem))?;
                gaps.push(Gap { stem, error: e.to_string() });
            }
        }
    }
    let interventions = match redispatch_csv {
        Some(bytes) => {
            let parsed = parse_redispatch_csv(bytes)?;
            let mut buf = Vec::new();
            write_records_jsonl(&mut buf, &parsed.records)?;
            write_atomic(&paths.interventions(), &buf)?;
            write_atomic(&paths.rejects(), &serde_json::to_vec_pretty(&parsed.rejects)?)?;
            Some(InterventionsEntry {
                records: parsed.records.len(),
                rejects: parsed.rejects.len(),
                sha256: sha256_hex(&buf),
            })
        }
        None => None,
    };
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        window,
        incomplete: !gaps.is_empty(),
        series,
        gaps,
        interventions,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    write_atomic(&paths.manifest(), &bytes)?;
    Ok(manifest)
}

pub fn load_interventions(bundle: &Path) -> Result<Vec<InterventionRecord>> {
    let p = BundlePaths::new(bundle).interventions();
    if !p.exists() {
        return Err(IngestError::Schema(format!("bundle {} holds no interventions", bundle.display())));
    }
    Ok(read_records_jsonl(std::io::BufReader::new(fs::File::open(p)?))?)
}

pub fn load_rejects(bundle: &Path) -> Result<Vec<Reject>> {
    let p = BundlePaths::new(bundle).rejects();
    Ok(serde_json::from_slice(&fs::read(p)?)?)
}

struct SeriesTable<'a> {
    paths: BundlePaths,
    hours: &'a [Hour],
    window: Window,
}

impl SeriesTable<'_> {
    /// Values on the window grid; hours without a point are NaN.
    fn get(&self, req: &SeriesRequest) -> Result<Vec<f64>> {
        let p = self.paths.normalized(&req.stem());
        if !p.exists() {
            return Err(IngestError::Schema(format!("series {} is missing from the bundle", req.stem())));
        }
        let (points, unit) = read_normalized_csv(fs::File::open(p)?)?;
        if unit.is_some_and(|u| u != req.quantity.unit()) {
            return Err(IngestError::Schema(format!("series {} has unit {}", req.stem(), unit.unwrap())));
        }
        let mut out = vec![f64::NAN; self.hours.len()];
        for (h, v) in points {
            if h >= self.window.start && h < self.window.end {
                out[((h - self.window.start).num_seconds() / 3600) as usize] = v;
            }
        }
        Ok(out)
    }

    fn quantity(&self, q: Quantity, area: &str) -> Result<Vec<f64>> {
        self.get(&SeriesRequest::new(q, area, self.window.start, self.window.end))
    }

    fn exchange(&self, from: &str, to: &str) -> Result<Vec<f64>> {
        self.get(&SeriesRequest::exchange(from, to, self.window.start, self.window.end))
    }
}

fn combine(acc: &mut [f64], other: &[f64], sign: f64) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += sign * b;
    }
}

/// Builds the base feature table on the hourly grid of `window`
/// (the bundle's window when `None`).
///
/// Remaining generation is total scheduled generation minus wind, solar and
/// run-of-river; flows are scheduled exports minus imports summed over the
/// neighbour's zones; price differences are neighbour minus German price.
pub fn load_base_table(bundle: &Path, window: Option<Window>) -> Result<FeatureMatrix> {
    let manifest = Manifest::read(bundle)?;
    let window = window.unwrap_or(manifest.window);
    window.validate()?;
    let hours = window.hours();
    let t = SeriesTable { paths: BundlePaths::new(bundle), hours: &hours, window };
    let price_de = t.quantity(Quantity::DayAheadPrice, GERMANY)?;
    let mut columns = Vec::new();
    for name in base_columns() {
        let values = if let Some(ca) = name.strip_prefix("load_") {
            t.quantity(Quantity::LoadForecast, ca)?
        } else if let Some(ca) = name.strip_prefix("wind_onshore_") {
            t.quantity(Quantity::WindOnshoreFc, ca)?
        } else if let Some(ca) = name.strip_prefix("wind_offshore_") {
            t.quantity(Quantity::WindOffshoreFc, ca)?
        } else if let Some(ca) = name.strip_prefix("solar_") {
            t.quantity(Quantity::SolarFc, ca)?
        } else if let Some(ca) = name.strip_prefix("hydro_") {
            t.quantity(Quantity::RorHydroFc, ca)?
        } else if let Some(ca) = name.strip_prefix("gen_rest_") {
            let mut v = t.quantity(Quantity::OtherGenerationFc, ca)?;
            combine(&mut v, &t.quantity(Quantity::WindOnshoreFc, ca)?, -1.0);
            if OFFSHORE_AREAS.contains(&ca) {
                combine(&mut v, &t.quantity(Quantity::WindOffshoreFc, ca)?, -1.0);
            }
            combine(&mut v, &t.quantity(Quantity::SolarFc, ca)?, -1.0);
            combine(&mut v, &t.quantity(Quantity::RorHydroFc, ca)?, -1.0);
            v
        } else if let Some(n) = name.strip_prefix("flow_") {
            let mut v = vec![0.0; hours.len()];
            for z in zones_of(n) {
                combine(&mut v, &t.exchange(GERMANY, z)?, 1.0);
                combine(&mut v, &t.exchange(z, GERMANY)?, -1.0);
            }
            v
        } else if let Some(n) = name.strip_prefix("price_diff_") {
            let mut v = t.quantity(Quantity::DayAheadPrice, price_zone(n))?;
            combine(&mut v, &price_de, -1.0);
            v
        } else if name == PRICE_DE {
            price_de.clone()
        } else if let Some(n) = name.strip_prefix("price_") {
            t.quantity(Quantity::DayAheadPrice, price_zone(n))?
        } else {
            unreachable!("unhandled base column {name}")
        };
        let unit = if name.starts_with("price") { Unit::EurPerMwh } else { Unit::Mw };
        columns.push(Column::new(name, unit, values));
    }
    Ok(FeatureMatrix::from_columns(hours, columns, FeatureSet::Base)?)
}

/// Renders raw documents that [`load_base_table`] turns back into `base`.
///
/// Exchanges are split into export and import legs; a two-zone neighbour
/// puts the whole flow on its first zone. Quantities in `quarter_hourly`
/// are written at 15-minute resolution.
pub fn write_fixture_set(base: &FeatureMatrix, dir: &Path, quarter_hourly: &[Quantity]) -> Result<Vec<PathBuf>> {
    use crate::xml::render_market_document;
    use chrono::Duration;

    let hours = base.hours();
    let (start, end) = match (hours.first(), hours.last()) {
        (Some(s), Some(e)) => (*s, *e + Duration::hours(1)),
        _ => return Err(IngestError::Schema("base table is empty".into())),
    };
    if hours.len() != ((end - start).num_hours()) as usize {
        return Err(IngestError::Schema("base table hours are not contiguous".into()));
    }
    let col = |name: &str| -> Result<Vec<f64>> { Ok(base.require(name)?.values.clone()) };
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for req in study_requests(Window { start, end }) {
        let values: Vec<f64> = match req.quantity {
            Quantity::LoadForecast => col(&format!("load_{}", req.area))?,
            Quantity::WindOnshoreFc => col(&format!("wind_onshore_{}", req.area))?,
            Quantity::WindOffshoreFc => col(&format!("wind_offshore_{}", req.area))?,
            Quantity::SolarFc => col(&format!("solar_{}", req.area))?,
            Quantity::RorHydroFc => col(&format!("hydro_{}", req.area))?,
            Quantity::OtherGenerationFc => {
                let ca = &req.area;
                let mut v = col(&format!("gen_rest_{ca}"))?;
                combine(&mut v, &col(&format!("wind_onshore_{ca}"))?, 1.0);
                if OFFSHORE_AREAS.contains(&ca.as_str()) {
                    combine(&mut v, &col(&format!("wind_offshore_{ca}"))?, 1.0);
                }
                combine(&mut v, &col(&format!("solar_{ca}"))?, 1.0);
                combine(&mut v, &col(&format!("hydro_{ca}"))?, 1.0);
                v
            }
            Quantity::ScheduledExchange => {
                let (zone, export) = if req.area == GERMANY {
                    (req.counterparty.clone().expect("exchange"), true)
                } else {
                    (req.area.clone(), false)
                };
                let n = NEIGHBOURS
                    .iter()
                    .find(|n| zones_of(n).contains(&zone.as_str()))
                    .expect("study zone");
                let flow = col(&format!("flow_{n}"))?;
                if price_zone(n) != zone {
                    flow.iter().map(|v| if v.is_nan() { f64::NAN } else { 0.0 }).collect()
                } else if export {
                    flow.iter().map(|v| if v.is_nan() { f64::NAN } else { v.max(0.0) }).collect()
                } else {
                    flow.iter().map(|v| if v.is_nan() { f64::NAN } else { (-v).max(0.0) }).collect()
                }
            }
            Quantity::DayAheadPrice => {
                if req.area == GERMANY {
                    col(PRICE_DE)?
                } else {
                    let n = NEIGHBOURS.iter().find(|n| price_zone(n) == req.area).expect("study zone");
                    col(&format!("price_{n}"))?
                }
            }
        };
        let xml = if quarter_hourly.contains(&req.quantity) {
            let q: Vec<f64> = values.iter().flat_map(|v| [*v; 4]).collect();
            render_market_document(start, Duration::minutes(15), &q, req.quantity.unit())
        } else {
            render_market_document(start, Duration::hours(1), &values, req.quantity.unit())
        };
        let path = dir.join(format!("{}.xml", req.stem()));
        write_atomic(&path, xml.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
