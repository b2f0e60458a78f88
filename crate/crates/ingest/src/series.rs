use std::io::{Read, Write};

use chrono::{DateTime, Utc};
use redispatch_core::frame::{format_hour, format_value, is_hour_aligned, parse_hour, parse_value, Hour, Unit};
use serde::{Deserialize, Serialize};

use crate::error::{IngestError, Result};
use crate::request::SeriesRequest;
use crate::xml::{parse_market_document, to_hourly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Live,
    Cache,
    Fixture,
}

/// Hourly points for one request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    pub request: SeriesRequest,
    pub unit: Unit,
    pub points: Vec<(Hour, f64)>,
    pub source: Source,
    /// Set for live downloads only, so fixture runs stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fetched_at: Option<DateTime<Utc>>,
    /// The platform reported no data for the interval.
    #[serde(default)]
    pub empty: bool,
}

impl RawSeries {
    /// Builds a series from market-document bytes, clipped to the request interval.
    pub fn from_xml(request: &SeriesRequest, bytes: &[u8], source: Source) -> Result<RawSeries> {
        let doc = parse_market_document(bytes)?;
        let mut points: Vec<(Hour, f64)> = to_hourly(&doc.points)
            .into_iter()
            .filter(|(h, _)| *h >= request.start && *h < request.end)
            .collect();
        points.dedup_by_key(|p| p.0);
        let unit = doc.unit.unwrap_or(request.quantity.unit());
        if unit != request.quantity.unit() {
            return Err(IngestError::Schema(format!(
                "{} arrived in {unit}, expected {}",
                request.stem(),
                request.quantity.unit()
            )));
        }
        Ok(RawSeries {
            request: request.clone(),
            unit,
            empty: points.is_empty(),
            points,
            source,
            fetched_at: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(IngestError::Schema(format!("{}: hours not strictly increasing", self.request.stem())));
            }
        }
        if self.points.iter().any(|(h, _)| !is_hour_aligned(h)) {
            return Err(IngestError::Schema(format!("{}: point off the hour grid", self.request.stem())));
        }
        Ok(())
    }

    /// Concatenates chunked downloads of the same request.
    pub fn merge(request: &SeriesRequest, parts: Vec<RawSeries>, source: Source) -> RawSeries {
        let unit = parts.first().map_or(request.quantity.unit(), |p| p.unit);
        let mut points: Vec<(Hour, f64)> = parts.into_iter().flat_map(|p| p.points).collect();
        points.sort_by_key(|p| p.0);
        points.dedup_by_key(|p| p.0);
        RawSeries {
            request: request.clone(),
            unit,
            empty: points.is_empty(),
            points,
            source,
            fetched_at: None,
        }
    }

    /// `hour_utc,value,unit`.
    pub fn write_normalized_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["hour_utc", "value", "unit"])?;
        for (h, v) in &self.points {
            w.write_record([format_hour(h), format_value(*v), self.unit.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a `hour_utc,value,unit` file back into points and unit.
pub fn read_normalized_csv<R: Read>(input: R) -> Result<(Vec<(Hour, f64)>, Option<Unit>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["hour_utc", "value", "unit"] {
        return Err(IngestError::Schema("normalized series header must be hour_utc,value,unit".into()));
    }
    let mut points = Vec::new();
    let mut unit = None;
    for rec in r.records() {
        let rec = rec?;
        points.push((parse_hour(&rec[0])?, parse_value(&rec[1])?));
        let u: Unit = rec[2].parse()?;
        if unit.is_some_and(|x| x != u) {
            return Err(IngestError::Schema("mixed units in normalized series".into()));
        }
        unit = Some(u);
    }
    Ok((points, unit))
}
