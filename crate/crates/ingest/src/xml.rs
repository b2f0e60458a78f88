//! Transparency-platform market documents: parsing and rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{DateTime, Duration, NaiveDateTime, Utc};
use quick_xml::events::Event;
use quick_xml::Reader;
use redispatch_core::frame::{Hour, Unit};

use crate::error::{IngestError, Result};

/// Points of one document at native resolution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MarketDocument {
    pub points: Vec<(Hour, f64)>,
    pub unit: Option<Unit>,
    /// Reason text when the platform answered with an acknowledgement
    /// instead of data.
    pub acknowledgement: Option<String>,
}

#[derive(Default)]
struct Period {
    start: Option<Hour>,
    end: Option<Hour>,
    step: Option<Duration>,
    points: Vec<(u32, f64)>,
}

#[derive(Default)]
struct PointBuf {
    position: Option<u32>,
    value: Option<f64>,
}

fn xml_err(offset: u64, message: impl Into<String>) -> IngestError {
    IngestError::Xml { offset, message: message.into() }
}

fn parse_time(s: &str) -> Option<Hour> {
    let s = s.trim();
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .ok()
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%MZ").ok().map(|t| t.and_utc()))
}

fn parse_resolution(s: &str) -> Option<Duration> {
    let s = s.trim();
    if let Some(m) = s.strip_prefix("PT").and_then(|r| r.strip_suffix('M')) {
        return m.parse().ok().filter(|m| *m > 0).map(Duration::minutes);
    }
    if let Some(h) = s.strip_prefix("PT").and_then(|r| r.strip_suffix('H')) {
        return h.parse().ok().filter(|h| *h > 0).map(Duration::hours);
    }
    if s == "P1D" {
        return Some(Duration::days(1));
    }
    None
}

fn unit_of(quantity_unit: Option<&str>, currency: Option<&str>) -> Option<Unit> {
    match (quantity_unit, currency) {
        (_, Some("EUR")) => Some(Unit::EurPerMwh),
        (Some("MAW"), _) => Some(Unit::Mw),
        (Some("MWH"), _) => Some(Unit::Mwh),
        _ => None,
    }
}

/// Parses a GL/Publication market document or an acknowledgement.
///
/// Periods with curve type A03 omit repeated values; missing positions take
/// the previous point's value.
pub fn parse_market_document(bytes: &[u8]) -> Result<MarketDocument> {
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();
    let mut path: Vec<String> = Vec::new();
    let mut doc = MarketDocument::default();
    let mut root: Option<String> = None;
    let mut curve_a03 = false;
    let mut quantity_unit: Option<String> = None;
    let mut currency: Option<String> = None;
    let mut period = Period::default();
    let mut point = PointBuf::default();
    let mut ack_text: Vec<String> = Vec::new();

    loop {
        let offset = reader.buffer_position();
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| xml_err(reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(e) => {
                let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
                if root.is_none() {
                    root = Some(name.clone());
                }
                match name.as_str() {
                    "TimeSeries" => {
                        curve_a03 = false;
                        quantity_unit = None;
                        currency = None;
                    }
                    "Period" => period = Period::default(),
                    "Point" => point = PointBuf::default(),
                    _ => {}
                }
                path.push(name);
            }
            Event::End(_) => {
                let name = path.pop().unwrap_or_default();
                match name.as_str() {
                    "Point" => {
                        let pos = point.position.ok_or_else(|| xml_err(offset, "point without position"))?;
                        let v = point.value.ok_or_else(|| xml_err(offset, "point without value"))?;
                        period.points.push((pos, v));
                    }
                    "Period" => {
                        let start = period.start.ok_or_else(|| xml_err(offset, "period without start"))?;
                        let end = period.end.ok_or_else(|| xml_err(offset, "period without end"))?;
                        let step = period.step.ok_or_else(|| xml_err(offset, "period without resolution"))?;
                        let slots = ((end - start).num_seconds() / step.num_seconds()).max(0) as u32;
                        let mut by_pos: BTreeMap<u32, f64> = BTreeMap::new();
                        for (p, v) in period.points.drain(..) {
                            if p == 0 || p > slots {
                                return Err(xml_err(offset, format!("position {p} outside 1..={slots}")));
                            }
                            by_pos.insert(p, v);
                        }
                        if curve_a03 {
                            let mut last = None;
                            for p in 1..=slots {
                                if let Some(v) = by_pos.get(&p) {
                                    last = Some(*v);
                                }
                                if let Some(v) = last {
                                    doc.points.push((start + step * (p as i32 - 1), v));
                                }
                            }
                        } else {
                            for (p, v) in by_pos {
                                doc.points.push((start + step * (p as i32 - 1), v));
                            }
                        }
                    }
                    "TimeSeries" => {
                        if let Some(u) = unit_of(quantity_unit.as_deref(), currency.as_deref()) {
                            if doc.unit.is_some_and(|d| d != u) {
                                return Err(xml_err(offset, "time series with mixed units"));
                            }
                            doc.unit = Some(u);
                        }
                    }
                    _ => {}
                }
            }
            Event::Text(t) => {
                let text = t
                    .decode()
                    .map_err(|e| xml_err(offset, e.to_string()))?
                    .into_owned();
                let leaf = path.last().map(String::as_str).unwrap_or("");
                let parent = path.len().checked_sub(2).map(|i| path[i].as_str()).unwrap_or("");
                let number = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| xml_err(offset, format!("bad number {s:?} in <{leaf}>")))
                };
                match (parent, leaf) {
                    ("Point", "position") => {
                        point.position = Some(
                            text.trim()
                                .parse()
                                .map_err(|_| xml_err(offset, format!("bad position {text:?}")))?,
                        )
                    }
                    ("Point", "quantity") | ("Point", "price.amount") => point.value = Some(number(&text)?),
                    ("timeInterval", "start") if path.iter().any(|p| p == "Period") => {
                        period.start = Some(parse_time(&text).ok_or_else(|| xml_err(offset, format!("bad time {text:?}")))?)
                    }
                    ("timeInterval", "end") if path.iter().any(|p| p == "Period") => {
                        period.end = Some(parse_time(&text).ok_or_else(|| xml_err(offset, format!("bad time {text:?}")))?)
                    }
                    ("Period", "resolution") => {
                        period.step = Some(
                            parse_resolution(&text).ok_or_else(|| xml_err(offset, format!("bad resolution {text:?}")))?,
                        )
                    }
                    ("TimeSeries", "curveType") => curve_a03 = text.trim() == "A03",
                    ("TimeSeries", "quantity_Measure_Unit.name") => quantity_unit = Some(text.trim().to_string()),
                    ("TimeSeries", "currency_Unit.name") => currency = Some(text.trim().to_string()),
                    ("Reason", "text") => ack_text.push(text.trim().to_string()),
                    _ => {}
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !path.is_empty() {
        return Err(xml_err(reader.buffer_position(), format!("unclosed <{}>", path.last().unwrap())));
    }
    match root.as_deref() {
        Some("Acknowledgement_MarketDocument") => {
            doc.acknowledgement = Some(ack_text.join("; "));
        }
        Some(_) => {}
        None => return Err(xml_err(0, "empty document")),
    }
    doc.points.sort_by_key(|p| p.0);
    Ok(doc)
}

/// Hourly means of sub-hourly points; hourly points pass through unchanged.
pub fn to_hourly(points: &[(Hour, f64)]) -> Vec<(Hour, f64)> {
    let mut acc: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for (t, v) in points {
        let e = acc.entry(t.timestamp().div_euclid(3600)).or_default();
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(h, (s, n))| (DateTime::from_timestamp(h * 3600, 0).expect("in range"), s / n as f64))
        .collect()
}

fn fmt_time(t: &Hour) -> String {
    t.format("%Y-%m-%dT%H:%MZ").to_string()
}

/// Renders evenly spaced points as a single-period market document.
/// Values are written in shortest round-trip form; non-finite values leave
/// their position out.
pub fn render_market_document(start: Hour, step: Duration, values: &[f64], unit: Unit) -> String {
    let end = start + step * values.len() as i32;
    let (root, ns, unit_xml, value_tag) = match unit {
        Unit::EurPerMwh => (
            "Publication_MarketDocument",
            "urn:iec62325.351:tc57wg16:451-3:publicationdocument:7:0",
            "<currency_Unit.name>EUR</currency_Unit.name>\n    <price_Measure_Unit.name>MWH</price_Measure_Unit.name>",
            "price.amount",
        ),
        _ => (
            "GL_MarketDocument",
            "urn:iec62325.351:tc57wg16:451-6:generationloaddocument:3:0",
            "<quantity_Measure_Unit.name>MAW</quantity_Measure_Unit.name>",
            "quantity",
        ),
    };
    let res = format!("PT{}M", step.num_minutes());
    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(s, "<{root} xmlns=\"{ns}\">");
    let _ = writeln!(s, "  <TimeSeries>\n    <mRID>1</mRID>\n    <curveType>A01</curveType>\n    {unit_xml}");
    let _ = writeln!(
        s,
        "    <Period>\n      <timeInterval>\n        <start>{}</start>\n        <end>{}</end>\n      </timeInterval>\n      <resolution>{res}</resolution>",
        fmt_time(&start),
        fmt_time(&end)
    );
    for (i, v) in values.iter().enumerate().filter(|(_, v)| v.is_finite()) {
        let _ = writeln!(s, "      <Point>\n        <position>{}</position>\n        <{value_tag}>{v}</{value_tag}>\n      </Point>", i + 1);
    }
    let _ = writeln!(s, "    </Period>\n  </TimeSeries>\n</{root}>");
    s
}

pub fn render_acknowledgement(reason: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<Acknowledgement_MarketDocument xmlns=\"urn:iec62325.351:tc57wg16:451-1:acknowledgementdocument:7:0\">\n  <Reason>\n    <code>999</code>\n    <text>{reason}</text>\n  </Reason>\n</Acknowledgement_MarketDocument>\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn t0() -> Hour {
        Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap()
    }

    #[test]
    fn quarter_hours_average_to_hours() {
        let xml = render_market_document(t0(), Duration::minutes(15), &[25.0, 50.0, 75.0, 100.0, 1.0, 1.0, 1.0, 1.0], Unit::Mw);
        let doc = parse_market_document(xml.as_bytes()).unwrap();
        assert_eq!(doc.unit, Some(Unit::Mw));
        assert_eq!(doc.points.len(), 8);
        assert_eq!(to_hourly(&doc.points), vec![(t0(), 62.5), (t0() + Duration::hours(1), 1.0)]);
    }

    #[test]
    fn round_trip_is_exact() {
        let v = [0.1 + 0.2, -1e-7, 12345.678901234567, 0.0];
        let xml = render_market_document(t0(), Duration::hours(1), &v, Unit::EurPerMwh);
        let doc = parse_market_document(xml.as_bytes()).unwrap();
        assert_eq!(doc.unit, Some(Unit::EurPerMwh));
        assert_eq!(doc.points.iter().map(|p| p.1).collect::<Vec<_>>(), v);
    }

    #[test]
    fn a03_positions_are_forward_filled() {
        let xml = render_market_document(t0(), Duration::hours(1), &[5.0, 6.0, 7.0, 8.0], Unit::Mw)
            .replace("A01", "A03")
            .replace("<Point>\n        <position>2</position>\n        <quantity>6</quantity>\n      </Point>\n", "");
        let doc = parse_market_document(xml.as_bytes()).unwrap();
        assert_eq!(doc.points.iter().map(|p| p.1).collect::<Vec<_>>(), vec![5.0, 5.0, 7.0, 8.0]);
    }

    #[test]
    fn acknowledgement_is_empty_with_reason() {
        let doc = parse_market_document(render_acknowledgement("No matching data found").as_bytes()).unwrap();
        assert!(doc.points.is_empty());
        assert_eq!(doc.acknowledgement.as_deref(), Some("No matching data found"));
    }

    #[test]
    fn malformed_reports_offset() {
        let xml = render_market_document(t0(), Duration::hours(1), &[1.0, 2.0], Unit::Mw);
        let broken = xml.replace("<quantity>2</quantity>", "<quantity>2x</quantity>");
        match parse_market_document(broken.as_bytes()) {
            Err(IngestError::Xml { offset, message }) => {
                assert!(offset > 0 && (offset as usize) < broken.len(), "{offset}");
                assert!(message.contains("2x"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let truncated = &xml.as_bytes()[..xml.len() / 2];
        assert!(matches!(parse_market_document(truncated), Err(IngestError::Xml { .. })));
    }
}
