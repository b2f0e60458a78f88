//! The public redispatch download: semicolon-separated, German decimals,
//! local wall-clock times.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use chrono::{DateTime, Duration, FixedOffset, LocalResult, NaiveDate, NaiveDateTime, NaiveTime, Offset, TimeZone, Utc};
use chrono_tz::Europe::Berlin;
use redispatch_core::dataset::{is_german_tso, Direction, InterventionKind, InterventionRecord, Reason};
use redispatch_core::frame::format_value;
use serde::{Deserialize, Serialize};

use crate::error::{IngestError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    /// 1-based line in the file.
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParsedInterventions {
    pub records: Vec<InterventionRecord>,
    pub rejects: Vec<Reject>,
}

/// Decodes UTF-8 (BOM stripped) and falls back to Windows-1252.
pub fn decode_text(bytes: &[u8]) -> String {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    match std::str::from_utf8(bytes) {
        Ok(s) => s.to_string(),
        Err(_) => encoding_rs::WINDOWS_1252.decode_without_bom_handling(bytes).0.into_owned(),
    }
}

/// `1.234,5` → 1234.5; plain `150.5` is read as is.
pub fn parse_german_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let normalized = if s.contains(',') {
        s.replace('.', "").replace(',', ".")
    } else {
        s.to_string()
    };
    normalized.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn format_german_number(v: f64) -> String {
    format_value(v).replace('.', ",")
}

enum TimeCols {
    Combined(usize),
    Split { date: usize, time: usize },
}

struct Columns {
    start: TimeCols,
    end: TimeCols,
    zone_start: Option<usize>,
    zone_end: Option<usize>,
    reason: usize,
    direction: usize,
    mean_power: Option<usize>,
    energy: Option<usize>,
    requesting: usize,
    plant: Option<usize>,
    kind: Option<usize>,
    region: Option<usize>,
}

impl Columns {
    fn resolve(header: &csv::StringRecord) -> Result<Columns> {
        let index: HashMap<String, usize> = header
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_uppercase(), i))
            .collect();
        let get = |name: &str| index.get(name).copied();
        let need = |name: &str| get(name).ok_or_else(|| IngestError::Schema(format!("missing column {name}")));
        let time = |prefix: &str| -> Result<TimeCols> {
            if let Some(i) = get(prefix) {
                return Ok(TimeCols::Combined(i));
            }
            Ok(TimeCols::Split {
                date: need(&format!("{prefix}_DATUM"))?,
                time: need(&format!("{prefix}_UHRZEIT"))?,
            })
        };
        let cols = Columns {
            start: time("BEGINN")?,
            end: time("ENDE")?,
            zone_start: get("ZEITZONE_VON"),
            zone_end: get("ZEITZONE_BIS"),
            reason: need("GRUND_DER_MASSNAHME")?,
            direction: need("RICHTUNG")?,
            mean_power: get("MITTLERE_LEISTUNG_MW"),
            energy: get("GESAMTE_ARBEIT_MWH"),
            requesting: need("ANFORDERNDER_UENB")?,
            plant: get("BETROFFENE_ANLAGE"),
            kind: get("ART_DER_MASSNAHME").or_else(|| get("ART_DER_ANPASSUNG")),
            region: get("NETZREGION"),
        };
        if cols.mean_power.is_none() && cols.energy.is_none() {
            return Err(IngestError::Schema("missing column MITTLERE_LEISTUNG_MW or GESAMTE_ARBEIT_MWH".into()));
        }
        Ok(cols)
    }
}

fn field(rec: &csv::StringRecord, i: usize) -> &str {
    rec.get(i).unwrap_or("").trim()
}

fn zone_offset(zone: &str) -> std::result::Result<Option<FixedOffset>, String> {
    let hours = match zone.trim().to_uppercase().as_str() {
        "" => return Ok(None),
        "MEZ" | "CET" => 1,
        "MESZ" | "CEST" => 2,
        "UTC" | "GMT" | "Z" => 0,
        other => return Err(format!("unknown time zone {other:?}")),
    };
    Ok(FixedOffset::east_opt(hours * 3600))
}

fn local_datetime(date: &str, time: &str) -> std::result::Result<NaiveDateTime, String> {
    let d = NaiveDate::parse_from_str(date.trim(), "%d.%m.%Y").map_err(|_| format!("bad date {date:?}"))?;
    let time = time.trim();
    if time == "24:00" || time == "24:00:00" {
        return Ok(d.and_time(NaiveTime::MIN) + Duration::days(1));
    }
    let t = NaiveTime::parse_from_str(time, "%H:%M")
        .or_else(|_| NaiveTime::parse_from_str(time, "%H:%M:%S"))
        .map_err(|_| format!("bad time {time:?}"))?;
    Ok(d.and_time(t))
}

fn timestamp(rec: &csv::StringRecord, cols: &TimeCols, zone: Option<usize>) -> std::result::Result<DateTime<Utc>, String> {
    let local = match cols {
        TimeCols::Combined(i) => {
            let s = field(rec, *i);
            let (d, t) = s.split_once(char::is_whitespace).ok_or_else(|| format!("bad timestamp {s:?}"))?;
            local_datetime(d, t)?
        }
        TimeCols::Split { date, time } => local_datetime(field(rec, *date), field(rec, *time))?,
    };
    match zone.map(|i| zone_offset(field(rec, i))).transpose()?.flatten() {
        Some(off) => Ok(off
            .from_local_datetime(&local)
            .single()
            .ok_or("unrepresentable time")?
            .with_timezone(&Utc)),
        None => match Berlin.from_local_datetime(&local) {
            LocalResult::Single(t) => Ok(t.with_timezone(&Utc)),
            LocalResult::Ambiguous(..) => Err(format!("ambiguous local time {local} without zone")),
            LocalResult::None => Err(format!("nonexistent local time {local}")),
        },
    }
}

fn map_reason(s: &str) -> Reason {
    let s = s.to_lowercase();
    if s.contains("spannung") {
        Reason::Voltage
    } else if s.contains("strom") {
        Reason::Current
    } else {
        Reason::Other
    }
}

fn map_direction(s: &str) -> Option<Direction> {
    let s = s.to_lowercase();
    if s.contains("reduz") || s.contains("absenk") || s.contains("verringer") {
        Some(Direction::Decrease)
    } else if s.contains("erh") || s.contains("steiger") {
        Some(Direction::Increase)
    } else {
        None
    }
}

fn map_kind(text: &str) -> InterventionKind {
    let t = text.to_lowercase();
    if t.contains("countertrad") || t.contains("börse") || t.contains("boerse") {
        InterventionKind::Countertrade
    } else if t.contains("netzreserve") || t.contains("netzres") {
        InterventionKind::GridReserve
    } else {
        InterventionKind::Redispatch
    }
}

/// `DE-AT`-style border codes or German words for cross-border/foreign.
fn is_cross_border(text: &str) -> bool {
    let t = text.to_lowercase();
    if t.contains("grenz") || t.contains("ausland") {
        return true;
    }
    let b = text.as_bytes();
    b.windows(5).enumerate().any(|(i, w)| {
        let boundary = |j: usize| j >= b.len() || !b[j].is_ascii_alphanumeric();
        w[0..2].eq_ignore_ascii_case(b"DE")
            && w[2] == b'-'
            && w[3].is_ascii_uppercase()
            && w[4].is_ascii_uppercase()
            && (i == 0 || !b[i - 1].is_ascii_alphanumeric())
            && boundary(i + 5)
    })
}

fn parse_row(rec: &csv::StringRecord, cols: &Columns) -> std::result::Result<InterventionRecord, String> {
    let start = timestamp(rec, &cols.start, cols.zone_start)?;
    let end = timestamp(rec, &cols.end, cols.zone_end.or(cols.zone_start))?;
    if end <= start {
        return Err(format!("end {end} not after start {start}"));
    }
    let hours = (end - start).num_seconds() as f64 / 3600.0;
    let direction_text = field(rec, cols.direction);
    let direction = map_direction(direction_text).ok_or_else(|| format!("unknown direction {direction_text:?}"))?;
    let mean = cols.mean_power.map(|i| field(rec, i)).filter(|s| !s.is_empty());
    let power = match mean {
        Some(s) => parse_german_number(s).ok_or_else(|| format!("bad power {s:?}"))?,
        None => {
            let s = cols.energy.map(|i| field(rec, i)).unwrap_or("");
            parse_german_number(s).ok_or_else(|| format!("bad energy {s:?}"))? / hours
        }
    }
    .abs();
    let requesting_tsos: BTreeSet<String> = field(rec, cols.requesting)
        .split([',', '/'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    let plant = cols.plant.map(|i| field(rec, i)).unwrap_or("");
    let kind_text = cols.kind.map(|i| field(rec, i)).unwrap_or("");
    let reason_text = field(rec, cols.reason);
    let region = cols.region.map(|i| field(rec, i)).unwrap_or("");
    let record = InterventionRecord {
        start,
        end,
        direction,
        power_mw: power,
        kind: map_kind(&format!("{kind_text} {plant} {reason_text}")),
        reason: map_reason(reason_text),
        domestic_request: requesting_tsos.iter().any(|t| is_german_tso(t)),
        requesting_tsos,
        cross_border: is_cross_border(&format!("{kind_text} {plant} {region}")),
        plant_id: (!plant.is_empty()).then(|| plant.to_string()),
        synthetic: false,
    };
    record.validate().map_err(|e| e.to_string())?;
    Ok(record)
}

/// Parses the download. Rows that cannot be read are collected as rejects
/// and parsing carries on; a missing mandatory column fails the whole file.
pub fn parse_redispatch_csv(bytes: &[u8]) -> Result<ParsedInterventions> {
    let text = decode_text(bytes);
    if text.trim().is_empty() {
        return Ok(ParsedInterventions::default());
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b';')
        .flexible(true)
        .from_reader(text.as_bytes());
    let cols = Columns::resolve(reader.headers()?)?;
    let mut out = ParsedInterventions::default();
    for rec in reader.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                out.rejects.push(Reject { line, reason: e.to_string() });
                continue;
            }
        };
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        match parse_row(&rec, &cols) {
            Ok(r) => out.records.push(r),
            Err(reason) => out.rejects.push(Reject { line, reason }),
        }
    }
    Ok(out)
}

const HEADER: &str = "BEGINN_DATUM;BEGINN_UHRZEIT;ZEITZONE_VON;ENDE_DATUM;ENDE_UHRZEIT;ZEITZONE_BIS;\
GRUND_DER_MASSNAHME;RICHTUNG;MITTLERE_LEISTUNG_MW;GESAMTE_ARBEIT_MWH;ANFORDERNDER_UENB;BETROFFENE_ANLAGE;ART_DER_MASSNAHME";

fn local_fields(t: DateTime<Utc>) -> (String, String, &'static str) {
    let local = t.with_timezone(&Berlin);
    let zone = if local.offset().fix().local_minus_utc() == 7200 { "MESZ" } else { "MEZ" };
    (local.format("%d.%m.%Y").to_string(), local.format("%H:%M").to_string(), zone)
}

/// Writes records in the download layout with explicit zone columns.
/// Intervention times must fall on whole minutes.
pub fn render_redispatch_csv(records: &[InterventionRecord]) -> String {
    let mut s = String::new();
    s.push_str(HEADER);
    s.push('\n');
    for r in records {
        let (d0, t0, z0) = local_fields(r.start);
        let (d1, t1, z1) = local_fields(r.end);
        let reason = match r.reason {
            Reason::Current => "Strombedingter Redispatch",
            Reason::Voltage => "Spannungsbedingter Redispatch",
            Reason::Other => "Sonstiges",
        };
        let direction = match r.direction {
            Direction::Increase => "Wirkleistungseinspeisung erhöhen",
            Direction::Decrease => "Wirkleistungseinspeisung reduzieren",
        };
        let mut kind = match r.kind {
            InterventionKind::Redispatch => "Redispatch",
            InterventionKind::Countertrade => "Countertrade",
            InterventionKind::GridReserve => "Netzreserve",
        }
        .to_string();
        if r.cross_border {
            kind.push_str(" grenzüberschreitend");
        }
        let tsos: Vec<&str> = r.requesting_tsos.iter().map(String::as_str).collect();
        let _ = writeln!(
            s,
            "{d0};{t0};{z0};{d1};{t1};{z1};{reason};{direction};{};{};{};{};{kind}",
            format_german_number(r.power_mw),
            format_german_number(r.energy_mwh()),
            tsos.join(", "),
            r.plant_id.as_deref().unwrap_or(""),
        );
    }
    s
}
