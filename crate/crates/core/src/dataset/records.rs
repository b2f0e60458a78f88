use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Hour;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increase,
    Decrease,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::Increase => Direction::Decrease,
            Direction::Decrease => Direction::Increase,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterventionKind {
    Redispatch,
    Countertrade,
    GridReserve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Current,
    Voltage,
    Other,
}

/// Control-area operators of the German transmission grid.
pub const GERMAN_TSOS: [&str; 4] = ["50Hertz", "Amprion", "TenneT DE", "TransnetBW"];

/// Case-insensitive match against [`GERMAN_TSOS`]; a bare "TenneT" counts as German.
pub fn is_german_tso(name: &str) -> bool {
    let n = name.trim().to_lowercase();
    n == "tennet" || GERMAN_TSOS.iter().any(|t| t.to_lowercase() == n)
}

/// One redispatch, countertrade or grid-reserve activation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterventionRecord {
    pub start: Hour,
    pub end: Hour,
    pub direction: Direction,
    /// Mean power over the span, MW.
    pub power_mw: f64,
    pub kind: InterventionKind,
    pub reason: Reason,
    pub requesting_tsos: BTreeSet<String>,
    /// True when at least one German operator requested the measure.
    pub domestic_request: bool,
    pub cross_border: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant_id: Option<String>,
    /// Set on mirror records added by [`complete_cross_border`].
    #[serde(default)]
    pub synthetic: bool,
}

impl InterventionRecord {
    pub fn validate(&self) -> Result<()> {
        if self.end <= self.start {
            return Err(Error::invalid(format!(
                "intervention ends ({}) at or before it starts ({})",
                self.end, self.start
            )));
        }
        if !(self.power_mw.is_finite() && self.power_mw >= 0.0) {
            return Err(Error::invalid(format!("invalid power {}", self.power_mw)));
        }
        Ok(())
    }

    pub fn duration_hours(&self) -> f64 {
        (self.end - self.start).num_seconds() as f64 / 3600.0
    }

    pub fn energy_mwh(&self) -> f64 {
        self.power_mw * self.duration_hours()
    }

    fn is_mirrorable(&self) -> bool {
        !self.synthetic && self.cross_border && self.kind == InterventionKind::Countertrade
    }

    fn mirror(&self) -> InterventionRecord {
        InterventionRecord {
            direction: self.direction.opposite(),
            synthetic: true,
            plant_id: None,
            ..self.clone()
        }
    }
}

/// Keeps interventions that at least one German operator requested for
/// current (thermal) reasons. Grid-reserve activations pass like any other kind.
pub fn filter_records(records: Vec<InterventionRecord>) -> Vec<InterventionRecord> {
    records
        .into_iter()
        .filter(|r| r.domestic_request && r.reason == Reason::Current)
        .collect()
}

type MirrorKey = (Hour, Hour, u64, Direction);

fn mirror_key(r: &InterventionRecord) -> MirrorKey {
    (r.start, r.end, r.power_mw.to_bits(), r.direction)
}

/// Appends an opposite-direction synthetic record for every cross-border
/// countertrade, standing in for the unreported foreign-side measure.
///
/// Countertrades that already have a synthetic mirror in the input are left
/// alone, so applying this twice changes nothing.
pub fn complete_cross_border(records: Vec<InterventionRecord>) -> Vec<InterventionRecord> {
    let mut existing: HashMap<MirrorKey, usize> = HashMap::new();
    for r in records.iter().filter(|r| r.synthetic) {
        *existing.entry(mirror_key(r)).or_default() += 1;
    }
    let mut mirrors = Vec::new();
    for r in records.iter().filter(|r| r.is_mirrorable()) {
        let m = r.mirror();
        match existing.get_mut(&mirror_key(&m)) {
            Some(n) if *n > 0 => *n -= 1,
            _ => mirrors.push(m),
        }
    }
    let mut out = records;
    out.extend(mirrors);
    out
}

pub fn write_records_jsonl<W: Write>(mut out: W, records: &[InterventionRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records_jsonl<R: BufRead>(input: R) -> Result<Vec<InterventionRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: InterventionRecord = serde_json::from_str(&line)
            .map_err(|e| Error::invalid(format!("line {}: {e}", i + 1)))?;
        r.validate().map_err(|e| Error::invalid(format!("line {}: {e}", i + 1)))?;
        out.push(r);
    }
    Ok(out)
}
