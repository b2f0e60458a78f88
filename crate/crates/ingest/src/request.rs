use std::fmt;
use std::str::FromStr;

use chrono::Duration;
use redispatch_core::frame::{is_hour_aligned, Hour, Unit};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{IngestError, Result};

/// Day-ahead quantities pulled from the transparency platform.
///
/// `OtherGenerationFc` fetches the total scheduled generation of an area;
/// the dispatchable remainder is derived when the base table is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    LoadForecast,
    WindOnshoreFc,
    WindOffshoreFc,
    SolarFc,
    RorHydroFc,
    OtherGenerationFc,
    ScheduledExchange,
    DayAheadPrice,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::LoadForecast,
        Quantity::WindOnshoreFc,
        Quantity::WindOffshoreFc,
        Quantity::SolarFc,
        Quantity::RorHydroFc,
        Quantity::OtherGenerationFc,
        Quantity::ScheduledExchange,
        Quantity::DayAheadPrice,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::LoadForecast => "load_forecast",
            Quantity::WindOnshoreFc => "wind_onshore_fc",
            Quantity::WindOffshoreFc => "wind_offshore_fc",
            Quantity::SolarFc => "solar_fc",
            Quantity::RorHydroFc => "ror_hydro_fc",
            Quantity::OtherGenerationFc => "other_generation_fc",
            Quantity::ScheduledExchange => "scheduled_exchange",
            Quantity::DayAheadPrice => "day_ahead_price",
        }
    }

    pub fn unit(self) -> Unit {
        match self {
            Quantity::DayAheadPrice => Unit::EurPerMwh,
            _ => Unit::Mw,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| IngestError::Request(format!("unknown quantity {s:?}")))
    }
}

/// Control areas and bidding zones with their EIC codes.
pub const AREAS: [(&str, &str); 13] = [
    ("50hertz", "10YDE-VE-------2"),
    ("amprion", "10YDE-RWENET---I"),
    ("tennet", "10YDE-EON------1"),
    ("transnet", "10YDE-ENBW-----N"),
    ("DE_LU", "10Y1001A1001A82H"),
    ("AT", "10YAT-APG------L"),
    ("CH", "10YCH-SWISSGRIDZ"),
    ("CZ", "10YCZ-CEPS-----N"),
    ("DK1", "10YDK-1--------W"),
    ("DK2", "10YDK-2--------M"),
    ("FR", "10YFR-RTE------C"),
    ("NL", "10YNL----------L"),
    ("PL", "10YPL-AREA-----S"),
];

pub fn eic(area: &str) -> Result<&'static str> {
    AREAS
        .iter()
        .find(|(a, _)| *a == area)
        .map(|(_, e)| *e)
        .ok_or_else(|| IngestError::Request(format!("unknown area {area:?}")))
}

/// One hourly series over `[start, end)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeriesRequest {
    pub quantity: Quantity,
    pub area: String,
    /// Receiving area of a scheduled exchange (flow `area` → `counterparty`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterparty: Option<String>,
    pub start: Hour,
    pub end: Hour,
}

impl SeriesRequest {
    pub fn new(quantity: Quantity, area: &str, start: Hour, end: Hour) -> Self {
        SeriesRequest {
            quantity,
            area: area.to_string(),
            counterparty: None,
            start,
            end,
        }
    }

    pub fn exchange(from: &str, to: &str, start: Hour, end: Hour) -> Self {
        SeriesRequest {
            counterparty: Some(to.to_string()),
            ..SeriesRequest::new(Quantity::ScheduledExchange, from, start, end)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !is_hour_aligned(&self.start) || !is_hour_aligned(&self.end) {
            return Err(IngestError::Request("interval must be aligned to hours".into()));
        }
        if self.end <= self.start {
            return Err(IngestError::Request("interval is empty".into()));
        }
        eic(&self.area)?;
        match (&self.counterparty, self.quantity) {
            (Some(c), Quantity::ScheduledExchange) => {
                eic(c)?;
            }
            (None, Quantity::ScheduledExchange) => {
                return Err(IngestError::Request("scheduled exchange needs a counterparty".into()))
            }
            (Some(_), _) => {
                return Err(IngestError::Request("only scheduled exchanges take a counterparty".into()))
            }
            (None, _) => {}
        }
        Ok(())
    }

    /// `quantity__area[__counterparty]`, used for fixture and bundle file names.
    pub fn stem(&self) -> String {
        match &self.counterparty {
            Some(c) => format!("{}__{}__{}", self.quantity, self.area, c),
            None => format!("{}__{}", self.quantity, self.area),
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn cache_key(&self) -> String {
        let canonical = serde_json::to_string(self).expect("request serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn n_hours(&self) -> usize {
        ((self.end - self.start).num_seconds() / 3600) as usize
    }

    /// Splits the interval into consecutive pieces of at most `days` days.
    pub fn chunks(&self, days: i64) -> Vec<SeriesRequest> {
        let mut out = Vec::new();
        let mut s = self.start;
        while s < self.end {
            let e = (s + Duration::days(days)).min(self.end);
            out.push(SeriesRequest { start: s, end: e, ..self.clone() });
            s = e;
        }
        out
    }
}
