//! From intervention records and day-ahead series to a regression table.
//!
//! The chain is [`filter_records`] → [`complete_cross_border`] →
//! [`hourly_volume`] for the target and [`engineer_features`] for the inputs,
//! joined by [`assemble`].

mod assemble;
pub mod features;
mod records;
mod target;

use std::io::{Read, Write};

pub use assemble::{assemble, interpolate_gaps, ColumnProvenance, Provenance, DEFAULT_MAX_GAP_HOURS};
pub use features::{add_engineered_columns, derive_column, engineer_features, features_of};
pub use records::{
    complete_cross_border, filter_records, is_german_tso, read_records_jsonl, write_records_jsonl,
    Direction, InterventionKind, InterventionRecord, Reason, GERMAN_TSOS,
};
pub use target::{hourly_volume, HourlyTarget, Window};

use crate::error::{Error, Result};
use crate::frame::{format_hour, format_value, parse_hour, parse_value, Column, Dataset, FeatureMatrix, FeatureSet};

/// Writes `hour,volume,<feature>…` with UTC timestamps.
pub fn write_dataset_csv<W: Write>(out: W, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["hour".to_string(), "volume".to_string()];
    header.extend(data.features.names());
    w.write_record(&header)?;
    for i in 0..data.len() {
        let mut rec = vec![format_hour(&data.hours()[i]), format_value(data.target[i])];
        rec.extend(data.features.columns().iter().map(|c| format_value(c.values[i])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_dataset_csv`]; units follow the column names.
pub fn read_dataset_csv<R: Read>(input: R, feature_set: FeatureSet) -> Result<Dataset> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[0] != "hour" || &header[1] != "volume" {
        return Err(Error::schema("dataset header must start with hour,volume"));
    }
    let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut hours = Vec::new();
    let mut target = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for rec in r.records() {
        let rec = rec?;
        hours.push(parse_hour(&rec[0])?);
        target.push(parse_value(&rec[1])?);
        for (j, v) in values.iter_mut().enumerate() {
            v.push(parse_value(&rec[j + 2])?);
        }
    }
    let cols = names
        .into_iter()
        .zip(values)
        .map(|(n, v)| Column::new(n.clone(), features::unit_for(&n), v))
        .collect();
    Dataset::new(FeatureMatrix::from_columns(hours, cols, feature_set)?, target)
}
