//! CSV exchange formats for attributions and interaction values.
//!
//! Attributions: `timestamp,base_value,<feature>...`, one row per sample.
//! Interactions: long form `timestamp,feature_a,feature_b,value`, one row per
//! sample and unordered pair (`feature_a` at or before `feature_b` in model
//! order, diagonal included).

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::frame::{format_hour, format_value, parse_hour, parse_value, Hour};

use super::{InteractionResult, ShapResult};

pub fn write_attributions<W: Write>(out: W, shap: &ShapResult) -> Result<()> {
    if shap.hours.len() != shap.n_samples() {
        return Err(Error::invalid("attributions lack timestamps"));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["timestamp".to_string(), "base_value".to_string()];
    header.extend(shap.feature_names.iter().cloned());
    w.write_record(&header)?;
    for (h, phi) in shap.hours.iter().zip(&shap.attributions) {
        let mut rec = vec![format_hour(h), format_value(shap.base_value)];
        rec.extend(phi.iter().map(|&v| format_value(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_attributions<R: Read>(input: R) -> Result<ShapResult> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[0] != "timestamp" || &header[1] != "base_value" {
        return Err(Error::schema("attribution CSV must start with timestamp,base_value"));
    }
    let feature_names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut hours = Vec::new();
    let mut attributions = Vec::new();
    let mut base_value = f64::NAN;
    for rec in r.records() {
        let rec = rec?;
        hours.push(parse_hour(&rec[0])?);
        base_value = parse_value(&rec[1])?;
        attributions.push(rec.iter().skip(2).map(parse_value).collect::<Result<Vec<f64>>>()?);
    }
    Ok(ShapResult {
        feature_names,
        hours,
        base_value,
        attributions,
    })
}

pub fn write_interactions<W: Write>(out: W, ir: &InteractionResult) -> Result<()> {
    if ir.hours.len() != ir.n_samples() {
        return Err(Error::invalid("interaction values lack timestamps"));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["timestamp", "feature_a", "feature_b", "value"])?;
    let n = ir.n_features();
    for (s, h) in ir.hours.iter().enumerate() {
        let ts = format_hour(h);
        for j in 0..n {
            for k in j..n {
                w.write_record([
                    ts.as_str(),
                    ir.feature_names[j].as_str(),
                    ir.feature_names[k].as_str(),
                    format_value(ir.get(s, j, k)).as_str(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the long form back. Feature order is the order of first appearance;
/// `base_value` is not part of the format and comes back as `NaN`.
pub fn read_interactions<R: Read>(input: R) -> Result<InteractionResult> {
    let mut r = csv::Reader::from_reader(input);
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut hours: Vec<Hour> = Vec::new();
    let mut entries: Vec<(usize, usize, usize, f64)> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::schema("interaction CSV rows need 4 fields"));
        }
        let h = parse_hour(&rec[0])?;
        if hours.last() != Some(&h) {
            hours.push(h);
        }
        let mut id = |name: &str| {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                names.len() - 1
            })
        };
        let a = id(&rec[1]);
        let b = id(&rec[2]);
        entries.push((hours.len() - 1, a, b, parse_value(&rec[3])?));
    }
    let n = names.len();
    let mut matrices = vec![vec![0.0; n * n]; hours.len()];
    for (s, a, b, v) in entries {
        matrices[s][a * n + b] = v;
        matrices[s][b * n + a] = v;
    }
    Ok(InteractionResult {
        feature_names: names,
        hours,
        base_value: f64::NAN,
        matrices,
    })
}
