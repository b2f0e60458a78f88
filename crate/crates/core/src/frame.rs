//! Hour-indexed feature tables.
//!
//! A [`FeatureMatrix`] is column-major: every column is a named, unit-tagged
//! vector of `f64` sharing one UTC hour index. Missing values are `NaN`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A UTC timestamp aligned to the start of an hour.
pub type Hour = DateTime<Utc>;

/// Physical unit of a feature column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Mw,
    Mwh,
    EurPerMwh,
    Dimensionless,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Mw => "MW",
            Unit::Mwh => "MWh",
            Unit::EurPerMwh => "EUR/MWh",
            Unit::Dimensionless => "1",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "MW" => Ok(Unit::Mw),
            "MWh" => Ok(Unit::Mwh),
            "EUR/MWh" => Ok(Unit::EurPerMwh),
            "1" => Ok(Unit::Dimensionless),
            other => Err(Error::invalid(format!("unknown unit {other:?}"))),
        }
    }
}

/// Which family of columns a matrix carries.
///
/// `Base` is the raw ingest table before any selection; the three model sets
/// are derived from it by [`crate::dataset::engineer_features`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    Base,
    Full,
    Engineered,
    Reduced,
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(FeatureSet::Base),
            "full" => Ok(FeatureSet::Full),
            "engineered" => Ok(FeatureSet::Engineered),
            "reduced" => Ok(FeatureSet::Reduced),
            other => Err(Error::invalid(format!("unknown feature set {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: Unit,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: Unit, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            unit,
            values,
        }
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    hours: Vec<Hour>,
    columns: Vec<Column>,
    feature_set: FeatureSet,
}

impl FeatureMatrix {
    /// An empty table over `hours`. Hours must be unique.
    pub fn new(hours: Vec<Hour>, feature_set: FeatureSet) -> Result<Self> {
        let mut seen = HashSet::with_capacity(hours.len());
        for h in &hours {
            if !seen.insert(*h) {
                return Err(Error::invalid(format!("duplicate hour {h}")));
            }
        }
        Ok(FeatureMatrix {
            hours,
            columns: Vec::new(),
            feature_set,
        })
    }

    pub fn from_columns(hours: Vec<Hour>, columns: Vec<Column>, feature_set: FeatureSet) -> Result<Self> {
        let mut m = FeatureMatrix::new(hours, feature_set)?;
        for c in columns {
            m.push_column(c)?;
        }
        Ok(m)
    }

    /// Builds a table indexed by consecutive hours from a fixed epoch.
    /// Convenient for synthetic data where timestamps carry no meaning.
    pub fn from_unindexed(columns: Vec<Column>) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.values.len());
        let epoch = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
        FeatureMatrix::from_columns(hourly_index(epoch, n), columns, FeatureSet::Base)
    }

    pub fn push_column(&mut self, column: Column) -> Result<()> {
        if column.values.len() != self.hours.len() {
            return Err(Error::invalid(format!(
                "column {} has {} values, index has {} hours",
                column.name,
                column.values.len(),
                self.hours.len()
            )));
        }
        if self.column_index(&column.name).is_some() {
            return Err(Error::invalid(format!("duplicate column {}", column.name)));
        }
        self.columns.push(column);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.hours.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn hours(&self) -> &[Hour] {
        &self.hours
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn feature_set(&self) -> FeatureSet {
        self.feature_set
    }

    pub fn set_feature_set(&mut self, feature_set: FeatureSet) {
        self.feature_set = feature_set;
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Like [`column`](Self::column) but a schema error names the absent column.
    pub fn require(&self, name: &str) -> Result<&Column> {
        self.column(name)
            .ok_or_else(|| Error::schema(format!("missing column {name}")))
    }

    pub fn column_mut(&mut self, name: &str) -> Option<&mut Column> {
        self.columns.iter_mut().find(|c| c.name == name)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }

    /// Maps each of `names` to its column index, failing on the first absent name.
    pub fn resolve(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| Error::schema(format!("missing column {n}")))
            })
            .collect()
    }

    /// Projection onto `names`, in that order.
    pub fn select(&self, names: &[String]) -> Result<FeatureMatrix> {
        let idx = self.resolve(names)?;
        Ok(FeatureMatrix {
            hours: self.hours.clone(),
            columns: idx.iter().map(|&i| self.columns[i].clone()).collect(),
            feature_set: self.feature_set,
        })
    }

    pub fn without(&self, name: &str) -> FeatureMatrix {
        FeatureMatrix {
            hours: self.hours.clone(),
            columns: self.columns.iter().filter(|c| c.name != name).cloned().collect(),
            feature_set: self.feature_set,
        }
    }

    pub fn take_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            hours: rows.iter().map(|&r| self.hours[r]).collect(),
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    unit: c.unit,
                    values: rows.iter().map(|&r| c.values[r]).collect(),
                })
                .collect(),
            feature_set: self.feature_set,
        }
    }
}

/// `n` consecutive hours starting at `start`.
pub fn hourly_index(start: Hour, n: usize) -> Vec<Hour> {
    (0..n).map(|i| start + Duration::hours(i as i64)).collect()
}

/// ISO-8601 UTC, e.g. `2021-06-01T10:00:00Z`.
pub fn format_hour(h: &Hour) -> String {
    h.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

pub fn parse_hour(s: &str) -> Result<Hour> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::invalid(format!("bad timestamp {s:?}: {e}")))
}

/// Shortest round-trip decimal form; missing values become an empty field.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

pub fn parse_value(s: &str) -> Result<f64> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(f64::NAN);
    }
    s.parse()
        .map_err(|_| Error::invalid(format!("bad number {s:?}")))
}

pub fn is_hour_aligned(t: &Hour) -> bool {
    t.timestamp().rem_euclid(3600) == 0 && t.timestamp_subsec_nanos() == 0
}

/// Regression inputs and target sharing one hour index.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: FeatureMatrix,
    pub target: Vec<f64>,
}

impl Dataset {
    pub fn new(features: FeatureMatrix, target: Vec<f64>) -> Result<Self> {
        if features.n_rows() != target.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} target values",
                features.n_rows(),
                target.len()
            )));
        }
        Ok(Dataset { features, target })
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn hours(&self) -> &[Hour] {
        self.features.hours()
    }

    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.take_rows(rows),
            target: rows.iter().map(|&r| self.target[r]).collect(),
        }
    }

    pub fn select(&self, names: &[String]) -> Result<Dataset> {
        Ok(Dataset {
            features: self.features.select(names)?,
            target: self.target.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_columns_and_hours_rejected() {
        let h = hourly_index(Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap(), 2);
        let mut m = FeatureMatrix::new(h.clone(), FeatureSet::Base).unwrap();
        m.push_column(Column::new("a", Unit::Mw, vec![1.0, 2.0])).unwrap();
        assert!(m.push_column(Column::new("a", Unit::Mw, vec![1.0, 2.0])).is_err());
        assert!(m.push_column(Column::new("b", Unit::Mw, vec![1.0])).is_err());
        assert!(FeatureMatrix::new(vec![h[0], h[0]], FeatureSet::Base).is_err());
    }

    #[test]
    fn select_names_missing_column() {
        let m = FeatureMatrix::from_unindexed(vec![Column::new("a", Unit::Mw, vec![1.0])]).unwrap();
        let err = m.select(&["b".to_string()]).unwrap_err();
        assert!(matches!(err, Error::SchemaMismatch(ref s) if s.contains('b')));
    }
}
