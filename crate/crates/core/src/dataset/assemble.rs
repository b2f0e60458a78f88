use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{hourly_index, Column, Dataset, FeatureMatrix, Hour, Unit};

use super::HourlyTarget;

pub const DEFAULT_MAX_GAP_HOURS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnProvenance {
    pub name: String,
    pub unit: Unit,
    /// Missing among joined hours before gap filling.
    pub missing: usize,
    pub interpolated: usize,
    /// Still missing after gap filling; each such hour drops its row.
    pub unfilled: usize,
}

/// Bookkeeping for one [`assemble`] call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub target_rows: usize,
    pub feature_rows: usize,
    pub joined_rows: usize,
    pub kept_rows: usize,
    pub dropped_rows: usize,
    pub max_gap_hours: usize,
    pub columns: Vec<ColumnProvenance>,
}

/// Fills interior runs of at most `max_gap` missing values by linear
/// interpolation between the finite neighbours. Returns the filled positions.
pub fn interpolate_gaps(values: &mut [f64], max_gap: usize) -> Vec<usize> {
    let mut filled = Vec::new();
    let n = values.len();
    let mut i = 0;
    while i < n {
        if !values[i].is_nan() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && values[i].is_nan() {
            i += 1;
        }
        let len = i - start;
        if start == 0 || i == n || len > max_gap {
            continue;
        }
        let (a, b) = (values[start - 1], values[i]);
        if !(a.is_finite() && b.is_finite()) {
            continue;
        }
        for (k, v) in values[start..i].iter_mut().enumerate() {
            let t = (k + 1) as f64 / (len + 1) as f64;
            *v = a + (b - a) * t;
            filled.push(start + k);
        }
    }
    filled
}

/// Joins target and features on the hour.
///
/// Features are laid out on a contiguous hourly grid first, so hours absent
/// from the feature table count as missing and can be gap-filled. Rows with
/// any value still missing are dropped.
pub fn assemble(target: &HourlyTarget, features: &FeatureMatrix, max_gap_hours: usize) -> Result<(Dataset, Provenance)> {
    if target.hours.len() != target.volume.len() {
        return Err(Error::invalid("target hours and volumes differ in length"));
    }
    let (grid, grid_pos) = if features.n_rows() == 0 {
        (Vec::new(), HashMap::new())
    } else {
        let lo = *features.hours().iter().min().unwrap();
        let hi = *features.hours().iter().max().unwrap();
        let n = ((hi - lo).num_seconds() / 3600) as usize + 1;
        let grid = hourly_index(lo, n);
        let pos: HashMap<Hour, usize> = grid.iter().enumerate().map(|(i, h)| (*h, i)).collect();
        (grid, pos)
    };
    if features.hours().iter().any(|h| !grid_pos.contains_key(h)) {
        return Err(Error::invalid("feature hours are not on a common hourly grid"));
    }

    let joined: Vec<(usize, usize)> = target
        .hours
        .iter()
        .enumerate()
        .filter_map(|(t, h)| grid_pos.get(h).map(|&g| (t, g)))
        .collect();
    if joined.is_empty() {
        return Err(Error::invalid("target and features share no hours"));
    }

    let mut reindexed = Vec::with_capacity(features.n_cols());
    let mut columns = Vec::with_capacity(features.n_cols());
    for c in features.columns() {
        let mut values = vec![f64::NAN; grid.len()];
        for (h, v) in features.hours().iter().zip(&c.values) {
            values[grid_pos[h]] = *v;
        }
        let missing = joined.iter().filter(|(_, g)| values[*g].is_nan()).count();
        let mut was_filled = vec![false; grid.len()];
        for g in interpolate_gaps(&mut values, max_gap_hours) {
            was_filled[g] = true;
        }
        let interpolated = joined.iter().filter(|(_, g)| was_filled[*g]).count();
        let unfilled = joined.iter().filter(|(_, g)| values[*g].is_nan()).count();
        columns.push(ColumnProvenance {
            name: c.name.clone(),
            unit: c.unit,
            missing,
            interpolated,
            unfilled,
        });
        reindexed.push(values);
    }

    let kept: Vec<(usize, usize)> = joined
        .iter()
        .copied()
        .filter(|&(t, g)| target.volume[t].is_finite() && reindexed.iter().all(|v| !v[g].is_nan()))
        .collect();
    let hours: Vec<Hour> = kept.iter().map(|&(_, g)| grid[g]).collect();
    let cols: Vec<Column> = features
        .columns()
        .iter()
        .zip(&reindexed)
        .map(|(c, v)| Column::new(c.name.clone(), c.unit, kept.iter().map(|&(_, g)| v[g]).collect()))
        .collect();
    let x = FeatureMatrix::from_columns(hours, cols, features.feature_set())?;
    let y = kept.iter().map(|&(t, _)| target.volume[t]).collect();
    let provenance = Provenance {
        target_rows: target.hours.len(),
        feature_rows: features.n_rows(),
        joined_rows: joined.len(),
        kept_rows: kept.len(),
        dropped_rows: joined.len() - kept.len(),
        max_gap_hours,
        columns,
    };
    Ok((Dataset::new(x, y)?, provenance))
}
