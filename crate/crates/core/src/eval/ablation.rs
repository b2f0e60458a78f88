use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Dataset, Hour};
use crate::model::Hyperparameters;

use super::{cross_validate, split, GroupGapSplit};

/// Low-information stand-ins for a feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Proxy {
    /// Trailing mean over the last `window_hours` hours, current hour included.
    RollingAverage { window_hours: u32 },
    /// Mean by calendar day of year.
    SeasonalProfile,
    /// Mean by hour of day.
    DailyProfile,
}

impl fmt::Display for Proxy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Proxy::RollingAverage { window_hours } => write!(f, "rolling_average:{window_hours}"),
            Proxy::SeasonalProfile => f.write_str("seasonal_profile"),
            Proxy::DailyProfile => f.write_str("daily_profile"),
        }
    }
}

impl FromStr for Proxy {
    type Err = Error;

    /// `rolling_average:<hours>`, `rolling_average:<days>d`, `seasonal_profile`
    /// or `daily_profile`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "seasonal_profile" => Ok(Proxy::SeasonalProfile),
            "daily_profile" => Ok(Proxy::DailyProfile),
            other => {
                let w = other
                    .strip_prefix("rolling_average:")
                    .ok_or_else(|| Error::invalid(format!("unknown proxy {other:?}")))?;
                let (num, scale) = match w.strip_suffix('d') {
                    Some(d) => (d, 24),
                    None => (w.strip_suffix('h').unwrap_or(w), 1),
                };
                let n: u32 = num
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad rolling window {w:?}")))?;
                if n == 0 {
                    return Err(Error::invalid("rolling window must be positive"));
                }
                Ok(Proxy::RollingAverage { window_hours: n * scale })
            }
        }
    }
}

fn group_mean<K: std::hash::Hash + Eq + Copy>(values: &[f64], keys: &[K]) -> Vec<f64> {
    let mut acc: HashMap<K, (f64, usize)> = HashMap::new();
    for (v, k) in values.iter().zip(keys) {
        if v.is_finite() {
            let e = acc.entry(*k).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    keys.iter()
        .map(|k| acc.get(k).map_or(f64::NAN, |(s, n)| s / *n as f64))
        .collect()
}

/// Replaces `values` (indexed by `hours`) with the proxy series.
pub fn apply_proxy(values: &[f64], hours: &[Hour], proxy: Proxy) -> Vec<f64> {
    match proxy {
        Proxy::SeasonalProfile => {
            let keys: Vec<u32> = hours.iter().map(|h| h.ordinal()).collect();
            group_mean(values, &keys)
        }
        Proxy::DailyProfile => {
            let keys: Vec<u32> = hours.iter().map(|h| h.hour()).collect();
            group_mean(values, &keys)
        }
        Proxy::RollingAverage { window_hours } => {
            let mut order: Vec<usize> = (0..hours.len()).collect();
            order.sort_by_key(|&i| hours[i]);
            let span = i64::from(window_hours) * 3600;
            let mut out = vec![f64::NAN; values.len()];
            let mut lo = 0usize;
            for (hi, &i) in order.iter().enumerate() {
                let t = hours[i].timestamp();
                while hours[order[lo]].timestamp() <= t - span {
                    lo += 1;
                }
                let (sum, count) = order[lo..=hi]
                    .iter()
                    .map(|&j| values[j])
                    .filter(|v| v.is_finite())
                    .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                out[i] = if count == 0 { f64::NAN } else { sum / count as f64 };
            }
            out
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub feature: String,
    pub proxy: Proxy,
    pub original_fold_scores: Vec<f64>,
    pub ablated_fold_scores: Vec<f64>,
    pub original_score: f64,
    pub ablated_score: f64,
    /// Ablated minus original mean R².
    pub delta: f64,
}

/// Cross-validates with `feature` as is and with it replaced by `proxy`,
/// on the same folds.
pub fn proxy_ablation(
    data: &Dataset,
    feature: &str,
    proxy: Proxy,
    hp: &Hyperparameters,
    cv: &GroupGapSplit,
) -> Result<AblationReport> {
    let original_values = data.features.require(feature)?.values.clone();
    let mut ablated = data.clone();
    ablated.features.column_mut(feature).expect("checked above").values =
        apply_proxy(&original_values, data.hours(), proxy);
    let folds = split(data.hours(), cv)?;
    let original = cross_validate(data, hp, &folds)?;
    let replaced = cross_validate(&ablated, hp, &folds)?;
    Ok(AblationReport {
        feature: feature.to_string(),
        proxy,
        delta: replaced.mean - original.mean,
        original_score: original.mean,
        ablated_score: replaced.mean,
        original_fold_scores: original.fold_scores,
        ablated_fold_scores: replaced.fold_scores,
    })
}
