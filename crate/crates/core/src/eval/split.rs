use std::collections::BTreeSet;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Hour;

/// Day-grouped shuffle split with a purge gap around every test hour.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupGapSplit {
    pub n_folds: usize,
    /// Training hours closer than or exactly this far from a test hour are dropped.
    pub gap_hours: i64,
    pub seed: u64,
}

impl Default for GroupGapSplit {
    fn default() -> Self {
        GroupGapSplit {
            n_folds: 5,
            gap_hours: 24,
            seed: 0,
        }
    }
}

/// Row indices into the hour slice passed to [`split`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Assigns shuffled UTC calendar days round-robin to folds.
pub fn split(hours: &[Hour], cfg: &GroupGapSplit) -> Result<Vec<Fold>> {
    if cfg.n_folds < 2 {
        return Err(Error::invalid("need at least two folds"));
    }
    if cfg.gap_hours < 0 {
        return Err(Error::invalid("gap must be non-negative"));
    }
    let mut days: Vec<NaiveDate> = hours
        .iter()
        .map(|h| h.date_naive())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if days.len() < cfg.n_folds {
        return Err(Error::invalid(format!(
            "{} distinct days cannot fill {} folds",
            days.len(),
            cfg.n_folds
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    days.shuffle(&mut rng);
    let fold_of: std::collections::HashMap<NaiveDate, usize> =
        days.iter().enumerate().map(|(i, d)| (*d, i % cfg.n_folds)).collect();

    let gap = cfg.gap_hours * 3600;
    let mut folds = Vec::with_capacity(cfg.n_folds);
    for k in 0..cfg.n_folds {
        let test: Vec<usize> = (0..hours.len())
            .filter(|&i| fold_of[&hours[i].date_naive()] == k)
            .collect();
        let mut stamps: Vec<i64> = test.iter().map(|&i| hours[i].timestamp()).collect();
        stamps.sort_unstable();
        let near_test = |t: i64| {
            let p = stamps.partition_point(|&s| s < t);
            let after = stamps.get(p).is_some_and(|&s| s - t <= gap);
            let before = p > 0 && t - stamps[p - 1] <= gap;
            after || before
        };
        let train = (0..hours.len())
            .filter(|&i| fold_of[&hours[i].date_naive()] != k && !near_test(hours[i].timestamp()))
            .collect();
        folds.push(Fold { train, test });
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::hourly_index;
    use chrono::{TimeZone, Utc};

    fn days(n: usize) -> Vec<Hour> {
        hourly_index(Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap(), 24 * n)
    }

    #[test]
    fn ten_days_five_folds() {
        let h = days(10);
        let folds = split(&h, &GroupGapSplit::default()).unwrap();
        assert_eq!(folds.len(), 5);
        for f in &folds {
            assert_eq!(f.test.len(), 48);
            let d: BTreeSet<_> = f.test.iter().map(|&i| h[i].date_naive()).collect();
            assert_eq!(d.len(), 2);
        }
    }

    #[test]
    fn same_seed_same_folds() {
        let h = days(30);
        let cfg = GroupGapSplit { seed: 7, ..Default::default() };
        assert_eq!(split(&h, &cfg).unwrap(), split(&h, &cfg).unwrap());
        assert_ne!(split(&h, &cfg).unwrap(), split(&h, &GroupGapSplit { seed: 8, ..cfg }).unwrap());
    }

    #[test]
    fn too_few_days() {
        assert!(matches!(split(&days(4), &GroupGapSplit::default()), Err(Error::InvalidInput(_))));
    }
}
