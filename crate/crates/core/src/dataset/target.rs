use chrono::{Duration, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{hourly_index, is_hour_aligned, Hour};

use super::InterventionRecord;

/// Half-open `[start, end)` interval on hour boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: Hour,
    pub end: Hour,
}

impl Window {
    pub fn new(start: Hour, end: Hour) -> Result<Self> {
        let w = Window { start, end };
        w.validate()?;
        Ok(w)
    }

    /// May 2019 through January 2023.
    pub fn study() -> Self {
        Window {
            start: Utc.with_ymd_and_hms(2019, 5, 1, 0, 0, 0).unwrap(),
            end: Utc.with_ymd_and_hms(2023, 2, 1, 0, 0, 0).unwrap(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !is_hour_aligned(&self.start) || !is_hour_aligned(&self.end) {
            return Err(Error::invalid(format!(
                "window [{}, {}) is not aligned to hour boundaries",
                self.start, self.end
            )));
        }
        if self.end <= self.start {
            return Err(Error::invalid("window is empty"));
        }
        Ok(())
    }

    pub fn n_hours(&self) -> usize {
        ((self.end - self.start).num_seconds() / 3600) as usize
    }

    pub fn hours(&self) -> Vec<Hour> {
        hourly_index(self.start, self.n_hours())
    }
}

impl Default for Window {
    fn default() -> Self {
        Window::study()
    }
}

/// Intervention volume per hour, MWh.
#[derive(Clone, Debug, PartialEq)]
pub struct HourlyTarget {
    pub hours: Vec<Hour>,
    pub volume: Vec<f64>,
}

impl HourlyTarget {
    pub fn total(&self) -> f64 {
        self.volume.iter().sum()
    }
}

/// Sums intervention energy per hour.
///
/// Each record adds `power × overlap` MWh to every hour it overlaps, whatever
/// its direction, so opposite measures add up rather than cancel. Parts of a
/// record outside the window are ignored.
pub fn hourly_volume(records: &[InterventionRecord], window: Window) -> Result<HourlyTarget> {
    window.validate()?;
    let n = window.n_hours();
    let mut volume = vec![0.0; n];
    let w0 = window.start.timestamp();
    for r in records {
        r.validate()?;
        let start = r.start.max(window.start);
        let end = r.end.min(window.end);
        if end <= start {
            continue;
        }
        let first = ((start.timestamp() - w0) / 3600) as usize;
        let last = ((end.timestamp() - w0 - 1) / 3600) as usize;
        for (h, v) in volume.iter_mut().enumerate().take(last + 1).skip(first) {
            let h0 = window.start + Duration::hours(h as i64);
            let h1 = h0 + Duration::hours(1);
            let overlap = (end.min(h1) - start.max(h0)).num_seconds();
            if overlap > 0 {
                *v += r.power_mw * overlap as f64 / 3600.0;
            }
        }
    }
    Ok(HourlyTarget {
        hours: window.hours(),
        volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::records::tests::record;
    use crate::dataset::Direction;

    fn june(h0: u32, h1: u32) -> Window {
        Window::new(
            Utc.with_ymd_and_hms(2021, 6, 1, h0, 0, 0).unwrap(),
            Utc.with_ymd_and_hms(2021, 6, 1, h1, 0, 0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn two_hour_record_spreads_evenly() {
        let t = hourly_volume(&[record(10, 12, 100.0, Direction::Decrease)], june(9, 13)).unwrap();
        assert_eq!(t.volume, vec![0.0, 100.0, 100.0, 0.0]);
    }

    #[test]
    fn opposite_directions_add_magnitudes() {
        let r = [record(10, 11, 200.0, Direction::Increase), record(10, 11, 200.0, Direction::Decrease)];
        assert_eq!(hourly_volume(&r, june(10, 11)).unwrap().volume, vec![400.0]);
    }

    #[test]
    fn half_overlaps_split_pro_rata() {
        let mut r = record(10, 11, 60.0, Direction::Increase);
        r.start += Duration::minutes(30);
        r.end += Duration::minutes(30);
        assert_eq!(hourly_volume(&[r], june(10, 12)).unwrap().volume, vec![30.0, 30.0]);
    }

    #[test]
    fn misaligned_window_rejected() {
        let w = Window {
            start: Utc.with_ymd_and_hms(2021, 6, 1, 10, 15, 0).unwrap(),
            end: Utc.with_ymd_and_hms(2021, 6, 1, 12, 0, 0).unwrap(),
        };
        assert!(matches!(hourly_volume(&[], w), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn records_clipped_to_window() {
        let t = hourly_volume(&[record(8, 12, 10.0, Direction::Increase)], june(10, 14)).unwrap();
        assert_eq!(t.volume, vec![10.0, 10.0, 0.0, 0.0]);
    }

    #[test]
    fn study_window_length() {
        let w = Window::study();
        // 1 May 2019 .. 1 Feb 2023 is 1372 days.
        assert_eq!(w.n_hours(), 1372 * 24);
    }
}
