//! Synthetic grid, market and intervention data with a known ground truth.
//!
//! [`base_features`] produces every ingest column with plausible daily and
//! seasonal structure. [`study_target`] turns the engineered features into a
//! volume whose drivers are known: wind in the north, a hydro shortfall in the
//! south and a wind × Danish-flow interaction.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use chrono::{Datelike, Duration, TimeZone, Timelike, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::features::{self as names, CONTROL_AREAS, NEIGHBOURS, OFFSHORE_AREAS};
use crate::dataset::{engineer_features, Direction, InterventionKind, InterventionRecord, Reason, Window};
use crate::error::{Error, Result};
use crate::frame::{hourly_index, Column, Dataset, FeatureMatrix, FeatureSet, Hour, Unit};

/// `volume = wind·W + hydro·max(0, knee − H) + interaction·W·max(0, F)/1000 + ε`,
/// clipped at zero, with W = wind_north, H = hydro_south, F = flow_DK (MW).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetCoefficients {
    pub wind: f64,
    pub hydro: f64,
    pub hydro_knee: f64,
    pub interaction: f64,
    pub noise_sd: f64,
}

impl Default for TargetCoefficients {
    fn default() -> Self {
        TargetCoefficients {
            wind: 0.25,
            hydro: 2.5,
            hydro_knee: 1200.0,
            interaction: 0.12,
            noise_sd: 250.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub window: Window,
    pub coefficients: TargetCoefficients,
    /// Probability that a missing run starts at any hour of any column.
    pub missing_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let start = Utc.with_ymd_and_hms(2020, 11, 1, 0, 0, 0).unwrap();
        SynthConfig {
            seed: 0,
            window: Window { start, end: start + Duration::days(120) },
            coefficients: TargetCoefficients::default(),
            missing_rate: 0.0,
        }
    }
}

/// Stationary AR(1) with unit variance.
fn ar1(rng: &mut ChaCha8Rng, n: usize, phi: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let innov = (1.0 - phi * phi).sqrt();
    let mut x = normal.sample(rng);
    (0..n)
        .map(|_| {
            let v = x;
            x = phi * x + innov * normal.sample(rng);
            v
        })
        .collect()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn capacity(table: &[(&str, f64)], ca: &str) -> f64 {
    table.iter().find(|(a, _)| *a == ca).map_or(0.0, |(_, c)| *c)
}

const ONSHORE: [(&str, f64); 4] = [("50hertz", 18000.0), ("amprion", 12000.0), ("tennet", 16000.0), ("transnet", 1500.0)];
const OFFSHORE: [(&str, f64); 2] = [("50hertz", 1500.0), ("tennet", 6500.0)];
const SOLAR: [(&str, f64); 4] = [("50hertz", 10000.0), ("amprion", 12000.0), ("tennet", 16000.0), ("transnet", 9000.0)];
const HYDRO: [(&str, f64); 4] = [("50hertz", 15.0), ("amprion", 200.0), ("tennet", 850.0), ("transnet", 550.0)];
const LOAD: [(&str, f64); 4] = [("50hertz", 9500.0), ("amprion", 18000.0), ("tennet", 14000.0), ("transnet", 8000.0)];
const FLOW_SCALE: [(&str, f64); 7] = [
    ("AT", 1800.0),
    ("CH", 1500.0),
    ("CZ", 1200.0),
    ("DK", 1300.0),
    ("FR", 1600.0),
    ("NL", 1700.0),
    ("PL", 900.0),
];

/// Every base column over `cfg.window`, optionally with missing runs.
pub fn base_features(cfg: &SynthConfig) -> Result<FeatureMatrix> {
    cfg.window.validate()?;
    if !(0.0..1.0).contains(&cfg.missing_rate) {
        return Err(Error::invalid("missing rate must lie in [0, 1)"));
    }
    let hours = cfg.window.hours();
    let n = hours.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let doy: Vec<f64> = hours.iter().map(|h| h.ordinal() as f64).collect();
    let hod: Vec<f64> = hours.iter().map(|h| h.hour() as f64).collect();
    let weekend: Vec<bool> = hours.iter().map(|h| h.weekday().number_from_monday() >= 6).collect();

    let weather = ar1(&mut rng, n, 0.985);
    let clouds = ar1(&mut rng, n, 0.95);
    let mut cols: Vec<Column> = Vec::new();
    let mut push = |name: String, values: Vec<f64>| {
        let unit = names::unit_for(&name);
        cols.push(Column::new(name, unit, values));
    };

    let mut wind_total = vec![0.0; n];
    let mut solar_total = vec![0.0; n];
    let mut load_total = vec![0.0; n];
    let mut loads = Vec::new();
    for ca in CONTROL_AREAS {
        let local = ar1(&mut rng, n, 0.9);
        let day_shape: Vec<f64> = (0..n)
            .map(|i| {
                let daily = 1.0 + 0.13 * (2.0 * PI * (hod[i] - 8.0) / 24.0).sin();
                let seasonal = 1.0 + 0.08 * (2.0 * PI * (doy[i] + 10.0) / 365.25).cos();
                let week = if weekend[i] { 0.88 } else { 1.0 };
                capacity(&LOAD, ca) * daily * seasonal * week * (1.0 + 0.02 * local[i])
            })
            .collect();
        for (t, v) in load_total.iter_mut().zip(&day_shape) {
            *t += v;
        }
        loads.push(day_shape);
    }
    for (ca, l) in CONTROL_AREAS.iter().zip(&loads) {
        push(names::load(ca), l.clone());
    }
    for ca in CONTROL_AREAS {
        let local = ar1(&mut rng, n, 0.95);
        let v: Vec<f64> = (0..n)
            .map(|i| capacity(&ONSHORE, ca) * sigmoid(1.6 * (0.8 * weather[i] + 0.6 * local[i]) - 0.9))
            .collect();
        for (t, x) in wind_total.iter_mut().zip(&v) {
            *t += x;
        }
        push(names::wind_onshore(ca), v);
    }
    for ca in OFFSHORE_AREAS {
        let local = ar1(&mut rng, n, 0.95);
        let v: Vec<f64> = (0..n)
            .map(|i| capacity(&OFFSHORE, ca) * sigmoid(1.8 * (0.8 * weather[i] + 0.6 * local[i]) - 0.2))
            .collect();
        for (t, x) in wind_total.iter_mut().zip(&v) {
            *t += x;
        }
        push(names::wind_offshore(ca), v);
    }
    for ca in CONTROL_AREAS {
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let sun = ((hod[i] - 5.0) * PI / 14.0).sin().max(0.0);
                let season = 0.55 + 0.45 * (2.0 * PI * (doy[i] - 80.0) / 365.25).sin();
                capacity(&SOLAR, ca) * sun * season * (0.35 + 0.65 * sigmoid(1.5 * clouds[i]))
            })
            .collect();
        for (t, x) in solar_total.iter_mut().zip(&v) {
            *t += x;
        }
        push(names::solar(ca), v);
    }
    let melt = ar1(&mut rng, n, 0.999);
    let mut hydro_cols = Vec::new();
    for ca in CONTROL_AREAS {
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let season = 1.0 + 0.55 * (2.0 * PI * (doy[i] - 75.0) / 365.25).sin();
                (capacity(&HYDRO, ca) * season * (1.0 + 0.3 * melt[i])).max(0.0)
            })
            .collect();
        hydro_cols.push(v.clone());
        push(names::hydro(ca), v);
    }
    for (k, ca) in CONTROL_AREAS.iter().enumerate() {
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let renew = wind_total[i] * capacity(&ONSHORE, ca) / 47500.0
                    + solar_total[i] * capacity(&SOLAR, ca) / 47000.0
                    + hydro_cols[k][i];
                (loads[k][i] - 0.8 * renew).max(0.15 * loads[k][i]) * (1.0 + 0.03 * normal.sample(&mut rng))
            })
            .collect();
        push(names::gen_rest(ca), v);
    }
    let price_de: Vec<f64> = (0..n)
        .map(|i| {
            let residual = load_total[i] - wind_total[i] - solar_total[i];
            (35.0 + 2.2e-3 * residual + 6.0 * normal.sample(&mut rng)).max(-50.0)
        })
        .collect();
    let mut flows = Vec::new();
    let mut prices = Vec::new();
    for zone in NEIGHBOURS {
        let own = ar1(&mut rng, n, 0.93);
        let tie = if zone == "DK" { 0.25 } else { 0.5 };
        let scale = capacity(&FLOW_SCALE, zone);
        flows.push((0..n).map(|i| scale * (tie * weather[i] + (1.0 - tie * tie).sqrt() * own[i])).collect::<Vec<f64>>());
        let spread = ar1(&mut rng, n, 0.9);
        prices.push((0..n).map(|i| price_de[i] + 12.0 * spread[i]).collect::<Vec<f64>>());
    }
    for (zone, f) in NEIGHBOURS.iter().zip(&flows) {
        push(names::flow(zone), f.clone());
    }
    for (zone, p) in NEIGHBOURS.iter().zip(&prices) {
        push(names::price(zone), p.clone());
    }
    for (zone, p) in NEIGHBOURS.iter().zip(&prices) {
        push(names::price_diff(zone), p.iter().zip(&price_de).map(|(a, b)| a - b).collect());
    }
    push(names::PRICE_DE.to_string(), price_de);

    if cfg.missing_rate > 0.0 {
        for c in &mut cols {
            let mut i = 0;
            while i < n {
                if rng.random_bool(cfg.missing_rate) {
                    let len = rng.random_range(1..=5usize);
                    for v in c.values.iter_mut().skip(i).take(len) {
                        *v = f64::NAN;
                    }
                    i += len;
                }
                i += 1;
            }
        }
    }
    let order = names::base_columns();
    cols.sort_by_key(|c| order.iter().position(|n| *n == c.name));
    FeatureMatrix::from_columns(hours, cols, FeatureSet::Base)
}

/// Ground-truth volume from a table holding wind_north, hydro_south and flow_DK.
pub fn study_target(x: &FeatureMatrix, c: &TargetCoefficients, seed: u64) -> Result<Vec<f64>> {
    let w = &x.require(names::WIND_NORTH)?.values;
    let h = &x.require(names::HYDRO_SOUTH)?.values;
    let f = &x.require("flow_DK")?.values;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7a26);
    let noise = Normal::new(0.0, c.noise_sd.max(0.0)).map_err(|e| Error::invalid(e.to_string()))?;
    Ok((0..x.n_rows())
        .map(|i| {
            let v = c.wind * w[i]
                + c.hydro * (c.hydro_knee - h[i]).max(0.0)
                + c.interaction * w[i] * f[i].max(0.0) / 1000.0
                + noise.sample(&mut rng);
            v.max(0.0)
        })
        .collect())
}

/// Feature set built from synthetic base data, ground-truth target attached,
/// plus `n_noise` columns of pure noise named `noise_<k>`.
pub fn study_dataset(cfg: &SynthConfig, set: FeatureSet, n_noise: usize) -> Result<Dataset> {
    let base = base_features(&SynthConfig { missing_rate: 0.0, ..cfg.clone() })?;
    let drivers = engineer_features(&base, FeatureSet::Reduced)?;
    let y = study_target(&drivers, &cfg.coefficients, cfg.seed)?;
    let mut x = engineer_features(&base, set)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0015_e000);
    let normal = Normal::new(0.0, 1000.0).unwrap();
    for k in 0..n_noise {
        let v = (0..x.n_rows()).map(|_| normal.sample(&mut rng)).collect();
        x.push_column(Column::new(format!("noise_{k}"), Unit::Mw, v))?;
    }
    Dataset::new(x, y)
}

fn record(start: Hour, end: Hour, power: f64, direction: Direction, kind: InterventionKind) -> InterventionRecord {
    InterventionRecord {
        start,
        end,
        direction,
        power_mw: power,
        kind,
        reason: Reason::Current,
        requesting_tsos: BTreeSet::from(["TenneT DE".to_string()]),
        domestic_request: true,
        cross_border: kind == InterventionKind::Countertrade,
        plant_id: None,
        synthetic: false,
    }
}

/// Interventions whose filtered, completed hourly volume reproduces `volume`,
/// mixed with records the filters must remove.
///
/// Each hour's volume is split between a redispatch pair and a cross-border
/// countertrade at half power, whose mirror supplies the other half.
pub fn records_for_volume(hours: &[Hour], volume: &[f64], seed: u64) -> Vec<InterventionRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tsos = ["50Hertz", "Amprion", "TenneT DE", "TransnetBW"];
    let mut out = Vec::new();
    for (h, v) in hours.iter().zip(volume) {
        if *v <= 0.0 {
            continue;
        }
        let end = *h + Duration::hours(1);
        let share: f64 = rng.random_range(0.0..0.4);
        let ct = v * share / 2.0;
        let rd = (v - 2.0 * ct) / 2.0;
        let tso = tsos[rng.random_range(0..tsos.len())].to_string();
        for dir in [Direction::Decrease, Direction::Increase] {
            let mut r = record(*h, end, rd, dir, InterventionKind::Redispatch);
            r.requesting_tsos = BTreeSet::from([tso.clone()]);
            r.plant_id = Some(format!("P{:04}", rng.random_range(0..500)));
            out.push(r);
        }
        if ct > 0.0 {
            out.push(record(*h, end, ct, Direction::Increase, InterventionKind::Countertrade));
        }
        if rng.random_bool(0.1) {
            let mut r = record(*h, end, rng.random_range(10.0..300.0), Direction::Decrease, InterventionKind::Redispatch);
            r.reason = Reason::Voltage;
            out.push(r);
        }
        if rng.random_bool(0.05) {
            let mut r = record(*h, end, rng.random_range(10.0..300.0), Direction::Increase, InterventionKind::Redispatch);
            r.requesting_tsos = BTreeSet::from(["TenneT NL".to_string()]);
            r.domestic_request = false;
            out.push(r);
        }
    }
    out
}

/// `n` independent records with minute-resolution spans of up to a day inside `window`.
pub fn random_records(n: usize, window: Window, seed: u64) -> Result<Vec<InterventionRecord>> {
    window.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let minutes = (window.end - window.start).num_minutes();
    let kinds = [InterventionKind::Redispatch, InterventionKind::Countertrade, InterventionKind::GridReserve];
    let reasons = [Reason::Current, Reason::Current, Reason::Current, Reason::Voltage, Reason::Other];
    let tsos = ["50Hertz", "Amprion", "TenneT DE", "TransnetBW", "TenneT NL", "APG"];
    Ok((0..n)
        .map(|_| {
            let s = rng.random_range(0..minutes - 1);
            let len = rng.random_range(15..=(24 * 60)).min(minutes - s);
            let start = window.start + Duration::minutes(s);
            let kind = kinds[rng.random_range(0..3)];
            let tso = tsos[rng.random_range(0..tsos.len())];
            InterventionRecord {
                start,
                end: start + Duration::minutes(len),
                direction: if rng.random_bool(0.5) { Direction::Increase } else { Direction::Decrease },
                power_mw: (rng.random_range(1.0..1500.0) * 10.0f64).round() / 10.0,
                kind,
                reason: reasons[rng.random_range(0..reasons.len())],
                requesting_tsos: BTreeSet::from([tso.to_string()]),
                domestic_request: crate::dataset::is_german_tso(tso),
                cross_border: kind == InterventionKind::Countertrade && rng.random_bool(0.7),
                plant_id: (kind == InterventionKind::Redispatch).then(|| format!("P{:04}", rng.random_range(0..500))),
                synthetic: false,
            }
        })
        .collect())
}

/// Hours of `cfg.window`; a convenience for callers pairing targets and features.
pub fn window_hours(cfg: &SynthConfig) -> Vec<Hour> {
    hourly_index(cfg.window.start, cfg.window.n_hours())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{complete_cross_border, filter_records, hourly_volume};

    fn small() -> SynthConfig {
        let start = Window::study().start;
        SynthConfig { window: Window { start, end: start + Duration::days(10) }, ..Default::default() }
    }

    #[test]
    fn base_table_has_every_column() {
        let b = base_features(&small()).unwrap();
        assert_eq!(b.names(), names::base_columns());
        assert_eq!(b.n_rows(), 240);
        assert!(b.columns().iter().all(|c| c.values.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(base_features(&small()).unwrap(), base_features(&small()).unwrap());
    }

    #[test]
    fn records_reproduce_volume() {
        let cfg = small();
        let d = study_dataset(&cfg, FeatureSet::Reduced, 0).unwrap();
        let recs = records_for_volume(d.hours(), &d.target, 1);
        let t = hourly_volume(&complete_cross_border(filter_records(recs)), cfg.window).unwrap();
        for (a, b) in t.volume.iter().zip(&d.target) {
            assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn missing_runs_are_injected() {
        let cfg = SynthConfig { missing_rate: 0.01, ..small() };
        let b = base_features(&cfg).unwrap();
        assert!(b.columns().iter().map(|c| c.missing_count()).sum::<usize>() > 0);
    }
}
