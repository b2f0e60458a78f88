//! Regenerates the checked-in fixture tree.
//!
//! cargo run -p redispatch-cli --example make_fixtures -- fixtures

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use chrono::{Duration, TimeZone, Utc};
use redispatch_cli::RunConfig;
use redispatch_core::dataset::{add_engineered_columns, Window};
use redispatch_core::model::Hyperparameters;
use redispatch_core::synth::{
    base_features, random_records, records_for_volume, study_target, SynthConfig,
    TargetCoefficients,
};
use redispatch_core::FeatureSet;
use redispatch_ingest::{render_redispatch_csv, write_fixture_set, Quantity};

const SEED: u64 = 2021;

fn march() -> Window {
    Window {
        start: Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap(),
        end: Utc.with_ymd_and_hms(2021, 4, 1, 0, 0, 0).unwrap(),
    }
}

fn blank(base: &mut redispatch_core::FeatureMatrix, name: &str, rows: std::ops::Range<usize>) {
    let col = base.column_mut(name).expect("base column");
    for i in rows {
        col.values[i] = f64::NAN;
    }
}

fn month(dir: &Path) -> Result<()> {
    let window = march();
    let mut base = base_features(&SynthConfig {
        seed: SEED,
        window,
        ..Default::default()
    })?;
    let volume = study_target(
        &add_engineered_columns(&base)?,
        &TargetCoefficients::default(),
        SEED,
    )?;
    let records = records_for_volume(base.hours(), &volume, SEED);
    blank(&mut base, "load_amprion", 100..103);
    blank(&mut base, "solar_tennet", 300..302);
    blank(&mut base, "flow_FR", 500..506);
    write_fixture_set(&base, dir, &[Quantity::WindOnshoreFc, Quantity::SolarFc])?;
    fs::write(dir.join("redispatch.csv"), render_redispatch_csv(&records))?;
    let cfg = RunConfig {
        window: Some(window),
        feature_set: FeatureSet::Reduced,
        hyperparameters: Hyperparameters {
            n_trees: 120,
            max_depth: 4,
            learning_rate: 0.1,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut json = serde_json::to_string_pretty(&cfg)?;
    json.push('\n');
    fs::write(dir.join("config.json"), json)?;
    Ok(())
}

const DST_HEADER: &str =
    "BEGINN_DATUM;BEGINN_UHRZEIT;ZEITZONE_VON;ENDE_DATUM;ENDE_UHRZEIT;ZEITZONE_BIS;\
GRUND_DER_MASSNAHME;RICHTUNG;MITTLERE_LEISTUNG_MW;ANFORDERNDER_UENB;BETROFFENE_ANLAGE";

/// One-hour interventions covering every local hour of a clock-change day.
fn dst_day(date: &str, slots: &[(u32, &str)], last_end: (&str, &str)) -> String {
    let mut s = format!("{DST_HEADER}\n");
    for (i, (h, zone)) in slots.iter().enumerate() {
        let (end, end_zone) = match slots.get(i + 1) {
            Some((eh, ez)) => (format!("{eh:02}:00"), *ez),
            None => (last_end.0.to_string(), last_end.1),
        };
        s.push_str(&format!(
            "{date};{h:02}:00;{zone};{date};{end};{end_zone};Strombedingter Redispatch;Wirkleistungseinspeisung reduzieren;{},25;TenneT DE;Kraftwerk {}\n",
            100 + 10 * i,
            i + 1
        ));
    }
    s
}

fn redispatch(dir: &Path) -> Result<()> {
    let mut fall: Vec<(u32, &str)> = (0..=2).map(|h| (h, "MESZ")).collect();
    fall.extend((2..24).map(|h| (h, "MEZ")));
    fs::write(
        dir.join("dst_fall_back_2021-10-31.csv"),
        dst_day("31.10.2021", &fall, ("24:00", "MEZ")),
    )?;
    let mut spring: Vec<(u32, &str)> = (0..2).map(|h| (h, "MEZ")).collect();
    spring.extend((3..24).map(|h| (h, "MESZ")));
    fs::write(
        dir.join("dst_spring_forward_2021-03-28.csv"),
        dst_day("28.03.2021", &spring, ("24:00", "MESZ")),
    )?;

    let window = Window {
        start: march().start,
        end: march().start + Duration::days(14),
    };
    fs::write(
        dir.join("synthetic_1000.csv"),
        render_redispatch_csv(&random_records(1000, window, SEED)?),
    )?;

    // 50 rows in the download's combined-timestamp layout, Windows-1252
    // encoded, with broken rows mixed in.
    let mut text = String::from(
        "BEGINN;ENDE;NETZREGION;GRUND_DER_MASSNAHME;RICHTUNG;MITTLERE_LEISTUNG_MW;GESAMTE_ARBEIT_MWH;ANFORDERNDER_UENB;BETROFFENE_ANLAGE;ART_DER_MASSNAHME\n",
    );
    let reasons = [
        "Strombedingter Redispatch",
        "Spannungsbedingter Redispatch",
        "Probestart",
        "Strombedingter Countertrade",
    ];
    let tsos = [
        "TenneT DE",
        "50Hertz / TenneT DE",
        "Amprion",
        "TransnetBW",
        "TenneT NL",
        "APG, TransnetBW",
    ];
    for i in 0..50usize {
        let day = 1 + i % 28;
        let (h0, h1) = (i % 20, i % 20 + 1 + i % 3);
        let power = format!("{},{}", 10 + 37 * i, i % 10);
        let reason = reasons[i % reasons.len()];
        let kind = match i % 7 {
            0 => "Countertrade grenzüberschreitend",
            3 => "Netzreserve",
            _ => "Redispatch",
        };
        let row = match i {
            13 => format!("{day:02}.02.2021 {h0:02}:00;kaputt;;{reason};Wirkleistungseinspeisung erhöhen;{power};;TenneT DE;;{kind}"),
            27 => format!("{day:02}.02.2021 {h0:02}:00;{day:02}.02.2021 {h1:02}:00;;{reason};unklar;{power};;Amprion;;{kind}"),
            41 => format!("{day:02}.02.2021 {h0:02}:00;{day:02}.02.2021 {h1:02}:00;;{reason};Wirkleistungseinspeisung reduzieren;;;Amprion;;{kind}"),
            _ => {
                let dir = if i % 2 == 0 { "Wirkleistungseinspeisung reduzieren" } else { "Wirkleistungseinspeisung erhöhen" };
                let (mean, energy) = if i % 5 == 4 { (String::new(), format!("{},5", 1000 + i)) } else { (power, String::new()) };
                format!(
                    "{day:02}.02.2021 {h0:02}:00;{day:02}.02.2021 {h1:02}:00;Regelzone;{reason};{dir};{mean};{energy};{};Anlage Nr. {i} DE-AT;{kind}",
                    tsos[i % tsos.len()]
                )
            }
        };
        text.push_str(&row);
        text.push('\n');
    }
    let (bytes, _, unmappable) = encoding_rs::WINDOWS_1252.encode(&text);
    assert!(!unmappable);
    fs::write(dir.join("mixed_50_rows_cp1252.csv"), bytes)?;
    Ok(())
}

fn main() -> Result<()> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    let m = root.join("march2021");
    let r = root.join("redispatch");
    fs::create_dir_all(&m)?;
    fs::create_dir_all(&r)?;
    month(&m)?;
    redispatch(&r)?;
    let mut seen = BTreeSet::new();
    for d in [&m, &r] {
        for e in fs::read_dir(d)? {
            seen.insert(e?.path());
        }
    }
    println!("{} fixture files under {}", seen.len(), root.display());
    Ok(())
}
