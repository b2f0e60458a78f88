use std::collections::BTreeSet;

use chrono::{Duration, TimeZone, Utc};
use proptest::prelude::*;
use redispatch_core::dataset::{Direction, Window};
use redispatch_core::synth::random_records;
use redispatch_ingest::{parse_redispatch_csv, render_redispatch_csv};

/// 25 one-hour interventions across the autumn clock change, local times
/// with explicit zone columns.
fn fall_back_day() -> String {
    let mut s = String::from(
        "BEGINN_DATUM;BEGINN_UHRZEIT;ZEITZONE_VON;ENDE_DATUM;ENDE_UHRZEIT;ZEITZONE_BIS;GRUND_DER_MASSNAHME;RICHTUNG;MITTLERE_LEISTUNG_MW;ANFORDERNDER_UENB\n",
    );
    let mut slots: Vec<(u32, &str)> = (0..=2).map(|h| (h, "MESZ")).collect();
    slots.extend((2..24).map(|h| (h, "MEZ")));
    for (i, (h, zone)) in slots.iter().enumerate() {
        let (end_h, end_zone) = match slots.get(i + 1) {
            Some((eh, ez)) => (format!("{eh:02}:00"), *ez),
            None => ("24:00".to_string(), "MEZ"),
        };
        s.push_str(&format!(
            "31.10.2021;{h:02}:00;{zone};31.10.2021;{end_h};{end_zone};Strombedingter Redispatch;Wirkleistungseinspeisung reduzieren;{},5;TenneT DE\n",
            100 + i
        ));
    }
    s
}

#[test]
fn fall_back_day_has_25_distinct_utc_hours() {
    let p = parse_redispatch_csv(fall_back_day().as_bytes()).unwrap();
    assert!(p.rejects.is_empty(), "{:?}", p.rejects);
    assert_eq!(p.records.len(), 25);
    let starts: BTreeSet<_> = p.records.iter().map(|r| r.start).collect();
    assert_eq!(starts.len(), 25);
    assert_eq!(*starts.first().unwrap(), Utc.with_ymd_and_hms(2021, 10, 30, 22, 0, 0).unwrap());
    assert_eq!(*starts.last().unwrap(), Utc.with_ymd_and_hms(2021, 10, 31, 22, 0, 0).unwrap());
    assert!(p.records.iter().all(|r| r.duration_hours() == 1.0 && r.direction == Direction::Decrease));
    assert_eq!(p.records[3].power_mw, 103.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>(), n in 0usize..40) {
        let start = Utc.with_ymd_and_hms(2021, 10, 29, 0, 0, 0).unwrap();
        let w = Window { start, end: start + Duration::days(4) };
        let records = random_records(n, w, seed).unwrap();
        let p = parse_redispatch_csv(render_redispatch_csv(&records).as_bytes()).unwrap();
        prop_assert!(p.rejects.is_empty());
        prop_assert_eq!(p.records, records);
    }
}
