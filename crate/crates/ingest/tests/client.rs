mod common;

use chrono::{Duration, TimeZone, Utc};
use common::{no_sleep, NoNetwork, Scripted};
use proptest::prelude::*;
use redispatch_core::frame::{hourly_index, Hour, Unit};
use redispatch_ingest::xml::{render_acknowledgement, render_market_document};
use redispatch_ingest::{Cache, Client, ClientConfig, Fetcher, IngestError, Quantity, RawSeries, SeriesRequest, Source};

fn t0() -> Hour {
    Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap()
}

fn day_request() -> SeriesRequest {
    SeriesRequest::new(Quantity::WindOnshoreFc, "tennet", t0(), t0() + Duration::days(1))
}

fn doc(start: Hour, values: &[f64]) -> Vec<u8> {
    render_market_document(start, Duration::hours(1), values, Unit::Mw).into_bytes()
}

fn client(t: &Scripted, cfg: ClientConfig) -> Client {
    Client::new(Box::new(t.clone()), "token", cfg).with_sleeper(no_sleep)
}

#[test]
fn query_parameters() {
    let t = Scripted::new(vec![(200, doc(t0(), &[1.0; 24]))]);
    let c = client(&t, ClientConfig::default());
    c.fetch(&day_request()).unwrap();
    assert_eq!(t.param(0, "documentType").as_deref(), Some("A69"));
    assert_eq!(t.param(0, "psrType").as_deref(), Some("B19"));
    assert_eq!(t.param(0, "in_Domain").as_deref(), Some("10YDE-EON------1"));
    assert_eq!(t.param(0, "periodStart").as_deref(), Some("202103010000"));
    assert_eq!(t.param(0, "periodEnd").as_deref(), Some("202103020000"));
    assert_eq!(t.param(0, "securityToken").as_deref(), Some("token"));

    let ex = SeriesRequest::exchange("DE_LU", "FR", t0(), t0() + Duration::days(1));
    let q = c.query(&ex).unwrap();
    assert!(q.contains(&("documentType".into(), "A09".into())));
    assert!(q.contains(&("out_Domain".into(), "10Y1001A1001A82H".into())));
    assert!(q.contains(&("in_Domain".into(), "10YFR-RTE------C".into())));
}

#[test]
fn backs_off_on_429_then_succeeds() {
    let t = Scripted::new(vec![(429, vec![]), (429, vec![]), (200, doc(t0(), &[2.0; 24]))]);
    let c = client(&t, ClientConfig::default());
    let s = c.fetch(&day_request()).unwrap();
    assert_eq!(c.calls(), 3);
    assert_eq!(s.points.len(), 24);
    assert_eq!(s.source, Source::Live);
}

#[test]
fn rate_limit_attempts_are_bounded() {
    let t = Scripted::new(vec![(429, vec![]); 10]);
    let c = client(&t, ClientConfig { max_attempts: 4, ..Default::default() });
    assert!(matches!(c.fetch(&day_request()), Err(IngestError::RateLimited { attempts: 4 })));
    assert_eq!(c.calls(), 4);
}

#[test]
fn auth_failure() {
    let t = Scripted::new(vec![(401, b"Unauthorized".to_vec())]);
    let c = client(&t, ClientConfig::default());
    assert!(matches!(c.fetch(&day_request()), Err(IngestError::Auth { status: 401, .. })));
}

#[test]
fn empty_interval_is_flagged() {
    let ack = render_acknowledgement("No matching data found for Data item").into_bytes();
    for status in [200, 400] {
        let t = Scripted::new(vec![(status, ack.clone())]);
        let s = client(&t, ClientConfig::default()).fetch(&day_request()).unwrap();
        assert!(s.empty);
        assert!(s.points.is_empty());
    }
}

#[test]
fn malformed_xml_reports_offset() {
    let t = Scripted::new(vec![(200, b"<GL_MarketDocument><TimeSeries></Period>".to_vec())]);
    match client(&t, ClientConfig::default()).fetch(&day_request()) {
        Err(IngestError::Xml { offset, .. }) => assert!(offset > 0),
        other => panic!("expected xml error, got {other:?}"),
    }
}

#[test]
fn long_requests_are_chunked_and_merged() {
    let req = SeriesRequest::new(Quantity::LoadForecast, "amprion", t0(), t0() + Duration::days(5));
    let responses = (0..3)
        .map(|i| {
            let start = t0() + Duration::days(2 * i);
            let n = if i == 2 { 24 } else { 48 };
            (200, doc(start, &vec![i as f64; n]))
        })
        .collect();
    let t = Scripted::new(responses);
    let s = client(&t, ClientConfig { chunk_days: 2, ..Default::default() }).fetch(&req).unwrap();
    assert_eq!(t.seen.lock().unwrap().len(), 3);
    assert_eq!(s.points.iter().map(|p| p.0).collect::<Vec<_>>(), hourly_index(t0(), 120));
    assert_eq!(s.points[119].1, 2.0);
}

#[test]
fn second_request_is_served_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<f64> = (0..24).map(|i| i as f64 * 0.1 + 1e-9).collect();
    let t = Scripted::new(vec![(200, doc(t0(), &values))]);
    let f = Fetcher::live(client(&t, ClientConfig::default()), Some(Cache::new(dir.path()).unwrap()));
    let a = f.fetch(&day_request()).unwrap();
    let b = f.fetch(&day_request()).unwrap();
    assert_eq!(f.network_calls(), 1);
    assert_eq!(b.source, Source::Cache);
    assert_eq!(a.points, b.points);
    assert_eq!(serde_json::to_string(&a.points).unwrap(), serde_json::to_string(&b.points).unwrap());
}

#[test]
fn offline_without_cache_entry_fails() {
    let dir = tempfile::tempdir().unwrap();
    let f = Fetcher::offline(Cache::new(dir.path()).unwrap())
        .with_client(Client::new(Box::new(NoNetwork), "t", ClientConfig::default()));
    assert!(matches!(f.fetch(&day_request()), Err(IngestError::Offline(_))));
    assert_eq!(f.network_calls(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cache_round_trip_is_exact(values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 1..50)) {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let req = SeriesRequest::new(Quantity::DayAheadPrice, "FR", t0(), t0() + Duration::hours(values.len() as i64));
        let series = RawSeries {
            request: req.clone(),
            unit: Unit::EurPerMwh,
            points: hourly_index(t0(), values.len()).into_iter().zip(values).collect(),
            source: Source::Live,
            fetched_at: None,
            empty: false,
        };
        cache.put(&series).unwrap();
        let back = cache.get(&req).unwrap().unwrap();
        prop_assert_eq!(back, RawSeries { source: Source::Cache, ..series });
    }
}
