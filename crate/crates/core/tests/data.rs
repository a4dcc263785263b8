use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use serde_json::json;
use watkins_core::data::{
    fixture_by_label, fixture_rows, parse_remote_row, validate_row, Cache, CurveDataRow, CurveQuery, DataError,
    LmfdbClient, Resolver, ResolverOptions, RowSource, FIXTURES_JSONL,
};
use watkins_core::ecq::{CurveRecord, Provenance, WeierstrassModel};

fn row(label: &str) -> CurveDataRow {
    fixture_by_label(label).unwrap().clone()
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::open(dir.path()).unwrap();
    assert_eq!(cache.get("17a1").unwrap(), None);
    let r = row("17a1").with_source(RowSource::Remote);
    cache.put(&r).unwrap();
    assert_eq!(cache.get("17a1").unwrap(), Some(r.clone()));
    assert_eq!(cache.get("11a1").unwrap(), None);

    // A fresh handle on the same directory sees identical bytes.
    let bytes = std::fs::read(cache.path()).unwrap();
    let reopened = Cache::open(dir.path()).unwrap();
    assert_eq!(reopened.get("17a1").unwrap(), Some(r));
    assert_eq!(std::fs::read(reopened.path()).unwrap(), bytes);
}

#[test]
fn cache_is_append_only_until_compacted() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::open(dir.path()).unwrap();
    let mut a = row("11a1");
    cache.put(&a).unwrap();
    cache.put(&row("14a1")).unwrap();
    a.fetched_at = "2030-01-01T00:00:00Z".into();
    cache.put(&a).unwrap();
    assert_eq!(cache.load().unwrap().len(), 3);
    assert_eq!(cache.get("11a1").unwrap().unwrap().fetched_at, a.fetched_at);

    assert_eq!(cache.compact().unwrap(), 2);
    let rows = cache.load().unwrap();
    assert_eq!(rows.iter().map(|r| r.label.as_str()).collect::<Vec<_>>(), ["11a1", "14a1"]);
    assert_eq!(rows[0], a);
}

#[test]
fn corrupt_cache_line_reports_offset() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::open(dir.path()).unwrap();
    cache.put(&row("11a1")).unwrap();
    cache.put(&row("14a1")).unwrap();
    let text = std::fs::read_to_string(cache.path()).unwrap();
    let second = text.find('\n').unwrap() as u64 + 1;
    std::fs::write(cache.path(), text.replacen("\"14\"", "\"15\"", 1)).unwrap();

    let err = cache.get("11a1").unwrap_err();
    assert_eq!(
        err,
        DataError::CorruptCache {
            offset: second,
            reason: "checksum mismatch".into()
        }
    );
    // Not healed by compaction either.
    assert!(matches!(cache.compact(), Err(DataError::CorruptCache { .. })));
    assert!(std::fs::read_to_string(cache.path()).unwrap().contains("\"15\""));
}

#[test]
fn fixture_file_mutations_are_caught() {
    // Every single-field mutation breaks the checksum; those touching
    // computable fields are also flagged by validation.
    let line = FIXTURES_JSONL.lines().find(|l| l.contains("\"17a1\"")).unwrap();
    let original = row("17a1");
    let local = original.to_record().unwrap();
    let mutations: Vec<(&str, serde_json::Value, bool)> = vec![
        ("label", json!("17a2"), false),
        ("ainvs", json!(["1", "-1", "1", "-1", "-13"]), true),
        ("conductor", json!("34"), true),
        ("moddeg", json!("2"), false),
        ("manin", json!("2"), false),
        ("rank", json!(1), false),
        ("torsion_structure", json!([3]), true),
        ("fetched_at", json!("2000-01-01T00:00:00Z"), false),
    ];
    for (field, value, computable) in mutations {
        let mut v: serde_json::Value = serde_json::from_str(line).unwrap();
        v["row"][field] = value;
        let text = serde_json::to_string(&v).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        std::fs::write(cache.path(), format!("{text}\n")).unwrap();
        assert!(matches!(cache.load(), Err(DataError::CorruptCache { offset: 0, .. })), "{field}");

        let mutated: CurveDataRow = serde_json::from_value(v["row"].clone()).unwrap();
        assert_eq!(!validate_row(&mutated, &local).is_empty(), computable, "{field}");
    }
}

#[test]
fn validate_row_examples() {
    let r = row("32a2");
    let local = CurveRecord::from_model(&WeierstrassModel::from_i64([0, 0, 0, -1, 0]).unwrap()).unwrap();
    assert_eq!(validate_row(&r, &local), vec![]);

    let mut tampered = r.clone();
    tampered.conductor = BigInt::from(64);
    let d = validate_row(&tampered, &local);
    assert_eq!(d.len(), 1);
    assert_eq!((d[0].field, d[0].ingested.as_str(), d[0].computed.as_str()), ("conductor", "64", "32"));
}

#[test]
fn manin_constant_must_be_positive() {
    let mut r = row("11a1");
    r.manin = Some(BigInt::from(0));
    assert!(matches!(r.check(), Err(DataError::Validation(_))));
    assert!(r.to_record().is_err());
}

#[test]
fn rows_carry_provenance_into_records() {
    let rec = row("17a1").to_record().unwrap();
    let m = rec.moddeg.unwrap();
    assert_eq!(m.provenance, Provenance::Fixture);
    assert_eq!(m.fetched_at.as_deref(), Some("2026-10-16T00:00:00Z"));
}

fn offline(dir: &std::path::Path) -> Resolver {
    Resolver::new(&ResolverOptions {
        offline: true,
        cache_dir: Some(dir.to_path_buf()),
        ..ResolverOptions::default()
    })
    .unwrap()
}

#[test]
fn offline_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let res = offline(dir.path());
    let r = res.by_label("11a3").unwrap();
    assert_eq!(r.conductor, BigInt::from(11));
    assert_eq!(r.source, RowSource::Fixture);
    assert!(matches!(res.by_label("9999z9"), Err(DataError::NotFound(_))));

    let rows = res.fetch(&CurveQuery::ConductorRange(11, 20)).unwrap();
    assert!(rows.len() >= 6);
    assert!(rows.iter().all(|r| r.conductor >= BigInt::from(11) && r.conductor <= BigInt::from(20)));

    // Cached rows shadow fixtures and are tagged as cache hits.
    res.cache().unwrap().put(&row("11a3").with_source(RowSource::Remote)).unwrap();
    assert_eq!(res.by_label("11a3").unwrap().source, RowSource::Cache);
}

/// Serves canned JSON bodies on a local port, recording request targets and
/// arrival times.
struct MockServer {
    base_url: String,
    requests: Arc<Mutex<Vec<(String, Instant)>>>,
}

fn mock_server(handler: impl Fn(&str) -> (u16, String) + Send + 'static) -> MockServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base_url = format!("http://{}/api/ec_curvedata/", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&requests);
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            loop {
                let mut h = String::new();
                if reader.read_line(&mut h).unwrap() == 0 || h == "\r\n" {
                    break;
                }
            }
            let target = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
            log.lock().unwrap().push((target.clone(), Instant::now()));
            let (status, body) = handler(&target);
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    MockServer { base_url, requests }
}

fn api_row(label: &str, ainvs: [i64; 5], conductor: i64) -> serde_json::Value {
    json!({
        "Clabel": label,
        "lmfdb_label": "x.y1",
        "ainvs": ainvs,
        "conductor": conductor,
        "degree": 1,
        "manin_constant": 1,
        "rank": 0,
        "torsion_structure": [4],
        "some_new_field": "tolerated",
    })
}

fn online(server: &MockServer, dir: &std::path::Path) -> Resolver {
    Resolver::new(&ResolverOptions {
        offline: false,
        cache_dir: Some(dir.to_path_buf()),
        base_url: server.base_url.clone(),
        delay: Duration::from_millis(50),
    })
    .unwrap()
}

#[test]
fn remote_label_fetch_writes_through() {
    let server = mock_server(|target| {
        if target.contains("Clabel=17z1") {
            (200, json!({ "data": [api_row("17z1", [1, -1, 1, -1, -14], 17)] }).to_string())
        } else {
            (200, json!({ "data": [] }).to_string())
        }
    });
    let dir = tempfile::tempdir().unwrap();
    let res = online(&server, dir.path());
    let r = res.by_label("17z1").unwrap();
    assert_eq!(r.source, RowSource::Remote);
    assert_eq!(r.moddeg, Some(BigInt::from(1)));
    let cached = res.cache().unwrap().get("17z1").unwrap().unwrap();
    assert_eq!(cached, r);

    // Second lookup is served by the cache.
    assert_eq!(res.by_label("17z1").unwrap().source, RowSource::Cache);
    assert_eq!(server.requests.lock().unwrap().len(), 1);
    let target = server.requests.lock().unwrap()[0].0.clone();
    assert!(target.contains("_format=json"), "{target}");

    assert!(matches!(res.by_label("18q1"), Err(DataError::NotFound(_))));
}

#[test]
fn remote_conductor_range_is_rate_limited() {
    let server = mock_server(|target| {
        let rows = if target.contains("conductor=i11") {
            vec![api_row("11a1", [0, -1, 1, -10, -20], 11)]
        } else if target.contains("conductor=i14") {
            vec![api_row("14a1", [1, 0, 1, 4, -6], 14)]
        } else {
            vec![]
        };
        (200, json!({ "data": rows }).to_string())
    });
    let dir = tempfile::tempdir().unwrap();
    let res = online(&server, dir.path());
    let err = res.fetch(&CurveQuery::ConductorRange(11, 14));
    // The mock's torsion [4] is wrong for 11a1, which has torsion Z/5.
    assert!(matches!(err, Err(DataError::Validation(_))), "{err:?}");

    let server = mock_server(|target| {
        let rows = if target.contains("conductor=i17") {
            vec![api_row("17a1", [1, -1, 1, -1, -14], 17)]
        } else {
            vec![]
        };
        (200, json!({ "data": rows }).to_string())
    });
    let res = online(&server, dir.path());
    let rows = res.fetch(&CurveQuery::ConductorRange(15, 18)).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows.iter().all(|r| r.conductor >= BigInt::from(15) && r.conductor <= BigInt::from(18)));
    let times: Vec<Instant> = server.requests.lock().unwrap().iter().map(|r| r.1).collect();
    assert_eq!(times.len(), 4);
    for w in times.windows(2) {
        assert!(w[1] - w[0] >= Duration::from_millis(45));
    }
}

#[test]
fn remote_schema_and_network_errors() {
    let fetched = "2026-01-01T00:00:00Z";
    let mut renamed = api_row("17a1", [1, -1, 1, -1, -14], 17);
    let obj = renamed.as_object_mut().unwrap();
    let v = obj.remove("degree").unwrap();
    obj.insert("modular_degree".into(), v);
    assert!(matches!(parse_remote_row(&renamed, fetched), Err(DataError::SchemaMismatch(m)) if m.contains("degree")));

    let mut nulls = api_row("17a1", [1, -1, 1, -1, -14], 17);
    nulls["degree"] = serde_json::Value::Null;
    nulls["manin_constant"] = serde_json::Value::Null;
    let r = parse_remote_row(&nulls, fetched).unwrap();
    assert_eq!((r.moddeg, r.manin), (None, None));

    let mut big = api_row("17a1", [1, -1, 1, -1, -14], 17);
    big["ainvs"] = json!(["1", "-1", "1", "-1", "-14"]);
    assert!(parse_remote_row(&big, fetched).is_ok());

    let server = mock_server(|_| (500, "{}".into()));
    let client = LmfdbClient::new(server.base_url.clone(), Duration::ZERO);
    assert!(matches!(client.by_label("11a1"), Err(DataError::Network(_))));

    let server = mock_server(|_| (200, json!({ "rows": [] }).to_string()));
    let client = LmfdbClient::new(server.base_url.clone(), Duration::ZERO);
    assert!(matches!(client.by_label("11a1"), Err(DataError::SchemaMismatch(_))));
}

#[test]
fn remote_conductor_disagreeing_with_local_copy_is_rejected() {
    // 11a1's equation, served under the label of a fixture with another conductor.
    let server = mock_server(|_| (200, json!({ "data": [api_row("14a1", [0, -1, 1, -10, -20], 11)] }).to_string()));
    let dir = tempfile::tempdir().unwrap();
    let res = online(&server, dir.path());
    let client_rows = LmfdbClient::new(server.base_url.clone(), Duration::ZERO).by_label("14a1").unwrap();
    assert_eq!(client_rows.len(), 1);
    // by_label prefers the fixture, so go through a range query.
    let err = res.fetch(&CurveQuery::ConductorRange(11, 11)).unwrap_err();
    assert!(matches!(err, DataError::Validation(m) if m.contains("local copy")));
    assert!(res.cache().unwrap().load().unwrap().is_empty());
}

#[test]
fn fixtures_have_distinct_labels() {
    let mut labels: Vec<_> = fixture_rows().iter().map(|r| r.label.clone()).collect();
    labels.sort();
    labels.dedup();
    assert_eq!(labels.len(), fixture_rows().len());
}
