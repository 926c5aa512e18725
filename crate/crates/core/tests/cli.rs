mod common;

use serde_json::Value;

use actionlens::classify::ActionMode;
use actionlens::geo::GeoPoint;
use actionlens::ingest::read_event_windows;
use actionlens::pipeline::{ClusterExport, SeriesExport};
use actionlens::stream::read_classified;

use common::{cli, fixtures, run_fixture_pipeline, snapshot};

fn json(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixture_pipeline_exports_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    run_fixture_pipeline(dir.path(), 7);
    let d = dir.path();

    for (file, schema) in [
        ("eval.json", "actionlens.eval/v1"),
        ("shift.json", "actionlens.shift/v1"),
        ("clusters.json", "actionlens.clusters/v1"),
        ("series.json", "actionlens.series/v1"),
        ("counties.json", "actionlens.counties/v1"),
        ("classified.ndjson.meta.json", "actionlens.classify-meta/v1"),
    ] {
        let v = json(&d.join(file));
        assert_eq!(v["schema"], schema, "{file}");
        assert!(v["provenance"]["inputs"].as_object().is_some_and(|m| !m.is_empty()), "{file}");
    }

    let table = std::fs::read_to_string(d.join("eval.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "Action,Abundance,Threshold,P,R,F1");
    assert_eq!(table.lines().count(), 10);

    let classified = read_classified(std::io::BufReader::new(std::fs::File::open(d.join("classified.ndjson")).unwrap())).unwrap();
    assert_eq!(classified.len(), 500);

    // series conservation
    let series: SeriesExport = serde_json::from_value(json(&d.join("series.json"))).unwrap();
    let binned: u64 = series.bins.iter().map(|b| b.tweet_count).sum();
    assert_eq!(binned, 500);
    for mode in ActionMode::ALL_MODES {
        let a: f64 = series.bins.iter().map(|b| b.presence[&mode]).sum();
        let b: f64 = classified.iter().map(|c| c.classification.posteriors[&mode]).sum();
        assert!((a - b).abs() < 1e-9);
    }

    // clusters partition each window's tweets
    let clusters: ClusterExport = serde_json::from_value(json(&d.join("clusters.json"))).unwrap();
    let mut total = 0;
    for w in &clusters.windows {
        let members: usize = w.clusters.iter().map(|c| c.count).sum();
        assert_eq!(members + w.noise_count, w.tweet_count);
        total += w.tweet_count;
    }
    assert_eq!(total, 500);

    // the protest subset lies inside the event windows
    let windows = read_event_windows(std::io::BufReader::new(std::fs::File::open(fixtures().join("windows.ndjson")).unwrap())).unwrap();
    let protest = read_classified(std::io::BufReader::new(std::fs::File::open(d.join("protest.ndjson")).unwrap())).unwrap();
    assert!(!protest.is_empty() && protest.len() < 500);
    assert!(protest.iter().all(|p| windows.iter().any(|w| w.contains(&p.tweet))));

    // the planted night-time hotspot dominates collective force
    let shift = json(&d.join("shift.json"));
    let top: Vec<&str> = shift["entries"].as_array().unwrap().iter().take(5).map(|e| e["phrase"].as_str().unwrap()).collect();
    assert!(top.iter().any(|p| ["tear gas", "riot police", "rubber bullets", "stand off", "on fire", "looting", "burning"].contains(p)), "{top:?}");
    let big = clusters.windows.iter().flat_map(|w| &w.clusters).max_by_key(|c| c.count).unwrap();
    let hotspot = GeoPoint::new(38.7440, -90.2910);
    let near = GeoPoint::new(38.7545, -90.2880);
    assert!(actionlens::geo::haversine(big.centroid, hotspot) < 300.0 || actionlens::geo::haversine(big.centroid, near) < 300.0);
}

#[test]
fn same_seed_gives_byte_identical_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_fixture_pipeline(a.path(), 3);
    run_fixture_pipeline(b.path(), 3);
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>());
    for (k, v) in &sa {
        assert!(v == &sb[k], "{} differs", k.display());
    }
}

#[test]
fn classify_on_empty_input_writes_empty_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = tempfile::tempdir().unwrap();
    run_fixture_pipeline(run.path(), 1);
    let empty = dir.path().join("empty.ndjson");
    std::fs::write(&empty, "").unwrap();
    let out = dir.path().join("out.ndjson");
    let o = cli(&[
        "classify", empty.to_str().unwrap(),
        "--bundle", run.path().join("bundle/bundle.json").to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), b"");
}

#[test]
fn failures_exit_nonzero_with_an_error_object() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "classify", fixtures().join("tweets.ndjson").to_str().unwrap(),
        "--bundle", dir.path().join("missing.json").to_str().unwrap(),
        "--out", dir.path().join("x.ndjson").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "io");

    // a model file from another schema version is rejected
    let run = tempfile::tempdir().unwrap();
    run_fixture_pipeline(run.path(), 1);
    let bundle = run.path().join("bundle/bundle.json");
    let text = std::fs::read_to_string(&bundle).unwrap().replace("actionlens.bundle/v1", "actionlens.bundle/v0");
    std::fs::write(&bundle, text).unwrap();
    let o = cli(&[
        "classify", fixtures().join("tweets.ndjson").to_str().unwrap(),
        "--bundle", bundle.to_str().unwrap(),
        "--out", dir.path().join("x.ndjson").to_str().unwrap(),
    ]);
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "schema-mismatch");

    // an explain window with nothing in it
    let o = cli(&[
        "explain", run.path().join("classified.ndjson").to_str().unwrap(),
        "--bundle", run.path().join("bundle/bundle.json").to_str().unwrap(),
        "--mode", "all", "--from", "2001-01-01T00:00:00Z",
        "--out", dir.path().join("s.json").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
}

#[test]
fn config_file_supplies_defaults_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"min_count": 1000000}"#).unwrap();
    let tweets = fixtures().join("tweets.ndjson");
    let lex = dir.path().join("lex.txt");
    let run = |extra: &[&str]| {
        let mut args = vec!["lexicon", tweets.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--out", lex.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = cli(&args);
        assert!(o.status.success());
        std::fs::read_to_string(&lex).unwrap().lines().filter(|l| !l.starts_with('#')).count()
    };
    assert_eq!(run(&[]), 0);
    assert!(run(&["--min-count", "5"]) > 0);
}
