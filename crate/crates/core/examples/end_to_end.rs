//! The whole file pipeline, the same stages the `actionlens` binary runs:
//! lexicon, train, eval, classify, explain, cluster, series, counties.
//!
//! ```text
//! cargo run --release --example end_to_end [-- OUT_DIR]
//! ```
//!
//! The output directory can then be served with the `serve` example.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use chrono::Duration;

use actionlens::classify::{ActionMode, EvalConfig};
use actionlens::explain::DEFAULT_TOP_K;
use actionlens::geo::{DEFAULT_EPS_M, DEFAULT_MIN_PTS};
use actionlens::pipeline::*;
use actionlens::segment::LexiconParams;
use actionlens::synth::{fixture_counties_geojson, fixture_start, fixture_windows, TweetFixture};
use actionlens::Error;

fn main() -> actionlens::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/actionlens-demo"));
    fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
    let p = |name: &str| dir.join(name);
    let write = |name: &str, text: String| fs::write(p(name), text).map_err(|e| Error::Io { path: p(name), source: e });

    let tweets = TweetFixture { tweets: 3000, seed: 2014 }.generate();
    write("tweets.ndjson", tweets.iter().map(|t| t.to_record_line() + "\n").collect())?;
    write("windows.ndjson", fixture_windows().iter().map(|w| w.to_line() + "\n").collect())?;
    write("counties.geojson", fixture_counties_geojson())?;

    let summary = cmd_lexicon(&LexiconArgs {
        corpus: p("tweets.ndjson"),
        out: p("lexicon.txt"),
        params: LexiconParams { min_count: 10, ..LexiconParams::default() },
    })?;
    println!("lexicon: {summary}");

    let summary = cmd_train(&TrainArgs {
        corpus: p("tweets.ndjson"),
        lexicon: p("lexicon.txt"),
        out_dir: p("model"),
        alpha: 1.0,
        inner_k: 5,
        seed: 1,
    })?;
    println!("train: {summary}");

    let eval = cmd_eval(&EvalArgs {
        corpus: p("tweets.ndjson"),
        lexicon: p("lexicon.txt"),
        holdout: None,
        modes: ActionMode::ALL_MODES.to_vec(),
        config: EvalConfig { seed: 1, ..EvalConfig::default() },
        out: p("eval.json"),
        table: Some(p("eval.csv")),
    })?;
    for r in &eval.reports {
        println!("eval: {:<17} F1 {:.1}", r.mode.name(), r.f1);
    }

    let bundle = p("model/bundle.json");
    cmd_classify(&ClassifyArgs {
        input: p("tweets.ndjson"),
        bundle: bundle.clone(),
        windows: None,
        thresholds: BTreeMap::new(),
        out: p("classified.ndjson"),
    })?;
    let summary = cmd_classify(&ClassifyArgs {
        input: p("tweets.ndjson"),
        bundle: bundle.clone(),
        windows: Some(p("windows.ndjson")),
        thresholds: BTreeMap::new(),
        out: p("protest.ndjson"),
    })?;
    println!("classify (protest windows): {summary}");

    let night = fixture_start() + Duration::hours(8);
    let shift = cmd_explain(&ExplainArgs {
        classified: p("classified.ndjson"),
        bundle: bundle.clone(),
        mode: ActionMode::CollectiveForce,
        from: night,
        to: Some(night + Duration::hours(1)),
        selection: Selection::Positive,
        top_k: DEFAULT_TOP_K,
        out: p("shift.json"),
    })?;
    let top: Vec<&str> = shift.entries.iter().take(5).map(|e| e.phrase.as_str()).collect();
    println!("explain: top phrases {top:?}");

    let clusters = cmd_cluster(&ClusterArgs {
        classified: p("classified.ndjson"),
        bundle,
        from: None,
        to: None,
        window: Duration::hours(1),
        eps_m: DEFAULT_EPS_M,
        min_pts: DEFAULT_MIN_PTS,
        out: p("clusters.json"),
    })?;
    let n: usize = clusters.windows.iter().map(|w| w.clusters.len()).sum();
    println!("cluster: {n} clusters over {} windows", clusters.windows.len());

    let series = cmd_series(&SeriesArgs {
        classified: p("classified.ndjson"),
        from: None,
        to: None,
        modes: ActionMode::ALL_MODES.to_vec(),
        out: p("series.json"),
        csv: Some(p("series.csv")),
    })?;
    println!("series: {} hourly bins", series.bins.len());

    let counties = cmd_counties(&CountiesArgs {
        classified: p("classified.ndjson"),
        boundaries: p("counties.geojson"),
        from: Some(fixture_start()),
        to: Some(fixture_start() + Duration::hours(24)),
        out: p("counties.json"),
        csv: Some(p("counties.csv")),
    })?;
    for c in &counties.counties {
        println!("counties: {} {} tweets, political {:?}%", c.county_id, c.tweet_count, c.political_pct.map(|x| x.round()));
    }
    println!("\nexports in {}", dir.display());
    Ok(())
}
