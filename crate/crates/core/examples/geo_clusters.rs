//! Density clusters of classified tweets in one time window, with the share
//! of each cluster that is positive for a mode.

use actionlens::classify::EvalConfig;
use actionlens::geo::{cluster_window, haversine, GeoPoint, GeoTweet, DEFAULT_EPS_M, DEFAULT_MIN_PTS};
use actionlens::ingest::normalize_text;
use actionlens::pipeline::labeled_corpus;
use actionlens::segment::{induce_lexicon, tokenize, LexiconParams};
use actionlens::synth::{fixture_start, TweetFixture, HOTSPOTS};
use actionlens::{ActionMode, ModelBundle};
use chrono::Duration;

fn main() -> actionlens::Result<()> {
    let tweets = TweetFixture { tweets: 3000, seed: 6 }.generate();
    let normalized: Vec<String> = tweets.iter().map(|t| normalize_text(&t.text)).collect();
    let lexicon = induce_lexicon(
        normalized.iter().map(|s| tokenize(s)),
        LexiconParams { min_count: 10, ..LexiconParams::default() },
    )?;
    let (corpus, _) = labeled_corpus(&tweets, &lexicon);
    let modes = [ActionMode::CollectiveForce, ActionMode::All];
    let bundle = ModelBundle::train(&corpus, lexicon, &modes, &EvalConfig::default())?;

    let (from, to) = (fixture_start() + Duration::hours(8), fixture_start() + Duration::hours(12));
    let window: Vec<GeoTweet> = tweets
        .iter()
        .filter(|t| t.timestamp >= from && t.timestamp < to)
        .map(|t| GeoTweet {
            id: t.id.clone(),
            timestamp: t.timestamp,
            point: t.point(),
            posteriors: bundle.classify_text(&t.text).posteriors,
        })
        .collect();

    let clusters = cluster_window(&window, DEFAULT_EPS_M, DEFAULT_MIN_PTS, &bundle.thresholds())?;
    println!("{} tweets in {from} .. {to}, {} clusters", window.len(), clusters.len());
    for c in clusters.iter().filter(|c| c.count >= 10) {
        let nearest = HOTSPOTS
            .iter()
            .map(|&(name, lat, lon)| (haversine(c.centroid, GeoPoint::new(lat, lon)), name))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        println!(
            "  {:>3} tweets, radius {:>4.0} m, {:<16} collective force {:.0}%",
            c.count,
            c.radius_m,
            if nearest.0 < 500.0 { nearest.1 } else { "(no hotspot)" },
            100.0 * c.positive_fraction[&ActionMode::CollectiveForce]
        );
    }
    Ok(())
}
