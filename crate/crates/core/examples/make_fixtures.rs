//! Regenerates the bundled fixture files.
//!
//! ```text
//! cargo run --example make_fixtures [-- OUT_DIR]
//! ```
//!
//! Writes `tweets.ndjson` (500 coded tweets around three hotspots),
//! `windows.ndjson` (two event windows) and `counties.geojson` (a 3x3 grid).

use std::fs;
use std::path::PathBuf;

use actionlens::synth::{fixture_counties_geojson, fixture_windows, TweetFixture};

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    fs::create_dir_all(&dir)?;

    let tweets = TweetFixture::default().generate();
    let mut lines: String = tweets.iter().map(|t| t.to_record_line() + "\n").collect();
    fs::write(dir.join("tweets.ndjson"), &lines)?;

    lines = fixture_windows().iter().map(|w| w.to_line() + "\n").collect();
    fs::write(dir.join("windows.ndjson"), &lines)?;

    fs::write(dir.join("counties.geojson"), fixture_counties_geojson() + "\n")?;
    println!("wrote {} tweets to {}", tweets.len(), dir.display());
    Ok(())
}
