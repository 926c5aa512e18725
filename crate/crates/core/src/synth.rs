//! Seeded synthetic corpora with planted structure, for demos, fixtures and
//! benchmarks. Nothing here is used by the pipeline itself.

use std::collections::BTreeSet;

use chrono::Duration;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::classify::{ActionMode, LabeledDoc};
use crate::geo::{GeoPoint, EARTH_RADIUS_M};
use crate::ingest::{parse_timestamp, EventWindow, Tweet};
use crate::segment::{Document, Phrase};

/// Corpus where every positive document of an atomic mode draws only from
/// that mode's private vocabulary and negatives draw from a neutral one.
/// Positives carry exactly one atomic label, so the vocabularies stay
/// class-disjoint for the collapsed modes as well.
#[derive(Debug, Clone, Copy)]
pub struct DisjointCorpus {
    pub documents: usize,
    /// Share of documents positive for any mode.
    pub positive_rate: f64,
    pub mode_vocab: usize,
    pub neutral_vocab: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for DisjointCorpus {
    fn default() -> Self {
        DisjointCorpus {
            documents: 5000,
            positive_rate: 0.1,
            mode_vocab: 40,
            neutral_vocab: 300,
            min_len: 6,
            max_len: 12,
            seed: 7,
        }
    }
}

impl DisjointCorpus {
    pub fn generate(&self) -> Vec<LabeledDoc> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let positives = (self.documents as f64 * self.positive_rate).round() as usize;
        let prefixes = ["cf", "cp", "sf", "sp"];
        (0..self.documents)
            .map(|i| {
                let (prefix, vocab, labels) = if i < positives {
                    let m = i % 4;
                    (prefixes[m], self.mode_vocab, BTreeSet::from([ActionMode::ATOMIC[m]]))
                } else {
                    ("n", self.neutral_vocab, BTreeSet::new())
                };
                let len = rng.random_range(self.min_len..=self.max_len);
                let doc = Document::from_counts((0..len).map(|_| {
                    let w = format!("{prefix}{}", rng.random_range(0..vocab));
                    (Phrase::parse(&w).expect("synthetic token"), 1)
                }));
                LabeledDoc {
                    id: format!("d{i:05}"),
                    doc,
                    labels,
                }
            })
            .collect()
    }
}

/// Randomly permutes label sets across documents.
pub fn shuffle_labels(corpus: &[LabeledDoc], seed: u64) -> Vec<LabeledDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<_> = corpus.iter().map(|d| d.labels.clone()).collect();
    labels.shuffle(&mut rng);
    corpus
        .iter()
        .zip(labels)
        .map(|(d, labels)| LabeledDoc {
            labels,
            ..d.clone()
        })
        .collect()
}

const CF_PHRASES: &[&str] = &[
    "tear gas", "riot police", "on fire", "burning", "looting", "stand off", "rubber bullets",
    "smashed windows", "blocking the highway", "throwing rocks", "police line", "armored vehicle",
];
const CP_PHRASES: &[&str] = &[
    "candle vigil", "peaceful march", "singing", "prayer circle", "hands up don't shoot",
    "sit in", "food drive", "marching together", "peaceful protest", "rally downtown",
];
const SF_PHRASES: &[&str] = &[
    "got shot", "punched him", "vandal", "threatened me", "broke the window", "stole",
    "shooting suspect", "attacked",
];
const SP_PHRASES: &[&str] = &[
    "i support", "so sad", "praying for", "justice for", "we need to talk", "condolences",
    "my heart goes out", "stay safe",
];
const NEUTRAL: &[&str] = &[
    "lunch", "traffic", "coffee", "game tonight", "weather", "work", "lol", "friends", "movie",
    "happy birthday", "new shoes", "pizza", "school", "music", "tired", "weekend", "the bus",
    "finally home", "good morning", "netflix",
];

fn pool(mode: ActionMode) -> &'static [&'static str] {
    match mode {
        ActionMode::CollectiveForce => CF_PHRASES,
        ActionMode::CollectivePeace => CP_PHRASES,
        ActionMode::SingularForce => SF_PHRASES,
        _ => SP_PHRASES,
    }
}

/// Generator for a geo-tagged, coded tweet stream around a few hotspots.
#[derive(Debug, Clone, Copy)]
pub struct TweetFixture {
    pub tweets: usize,
    pub seed: u64,
}

impl Default for TweetFixture {
    fn default() -> Self {
        TweetFixture { tweets: 500, seed: 2014 }
    }
}

/// Hotspots as (name, lat, lon).
pub const HOTSPOTS: [(&str, f64, f64); 3] = [
    ("west-florissant", 38.7440, -90.2910),
    ("ferguson-pd", 38.7545, -90.2880),
    ("downtown", 38.6270, -90.1990),
];

pub fn fixture_start() -> crate::Timestamp {
    parse_timestamp("2014-11-24T18:00:00Z").expect("fixture start")
}

fn jitter(rng: &mut ChaCha8Rng, lat: f64, lon: f64, radius_m: f64) -> GeoPoint {
    let r = radius_m * rng.random::<f64>().sqrt();
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    let dlat = (r * theta.sin() / EARTH_RADIUS_M).to_degrees();
    let dlon = (r * theta.cos() / (EARTH_RADIUS_M * lat.to_radians().cos())).to_degrees();
    GeoPoint::new(lat + dlat, lon + dlon)
}

impl TweetFixture {
    pub fn generate(&self) -> Vec<Tweet> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let start = fixture_start();
        (0..self.tweets)
            .map(|i| {
                let u: f64 = rng.random();
                let primary = match u {
                    u if u < 0.50 => None,
                    u if u < 0.68 => Some(ActionMode::CollectiveForce),
                    u if u < 0.78 => Some(ActionMode::CollectivePeace),
                    u if u < 0.87 => Some(ActionMode::SingularForce),
                    _ => Some(ActionMode::SingularPeace),
                };
                let mut labels = BTreeSet::new();
                let mut segments: Vec<String> = Vec::new();
                if let Some(m) = primary {
                    labels.insert(m);
                    for _ in 0..rng.random_range(1..=2) {
                        segments.push(pool(m).choose(&mut rng).unwrap().to_string());
                    }
                    if rng.random_bool(0.1) {
                        let other = *ActionMode::ATOMIC.choose(&mut rng).unwrap();
                        labels.insert(other);
                        segments.push(pool(other).choose(&mut rng).unwrap().to_string());
                    }
                } else if rng.random_bool(0.08) {
                    let m = *ActionMode::ATOMIC.choose(&mut rng).unwrap();
                    segments.push(pool(m).choose(&mut rng).unwrap().to_string());
                }
                for _ in 0..rng.random_range(1..=3) {
                    segments.push(NEUTRAL.choose(&mut rng).unwrap().to_string());
                }
                segments.shuffle(&mut rng);
                if rng.random_bool(0.2) {
                    segments.push(format!("@user{}", rng.random_range(0..50)));
                }
                if rng.random_bool(0.15) {
                    segments.push("#Ferguson".into());
                }
                if rng.random_bool(0.1) {
                    segments.push(format!("http://t.co/{}", rng.random_range(1000..9999)));
                }
                let mut text = segments.join(" ");
                if rng.random_bool(0.3) {
                    text = text.to_uppercase();
                }

                // collective force concentrates at night near the first two hotspots
                let forceful = labels.contains(&ActionMode::CollectiveForce);
                let hour = if forceful && rng.random_bool(0.7) {
                    rng.random_range(8..12)
                } else {
                    rng.random_range(0..24)
                };
                let timestamp =
                    start + Duration::hours(hour) + Duration::seconds(rng.random_range(0..3600));
                let point = if rng.random_bool(0.05) {
                    GeoPoint::new(39.0997 + rng.random::<f64>() * 0.01, -94.5786)
                } else if forceful || rng.random_bool(0.6) {
                    let (_, lat, lon) = HOTSPOTS[if forceful { rng.random_range(0..2) } else { rng.random_range(0..3) }];
                    jitter(&mut rng, lat, lon, 120.0)
                } else {
                    GeoPoint::new(
                        38.5 + rng.random::<f64>() * 0.45,
                        -90.6 + rng.random::<f64>() * 0.45,
                    )
                };
                Tweet {
                    id: format!("t{i:04}"),
                    timestamp,
                    lat: point.lat,
                    lon: point.lon,
                    text,
                    labels: Some(labels),
                }
            })
            .collect()
    }
}

/// Event windows around the first two hotspots during the night of the fixture.
pub fn fixture_windows() -> Vec<EventWindow> {
    let night = fixture_start() + Duration::hours(8);
    HOTSPOTS[..2]
        .iter()
        .map(|&(name, lat, lon)| {
            EventWindow::new(name, GeoPoint::new(lat, lon), 500.0, night, night + Duration::hours(4))
                .expect("valid fixture window")
        })
        .collect()
}

/// Feature collection of `rows x cols` square counties with ids `r{row}c{col}`.
pub fn grid_counties_geojson(south: f64, west: f64, rows: usize, cols: usize, cell_deg: f64) -> String {
    let features: Vec<_> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| {
            let (y0, x0) = (south + r as f64 * cell_deg, west + c as f64 * cell_deg);
            let (y1, x1) = (y0 + cell_deg, x0 + cell_deg);
            json!({
                "type": "Feature",
                "properties": { "county_id": format!("r{r}c{c}") },
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]],
                },
            })
        })
        .collect();
    serde_json::to_string_pretty(&json!({ "type": "FeatureCollection", "features": features }))
        .expect("geojson serializes")
}

/// The fixture's county grid: 3x3 cells of 0.15 degrees over the study area.
pub fn fixture_counties_geojson() -> String {
    grid_counties_geojson(38.5, -90.6, 3, 3, 0.15)
}
