//! Aggregate products over classified streams: hourly presence series and
//! county activity tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::{Duration, DurationRound};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classify::ActionMode;
use crate::geo::GeoPoint;
use crate::ingest::format_ts;
use crate::stream::ClassifiedTweet;
use crate::{Error, Result, Timestamp};

pub const UNASSIGNED: &str = "<unassigned>";

/// Sum of posteriors over one UTC hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBin {
    #[serde(with = "ts_serde")]
    pub start: Timestamp,
    pub tweet_count: u64,
    pub presence: BTreeMap<ActionMode, f64>,
}

pub(crate) mod ts_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::ingest::{format_ts, parse_timestamp};
    use crate::Timestamp;

    pub fn serialize<S: Serializer>(t: &Timestamp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_ts(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Timestamp, D::Error> {
        let s = String::deserialize(d)?;
        parse_timestamp(&s).ok_or_else(|| serde::de::Error::custom(format!("bad timestamp {s:?}")))
    }
}

pub fn floor_hour(t: Timestamp) -> Timestamp {
    t.duration_trunc(Duration::hours(1)).expect("hour truncation")
}

pub fn ceil_hour(t: Timestamp) -> Timestamp {
    let f = floor_hour(t);
    if f == t {
        t
    } else {
        f + Duration::hours(1)
    }
}

/// One bin per hour covering `[floor_hour(from), ceil_hour(to))`, empty
/// hours included. Tweets outside that span are ignored.
pub fn hourly_presence(
    tweets: &[ClassifiedTweet],
    modes: &[ActionMode],
    from: Timestamp,
    to: Timestamp,
) -> Result<Vec<TimeBin>> {
    if to < from {
        return Err(Error::InvalidInput(format!(
            "series span ends ({}) before it starts ({})",
            format_ts(&to),
            format_ts(&from)
        )));
    }
    let (start, end) = (floor_hour(from), ceil_hour(to));
    let hours = (end - start).num_hours() as usize;
    let mut bins: Vec<TimeBin> = (0..hours)
        .map(|h| TimeBin {
            start: start + Duration::hours(h as i64),
            tweet_count: 0,
            presence: modes.iter().map(|&m| (m, 0.0)).collect(),
        })
        .collect();

    let mut ordered: Vec<&ClassifiedTweet> = tweets
        .iter()
        .filter(|t| t.tweet.timestamp >= start && t.tweet.timestamp < end)
        .collect();
    ordered.sort_by(|a, b| {
        a.tweet
            .timestamp
            .cmp(&b.tweet.timestamp)
            .then_with(|| a.tweet.id.cmp(&b.tweet.id))
    });
    for t in ordered {
        let bin = &mut bins[(t.tweet.timestamp - start).num_hours() as usize];
        bin.tweet_count += 1;
        for (mode, sum) in bin.presence.iter_mut() {
            *sum += t.classification.posteriors.get(mode).copied().unwrap_or(0.0);
        }
    }
    Ok(bins)
}

/// One row per bin per mode: `bin_start,mode,presence,tweet_count`.
pub fn write_series_csv<W: Write>(bins: &[TimeBin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_start", "mode", "presence", "tweet_count"])?;
    for b in bins {
        for (mode, p) in &b.presence {
            w.write_record([
                format_ts(&b.start),
                mode.name().to_string(),
                p.to_string(),
                b.tweet_count.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Closed ring of `(lon, lat)` vertices.
pub type Ring = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Ring,
    holes: Vec<Ring>,
}

fn check_ring(ring: &Ring) -> Result<()> {
    if ring.len() < 4 {
        return Err(Error::Boundary(format!(
            "degenerate ring with {} vertices (need >= 4 including closure)",
            ring.len()
        )));
    }
    if ring.first() != ring.last() {
        return Err(Error::Boundary("ring is not closed".into()));
    }
    Ok(())
}

fn on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    cross == 0.0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

impl Polygon {
    pub fn new(exterior: Ring, holes: Vec<Ring>) -> Result<Self> {
        check_ring(&exterior)?;
        for h in &holes {
            check_ring(h)?;
        }
        Ok(Polygon { exterior, holes })
    }

    fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.exterior).chain(&self.holes)
    }

    /// Even-odd rule over all rings; points on any edge count as inside.
    pub fn contains(&self, p: GeoPoint) -> bool {
        let q = (p.lon, p.lat);
        let mut inside = false;
        for ring in self.rings() {
            for e in ring.windows(2) {
                let (a, b) = (e[0], e[1]);
                if on_segment(q, a, b) {
                    return true;
                }
                if (a.1 > q.1) != (b.1 > q.1) {
                    let x = a.0 + (q.1 - a.1) * (b.0 - a.0) / (b.1 - a.1);
                    if q.0 < x {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }

    fn bbox(&self) -> [f64; 4] {
        self.exterior.iter().fold(
            [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
            |b, &(x, y)| [b[0].min(x), b[1].min(y), b[2].max(x), b[3].max(y)],
        )
    }
}

pub fn point_in_polygon(p: GeoPoint, polygon: &Polygon) -> bool {
    polygon.contains(p)
}

/// A region from the boundary file.
#[derive(Debug, Clone, PartialEq)]
pub struct County {
    pub id: String,
    pub polygons: Vec<Polygon>,
    bbox: [f64; 4],
}

impl County {
    pub fn new(id: impl Into<String>, polygons: Vec<Polygon>) -> Self {
        let bbox = polygons.iter().map(Polygon::bbox).fold(
            [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
            |a, b| [a[0].min(b[0]), a[1].min(b[1]), a[2].max(b[2]), a[3].max(b[3])],
        );
        County {
            id: id.into(),
            polygons,
            bbox,
        }
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        let [x0, y0, x1, y1] = self.bbox;
        p.lon >= x0
            && p.lon <= x1
            && p.lat >= y0
            && p.lat <= y1
            && self.polygons.iter().any(|poly| poly.contains(p))
    }
}

fn parse_ring(v: &Value) -> Result<Ring> {
    v.as_array()
        .ok_or_else(|| Error::Boundary("ring is not an array".into()))?
        .iter()
        .map(|pos| match pos.as_array().map(Vec::as_slice) {
            Some([x, y, ..]) => match (x.as_f64(), y.as_f64()) {
                (Some(x), Some(y)) => Ok((x, y)),
                _ => Err(Error::Boundary("non-numeric coordinate".into())),
            },
            _ => Err(Error::Boundary("position needs two coordinates".into())),
        })
        .collect()
}

fn parse_polygon(v: &Value) -> Result<Polygon> {
    let rings = v
        .as_array()
        .ok_or_else(|| Error::Boundary("polygon is not an array of rings".into()))?;
    let mut rings = rings.iter().map(parse_ring).collect::<Result<Vec<_>>>()?;
    if rings.is_empty() {
        return Err(Error::Boundary("polygon has no rings".into()));
    }
    let exterior = rings.remove(0);
    Polygon::new(exterior, rings)
}

/// Parses a feature collection of Polygon/MultiPolygon features, each with
/// a `county_id` property (string or number).
pub fn parse_boundaries(text: &str) -> Result<Vec<County>> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::Boundary(format!("invalid JSON: {e}")))?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::Boundary("expected a FeatureCollection".into()));
    }
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Boundary("missing features array".into()))?;
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let ctx = |m: &str| Error::Boundary(format!("feature {i}: {m}"));
            let id = match f.pointer("/properties/county_id") {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) => n.to_string(),
                _ => return Err(ctx("missing county_id property")),
            };
            let geom = f.get("geometry").ok_or_else(|| ctx("missing geometry"))?;
            let coords = geom.get("coordinates").ok_or_else(|| ctx("missing coordinates"))?;
            let polygons = match geom.get("type").and_then(Value::as_str) {
                Some("Polygon") => vec![parse_polygon(coords)?],
                Some("MultiPolygon") => coords
                    .as_array()
                    .ok_or_else(|| ctx("MultiPolygon coordinates not an array"))?
                    .iter()
                    .map(parse_polygon)
                    .collect::<Result<_>>()?,
                other => return Err(ctx(&format!("unsupported geometry {other:?}"))),
            };
            Ok(County::new(id, polygons))
        })
        .collect()
}

pub fn load_boundaries(path: &Path) -> Result<Vec<County>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Boundary(format!("cannot read {}: {e}", path.display())))?;
    parse_boundaries(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountyStat {
    pub county_id: String,
    pub tweet_count: u64,
    pub political_count: u64,
    /// `None` when the county has no tweets.
    pub political_pct: Option<f64>,
    pub positives: BTreeMap<ActionMode, u64>,
}

impl CountyStat {
    fn empty(id: &str) -> Self {
        CountyStat {
            county_id: id.to_string(),
            tweet_count: 0,
            political_count: 0,
            political_pct: None,
            positives: ActionMode::ALL_MODES.iter().map(|&m| (m, 0)).collect(),
        }
    }

    fn add(&mut self, t: &ClassifiedTweet) {
        self.tweet_count += 1;
        for m in &t.classification.positives {
            *self.positives.entry(*m).or_insert(0) += 1;
        }
        if t.classification.positives.contains(&ActionMode::All) {
            self.political_count += 1;
        }
    }

    fn finish(&mut self) {
        self.political_pct = (self.tweet_count > 0)
            .then(|| 100.0 * self.political_count as f64 / self.tweet_count as f64);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountyTable {
    /// In boundary-file order.
    pub counties: Vec<CountyStat>,
    pub unassigned: CountyStat,
    /// Tweets outside `[from, to)`, not assigned anywhere.
    pub out_of_range: u64,
}

/// Assigns each in-range tweet to the first county (file order) containing
/// it, or to the unassigned bucket. Political = positive for `All`.
pub fn county_activity(
    tweets: &[ClassifiedTweet],
    counties: &[County],
    from: Timestamp,
    to: Timestamp,
) -> Result<CountyTable> {
    if to < from {
        return Err(Error::InvalidInput("county range ends before it starts".into()));
    }
    let mut stats: Vec<CountyStat> = counties.iter().map(|c| CountyStat::empty(&c.id)).collect();
    let mut unassigned = CountyStat::empty(UNASSIGNED);
    let mut out_of_range = 0;
    for t in tweets {
        if t.tweet.timestamp < from || t.tweet.timestamp >= to {
            out_of_range += 1;
            continue;
        }
        match counties.iter().position(|c| c.contains(t.tweet.point())) {
            Some(i) => stats[i].add(t),
            None => unassigned.add(t),
        }
    }
    stats.iter_mut().for_each(CountyStat::finish);
    unassigned.finish();
    Ok(CountyTable {
        counties: stats,
        unassigned,
        out_of_range,
    })
}

/// One row per county, the unassigned bucket last.
pub fn write_counties_csv<W: Write>(table: &CountyTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "county_id".to_string(),
        "tweet_count".into(),
        "political_count".into(),
        "political_pct".into(),
    ];
    header.extend(ActionMode::ALL_MODES.iter().map(|m| format!("positives_{}", m.name())));
    w.write_record(&header)?;
    for s in table.counties.iter().chain(std::iter::once(&table.unassigned)) {
        let mut row = vec![
            s.county_id.clone(),
            s.tweet_count.to_string(),
            s.political_count.to_string(),
            s.political_pct.map(|p| p.to_string()).unwrap_or_default(),
        ];
        row.extend(
            ActionMode::ALL_MODES
                .iter()
                .map(|m| s.positives.get(m).copied().unwrap_or(0).to_string()),
        );
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}
