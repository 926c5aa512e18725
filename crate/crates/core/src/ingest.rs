//! Parsing, normalization and spatiotemporal filtering of raw message records.
//!
//! Input is newline-delimited JSON, one flat object per line:
//!
//! ```text
//! {"id":"1","ts":"2014-08-11T05:00:00Z","lat":38.74,"lon":-90.27,"text":"tear gas on w florissant","labels":["collective_force"]}
//! ```
//!
//! A record that fails validation is never partially accepted; it is turned
//! into a [`Rejection`] whose [`Rejection::code`] the caller tallies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;

use chrono::{DateTime, SecondsFormat, Timelike, Utc};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::classify::ActionMode;
use crate::geo::{haversine, GeoPoint};
use crate::{Error, Result, Timestamp};

/// One geo-tagged, timestamped message.
#[derive(Debug, Clone, PartialEq)]
pub struct Tweet {
    pub id: String,
    pub timestamp: Timestamp,
    pub lat: f64,
    pub lon: f64,
    pub text: String,
    /// Coded atomic modes; present only for training data.
    pub labels: Option<BTreeSet<ActionMode>>,
}

impl Tweet {
    pub fn point(&self) -> GeoPoint {
        GeoPoint {
            lat: self.lat,
            lon: self.lon,
        }
    }

    /// Serializes to one input-format line (no trailing newline).
    pub fn to_record_line(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("tweet record serializes")
    }

    pub(crate) fn to_record(&self) -> TweetRecord<'_> {
        TweetRecord {
            id: &self.id,
            ts: format_ts(&self.timestamp),
            lat: self.lat,
            lon: self.lon,
            text: &self.text,
            labels: self
                .labels
                .as_ref()
                .map(|l| l.iter().map(|m| m.name()).collect()),
        }
    }
}

#[derive(Serialize)]
pub(crate) struct TweetRecord<'a> {
    pub id: &'a str,
    pub ts: String,
    pub lat: f64,
    pub lon: f64,
    pub text: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<&'static str>>,
}

/// Why a record was dropped.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    MalformedRecord(String),
    MissingField(&'static str),
    InvalidFieldType(&'static str),
    UnparseableTimestamp(String),
    CoordinateOutOfRange { lat: f64, lon: f64 },
    EmptyText,
    InvalidLabel(String),
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::MalformedRecord(_) => "malformed-record",
            Rejection::MissingField(_) => "missing-field",
            Rejection::InvalidFieldType(_) => "invalid-field-type",
            Rejection::UnparseableTimestamp(_) => "unparseable-timestamp",
            Rejection::CoordinateOutOfRange { .. } => "coordinate-out-of-range",
            Rejection::EmptyText => "empty-text",
            Rejection::InvalidLabel(_) => "invalid-label",
        }
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::MalformedRecord(e) => write!(f, "malformed record: {e}"),
            Rejection::MissingField(k) => write!(f, "missing field `{k}`"),
            Rejection::InvalidFieldType(k) => write!(f, "field `{k}` has the wrong type"),
            Rejection::UnparseableTimestamp(s) => write!(f, "unparseable timestamp {s:?}"),
            Rejection::CoordinateOutOfRange { lat, lon } => {
                write!(f, "coordinates out of range: lat={lat} lon={lon}")
            }
            Rejection::EmptyText => f.write_str("text is empty after normalization"),
            Rejection::InvalidLabel(l) => write!(f, "invalid label {l:?}"),
        }
    }
}

pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    let t = DateTime::parse_from_rfc3339(s).ok()?.with_timezone(&Utc);
    t.with_nanosecond(0)
}

pub fn format_ts(t: &Timestamp) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn valid_coordinates(lat: f64, lon: f64) -> bool {
    (-90.0..=90.0).contains(&lat) && lon > -180.0 && lon <= 180.0
}

fn str_field<'a>(obj: &'a Map<String, Value>, key: &'static str) -> Result<&'a str, Rejection> {
    match obj.get(key) {
        None | Some(Value::Null) => Err(Rejection::MissingField(key)),
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(Rejection::InvalidFieldType(key)),
    }
}

fn num_field(obj: &Map<String, Value>, key: &'static str) -> Result<f64, Rejection> {
    match obj.get(key) {
        None | Some(Value::Null) => Err(Rejection::MissingField(key)),
        Some(Value::Number(n)) => n.as_f64().ok_or(Rejection::InvalidFieldType(key)),
        Some(_) => Err(Rejection::InvalidFieldType(key)),
    }
}

/// Parses one input line into a validated [`Tweet`].
///
/// Keys other than the known ones are ignored, so classified records can be
/// read back through the same path.
pub fn parse_tweet_record(line: &str) -> Result<Tweet, Rejection> {
    let value: Value =
        serde_json::from_str(line).map_err(|e| Rejection::MalformedRecord(e.to_string()))?;
    let Value::Object(obj) = value else {
        return Err(Rejection::MalformedRecord("record is not an object".into()));
    };
    parse_tweet_object(&obj)
}

pub(crate) fn parse_tweet_object(obj: &Map<String, Value>) -> Result<Tweet, Rejection> {
    let id = str_field(obj, "id")?;
    let ts = str_field(obj, "ts")?;
    let lat = num_field(obj, "lat")?;
    let lon = num_field(obj, "lon")?;
    let text = str_field(obj, "text")?;

    let timestamp =
        parse_timestamp(ts).ok_or_else(|| Rejection::UnparseableTimestamp(ts.to_string()))?;
    if !valid_coordinates(lat, lon) {
        return Err(Rejection::CoordinateOutOfRange { lat, lon });
    }
    if normalize_text(text).is_empty() {
        return Err(Rejection::EmptyText);
    }
    let labels = match obj.get("labels") {
        None | Some(Value::Null) => None,
        Some(Value::Array(items)) => {
            let mut set = BTreeSet::new();
            for item in items {
                let name = item.as_str().ok_or(Rejection::InvalidFieldType("labels"))?;
                match ActionMode::from_name(name) {
                    Some(m) if m.is_atomic() => {
                        set.insert(m);
                    }
                    _ => return Err(Rejection::InvalidLabel(name.to_string())),
                }
            }
            Some(set)
        }
        Some(_) => return Err(Rejection::InvalidFieldType("labels")),
    };

    Ok(Tweet {
        id: id.to_string(),
        timestamp,
        lat,
        lon,
        text: text.to_string(),
        labels,
    })
}

/// Accepted/rejected counts for one pass over an input.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub accepted: u64,
    pub rejected: BTreeMap<String, u64>,
}

impl Tally {
    pub fn record<T>(&mut self, outcome: &Result<T, Rejection>) {
        match outcome {
            Ok(_) => self.accepted += 1,
            Err(r) => *self.rejected.entry(r.code().to_string()).or_default() += 1,
        }
    }

    pub fn total_rejected(&self) -> u64 {
        self.rejected.values().sum()
    }

    pub fn total(&self) -> u64 {
        self.accepted + self.total_rejected()
    }
}

/// One non-blank input line and what became of it.
#[derive(Debug)]
pub struct ParsedLine {
    pub line: usize,
    pub outcome: Result<Tweet, Rejection>,
}

/// Streams [`ParsedLine`]s from a newline-delimited reader; blank lines are skipped.
pub struct TweetReader<R> {
    lines: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> TweetReader<R> {
    pub fn new(reader: R) -> Self {
        TweetReader {
            lines: reader.lines(),
            line: 0,
        }
    }
}

impl<R: BufRead> Iterator for TweetReader<R> {
    type Item = Result<ParsedLine>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let raw = self.lines.next()?;
            self.line += 1;
            let raw = match raw {
                Ok(r) => r,
                Err(e) => return Some(Err(Error::io("<input stream>", e))),
            };
            if raw.trim().is_empty() {
                continue;
            }
            return Some(Ok(ParsedLine {
                line: self.line,
                outcome: parse_tweet_record(&raw),
            }));
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn normalize_token(raw: &str, out: &mut String) {
    let lower = raw.to_lowercase();
    let mut tok = lower.as_str();

    let unhashed = tok.trim_start_matches('#');
    if unhashed.len() != tok.len() && unhashed.chars().next().is_some_and(is_word_char) {
        tok = unhashed;
    }

    if tok.starts_with("http://") || tok.starts_with("https://") || tok.starts_with("www.") {
        out.push_str("<url>");
        return;
    }
    if let Some(rest) = tok.strip_prefix('@') {
        let name_len: usize = rest
            .chars()
            .take_while(|&c| is_word_char(c))
            .map(char::len_utf8)
            .sum();
        if name_len > 0 {
            out.push_str("<user>");
            out.push_str(&rest[name_len..]);
            return;
        }
    }
    out.push_str(tok);
}

/// Lowercases, replaces URLs and mentions with `<url>`/`<user>`, strips
/// hashtag markers and collapses whitespace. Idempotent.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for raw in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        normalize_token(raw, &mut out);
    }
    out
}

/// A documented time and place of protest activity.
#[derive(Debug, Clone, PartialEq)]
pub struct EventWindow {
    pub label: String,
    pub center: GeoPoint,
    pub radius_m: f64,
    pub start: Timestamp,
    pub end: Timestamp,
}

impl EventWindow {
    pub fn new(
        label: impl Into<String>,
        center: GeoPoint,
        radius_m: f64,
        start: Timestamp,
        end: Timestamp,
    ) -> Result<Self> {
        if !(radius_m > 0.0 && radius_m.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "event window radius must be > 0, got {radius_m}"
            )));
        }
        if start >= end {
            return Err(Error::InvalidInput(format!(
                "event window start {} is not before end {}",
                format_ts(&start),
                format_ts(&end)
            )));
        }
        if !valid_coordinates(center.lat, center.lon) {
            return Err(Error::InvalidInput(format!(
                "event window center out of range: {center:?}"
            )));
        }
        Ok(EventWindow {
            label: label.into(),
            center,
            radius_m,
            start,
            end,
        })
    }

    /// Closed in both time and distance.
    pub fn contains(&self, tweet: &Tweet) -> bool {
        tweet.timestamp >= self.start
            && tweet.timestamp <= self.end
            && haversine(tweet.point(), self.center) <= self.radius_m
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(line).map_err(|e| Error::json("event window", e))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidInput("event window is not an object".into()))?;
        let field = |k: &str| {
            obj.get(k)
                .ok_or_else(|| Error::InvalidInput(format!("event window missing `{k}`")))
        };
        let num = |k: &str| {
            field(k)?
                .as_f64()
                .ok_or_else(|| Error::InvalidInput(format!("event window `{k}` is not a number")))
        };
        let ts = |k: &str| {
            let s = field(k)?.as_str().ok_or_else(|| {
                Error::InvalidInput(format!("event window `{k}` is not a string"))
            })?;
            parse_timestamp(s)
                .ok_or_else(|| Error::InvalidInput(format!("event window `{k}`: bad timestamp {s:?}")))
        };
        let label = field("label")?
            .as_str()
            .ok_or_else(|| Error::InvalidInput("event window `label` is not a string".into()))?;
        EventWindow::new(
            label,
            GeoPoint {
                lat: num("lat")?,
                lon: num("lon")?,
            },
            num("radius_m")?,
            ts("start")?,
            ts("end")?,
        )
    }

    pub fn to_line(&self) -> String {
        serde_json::json!({
            "label": self.label,
            "lat": self.center.lat,
            "lon": self.center.lon,
            "radius_m": self.radius_m,
            "start": format_ts(&self.start),
            "end": format_ts(&self.end),
        })
        .to_string()
    }
}

pub fn read_event_windows<R: BufRead>(reader: R) -> Result<Vec<EventWindow>> {
    let mut windows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<event windows>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let w = EventWindow::parse_line(&line)
            .map_err(|e| Error::InvalidInput(format!("event window line {}: {e}", i + 1)))?;
        windows.push(w);
    }
    Ok(windows)
}

/// A tweet that passed the protest filter, with the labels of every window it fell in.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredTweet {
    pub tweet: Tweet,
    pub windows: Vec<String>,
}

/// Keeps tweets that fall inside at least one event window, in input order.
pub fn protest_filter<'w, I>(
    tweets: I,
    windows: &'w [EventWindow],
) -> Result<impl Iterator<Item = FilteredTweet> + 'w>
where
    I: IntoIterator<Item = Tweet>,
    I::IntoIter: 'w,
{
    if windows.is_empty() {
        return Err(Error::InvalidInput(
            "protest filter needs at least one event window".into(),
        ));
    }
    Ok(tweets.into_iter().filter_map(move |tweet| {
        let matched: Vec<String> = windows
            .iter()
            .filter(|w| w.contains(&tweet))
            .map(|w| w.label.clone())
            .collect();
        (!matched.is_empty()).then_some(FilteredTweet {
            tweet,
            windows: matched,
        })
    }))
}
