//! Read-only HTTP service over a directory of pre-computed exports.
//!
//! Every `*.json` file in the directory whose `schema` tag is a known
//! export is indexed once at startup; handlers only read from that index.
//!
//! | endpoint | answers with |
//! |---|---|
//! | `GET /v1/windows` | every cluster window (`start`, `end`) |
//! | `GET /v1/clusters?window=START` | the cluster window starting at `START` |
//! | `GET /v1/series?from=&to=&mode=` | series bins in `[from, to)`, optionally one mode |
//! | `GET /v1/shift?window=START&mode=M` | the phrase shift for that window and mode |
//! | `GET /v1/counties?from=&to=` | the county table for exactly that range |

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::export::{CLUSTERS_SCHEMA, COUNTIES_SCHEMA, SERIES_SCHEMA, SHIFT_SCHEMA, WINDOWS_SCHEMA};
use crate::ingest::{format_ts, parse_timestamp};
use crate::{Error, Result, Timestamp};

/// Exports keyed for lookup. Timestamps are keyed by their canonical string.
#[derive(Debug, Default)]
pub struct ArtifactIndex {
    /// window start -> window object
    clusters: BTreeMap<String, Value>,
    series: Vec<Value>,
    /// (window start, mode) -> shift export
    shifts: BTreeMap<(String, String), Value>,
    /// (from, to) -> counties export
    counties: BTreeMap<(String, String), Value>,
}

fn canonical_ts(v: Option<&Value>) -> Option<String> {
    v.and_then(Value::as_str)
        .and_then(parse_timestamp)
        .map(|t| format_ts(&t))
}

impl ArtifactIndex {
    pub fn load(dir: &Path) -> Result<Self> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut index = ArtifactIndex::default();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            let Ok(value) = serde_json::from_str::<Value>(&text) else {
                continue;
            };
            index.add(value);
        }
        Ok(index)
    }

    /// Indexes one export; values without a known schema are ignored.
    pub fn add(&mut self, value: Value) {
        match value.get("schema").and_then(Value::as_str) {
            Some(CLUSTERS_SCHEMA) => {
                for w in value["windows"].as_array().into_iter().flatten() {
                    if let Some(start) = canonical_ts(w.get("start")) {
                        self.clusters.insert(start, w.clone());
                    }
                }
            }
            Some(SERIES_SCHEMA) => self.series.push(value),
            Some(SHIFT_SCHEMA) => {
                let start = canonical_ts(value.pointer("/window/from"));
                let mode = value.get("mode").and_then(Value::as_str).map(str::to_string);
                if let (Some(s), Some(m)) = (start, mode) {
                    self.shifts.insert((s, m), value);
                }
            }
            Some(COUNTIES_SCHEMA) => {
                let from = canonical_ts(value.pointer("/range/from"));
                let to = canonical_ts(value.pointer("/range/to"));
                if let (Some(f), Some(t)) = (from, to) {
                    self.counties.insert((f, t), value);
                }
            }
            _ => {}
        }
    }

    pub fn windows(&self) -> Value {
        let windows: Vec<Value> = self
            .clusters
            .values()
            .map(|w| json!({ "start": w["start"], "end": w["end"] }))
            .collect();
        json!({ "schema": WINDOWS_SCHEMA, "windows": windows })
    }
}

#[derive(Debug)]
enum ApiError {
    BadRequest(String),
    NotFound(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind, message) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "bad-request", m),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, "not-found", m),
        };
        (status, Json(json!({ "error": { "kind": kind, "message": message } }))).into_response()
    }
}

type ApiResult = std::result::Result<Json<Value>, ApiError>;

fn required_ts(v: &Option<String>, name: &str) -> std::result::Result<Timestamp, ApiError> {
    let s = v
        .as_deref()
        .ok_or_else(|| ApiError::BadRequest(format!("missing query parameter `{name}`")))?;
    parse_timestamp(s).ok_or_else(|| ApiError::BadRequest(format!("bad timestamp for `{name}`: {s:?}")))
}

#[derive(Deserialize)]
struct WindowQuery {
    window: Option<String>,
    mode: Option<String>,
}

#[derive(Deserialize)]
struct RangeQuery {
    from: Option<String>,
    to: Option<String>,
    mode: Option<String>,
}

async fn windows(State(ix): State<Arc<ArtifactIndex>>) -> Json<Value> {
    Json(ix.windows())
}

async fn clusters(State(ix): State<Arc<ArtifactIndex>>, Query(q): Query<WindowQuery>) -> ApiResult {
    let key = format_ts(&required_ts(&q.window, "window")?);
    ix.clusters
        .get(&key)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::NotFound(format!("no cluster window starting at {key}")))
}

async fn shift(State(ix): State<Arc<ArtifactIndex>>, Query(q): Query<WindowQuery>) -> ApiResult {
    let key = format_ts(&required_ts(&q.window, "window")?);
    let mode = q
        .mode
        .ok_or_else(|| ApiError::BadRequest("missing query parameter `mode`".into()))?;
    ix.shifts
        .get(&(key.clone(), mode.clone()))
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::NotFound(format!("no {mode} shift for window {key}")))
}

async fn series(State(ix): State<Arc<ArtifactIndex>>, Query(q): Query<RangeQuery>) -> ApiResult {
    let from = required_ts(&q.from, "from")?;
    let to = required_ts(&q.to, "to")?;
    let covering = ix.series.iter().find(|s| {
        let f = s.pointer("/span/from").and_then(Value::as_str).and_then(parse_timestamp);
        let t = s.pointer("/span/to").and_then(Value::as_str).and_then(parse_timestamp);
        matches!((f, t), (Some(f), Some(t)) if f <= from && to <= t)
    });
    let Some(export) = covering else {
        return Err(ApiError::NotFound("no series export covers the requested span".into()));
    };
    let mut out = export.clone();
    let bins: Vec<Value> = export["bins"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|b| {
            b["start"]
                .as_str()
                .and_then(parse_timestamp)
                .is_some_and(|t| t >= from && t < to)
        })
        .map(|b| match &q.mode {
            Some(m) => {
                let mut b = b.clone();
                let p = b["presence"].get(m).cloned().unwrap_or(Value::Null);
                b["presence"] = json!({ m.as_str(): p });
                b
            }
            None => b.clone(),
        })
        .collect();
    out["bins"] = Value::Array(bins);
    if let Some(m) = &q.mode {
        out["modes"] = json!([m]);
    }
    Ok(Json(out))
}

async fn counties(State(ix): State<Arc<ArtifactIndex>>, Query(q): Query<RangeQuery>) -> ApiResult {
    let key = (
        format_ts(&required_ts(&q.from, "from")?),
        format_ts(&required_ts(&q.to, "to")?),
    );
    ix.counties
        .get(&key)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::NotFound(format!("no county table for {} .. {}", key.0, key.1)))
}

pub fn router(index: Arc<ArtifactIndex>) -> Router {
    Router::new()
        .route("/v1/windows", get(windows))
        .route("/v1/clusters", get(clusters))
        .route("/v1/series", get(series))
        .route("/v1/shift", get(shift))
        .route("/v1/counties", get(counties))
        .with_state(index)
}

/// Serves `dir` until the process is stopped.
pub async fn serve(dir: &Path, addr: SocketAddr) -> Result<()> {
    let index = Arc::new(ArtifactIndex::load(dir)?);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(format!("bind {addr}"), e))?;
    axum::serve(listener, router(index))
        .await
        .map_err(|e| Error::io(format!("serve {addr}"), e))
}
