//! Great-circle distance and density clustering of classified tweets.
//!
//! Clusters are found with a DBSCAN-style pass over haversine distances:
//! a point is core when at least `min_pts` points (itself included) lie
//! within `eps_m` meters. Connected core points form a cluster together with
//! their border points; everything else is noise. Points are visited in
//! `(timestamp, id)` order, and a border point reachable from several
//! clusters joins the first one discovered, so output is independent of
//! input order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::classify::ActionMode;
use crate::{Error, Result, Timestamp};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

pub const DEFAULT_EPS_M: f64 = 150.0;
pub const DEFAULT_MIN_PTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon }
    }
}

/// Great-circle distance in meters.
pub fn haversine(a: GeoPoint, b: GeoPoint) -> f64 {
    // canonical argument order keeps the result bitwise symmetric
    let (a, b) = match a.lat.total_cmp(&b.lat).then(a.lon.total_cmp(&b.lon)) {
        Ordering::Greater => (b, a),
        _ => (a, b),
    };
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.min(1.0).sqrt().asin()
}

/// A classified tweet as seen by the clustering pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoTweet {
    pub id: String,
    pub timestamp: Timestamp,
    pub point: GeoPoint,
    pub posteriors: BTreeMap<ActionMode, f64>,
}

/// Raw DBSCAN output as indices into the input slice.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    /// Clusters in discovery order; members in `(timestamp, id)` order.
    pub clusters: Vec<Vec<usize>>,
    pub noise: Vec<usize>,
}

fn visit_order(points: &[GeoTweet]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pa.timestamp.cmp(&pb.timestamp).then_with(|| pa.id.cmp(&pb.id))
    });
    order
}

/// Exact eps-neighborhoods (self included), pruned by latitude band: the
/// great-circle distance is never below `R * |dlat|`.
fn neighborhoods(points: &[GeoTweet], eps_m: f64) -> Vec<Vec<usize>> {
    let mut by_lat: Vec<usize> = (0..points.len()).collect();
    by_lat.sort_by(|&a, &b| points[a].point.lat.total_cmp(&points[b].point.lat));
    let band_deg = (eps_m / EARTH_RADIUS_M).to_degrees() * (1.0 + 1e-9) + 1e-12;

    points
        .iter()
        .map(|p| {
            let lo = by_lat.partition_point(|&j| points[j].point.lat < p.point.lat - band_deg);
            by_lat[lo..]
                .iter()
                .take_while(|&&j| points[j].point.lat <= p.point.lat + band_deg)
                .copied()
                .filter(|&j| haversine(p.point, points[j].point) <= eps_m)
                .collect()
        })
        .collect()
}

fn validate_params(eps_m: f64, min_pts: usize) -> Result<()> {
    if !(eps_m > 0.0 && eps_m.is_finite()) {
        return Err(Error::InvalidInput(format!("eps_m must be > 0, got {eps_m}")));
    }
    if min_pts < 1 {
        return Err(Error::InvalidInput("min_pts must be >= 1".into()));
    }
    Ok(())
}

pub fn dbscan(points: &[GeoTweet], eps_m: f64, min_pts: usize) -> Result<Assignment> {
    validate_params(eps_m, min_pts)?;
    let order = visit_order(points);
    let mut rank = vec![0usize; points.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut neighbors = neighborhoods(points, eps_m);
    for n in &mut neighbors {
        n.sort_by_key(|&j| rank[j]);
    }
    let is_core: Vec<bool> = neighbors.iter().map(|n| n.len() >= min_pts).collect();

    let mut label: Vec<Option<usize>> = vec![None; points.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for &seed in &order {
        if label[seed].is_some() || !is_core[seed] {
            continue;
        }
        let cid = clusters.len();
        let mut members = vec![seed];
        label[seed] = Some(cid);
        queue.push_back(seed);
        while let Some(q) = queue.pop_front() {
            if !is_core[q] {
                continue;
            }
            for &n in &neighbors[q] {
                if label[n].is_none() {
                    label[n] = Some(cid);
                    members.push(n);
                    queue.push_back(n);
                }
            }
        }
        members.sort_by_key(|&j| rank[j]);
        clusters.push(members);
    }
    let noise = order.iter().copied().filter(|&i| label[i].is_none()).collect();
    Ok(Assignment { clusters, noise })
}

/// One spatial cluster and its per-mode positive share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub member_ids: Vec<String>,
    pub centroid: GeoPoint,
    /// Largest member distance from the centroid.
    pub radius_m: f64,
    pub count: usize,
    pub positive_fraction: BTreeMap<ActionMode, f64>,
}

/// Mean of coordinates; longitudes are unwrapped first when the members
/// straddle the antimeridian.
fn centroid(points: &[GeoPoint]) -> GeoPoint {
    let n = points.len() as f64;
    let (min_lon, max_lon) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.lon), hi.max(p.lon))
        });
    let wraps = max_lon - min_lon > 180.0;
    let lat = points.iter().map(|p| p.lat).sum::<f64>() / n;
    let mut lon = points
        .iter()
        .map(|p| if wraps && p.lon < 0.0 { p.lon + 360.0 } else { p.lon })
        .sum::<f64>()
        / n;
    if lon > 180.0 {
        lon -= 360.0;
    }
    GeoPoint { lat, lon }
}

/// Summarizes cluster members; `positive_fraction` covers exactly the modes in `thresholds`.
pub fn cluster_summary(members: &[&GeoTweet], thresholds: &BTreeMap<ActionMode, f64>) -> Cluster {
    assert!(!members.is_empty(), "cluster has no members");
    let pts: Vec<GeoPoint> = members.iter().map(|m| m.point).collect();
    let c = if pts.len() == 1 { pts[0] } else { centroid(&pts) };
    let radius_m = pts.iter().map(|&p| haversine(p, c)).fold(0.0, f64::max);
    let count = members.len();
    let positive_fraction = thresholds
        .iter()
        .map(|(&mode, &thr)| {
            let pos = members
                .iter()
                .filter(|m| m.posteriors.get(&mode).is_some_and(|&p| p >= thr))
                .count();
            (mode, pos as f64 / count as f64)
        })
        .collect();
    Cluster {
        member_ids: members.iter().map(|m| m.id.clone()).collect(),
        centroid: c,
        radius_m,
        count,
        positive_fraction,
    }
}

/// Clusters one time window and summarizes each cluster.
pub fn cluster_window(
    tweets: &[GeoTweet],
    eps_m: f64,
    min_pts: usize,
    thresholds: &BTreeMap<ActionMode, f64>,
) -> Result<Vec<Cluster>> {
    let assignment = dbscan(tweets, eps_m, min_pts)?;
    Ok(assignment
        .clusters
        .iter()
        .map(|idx| {
            let members: Vec<&GeoTweet> = idx.iter().map(|&i| &tweets[i]).collect();
            cluster_summary(&members, thresholds)
        })
        .collect())
}
