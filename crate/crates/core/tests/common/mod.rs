//! Independent reference implementations used by the integration tests.
//! Each one is written from the defining formula, not from the library code.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

use actionlens::geo::{haversine, GeoTweet};

// ---- naive Bayes ----

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn pow(base: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * base)
}

/// Exact positive-class posterior of additive-smoothed multinomial naive
/// Bayes, straight from raw counts:
/// `P(c) * prod_w ((n_wc + a) / (N_c + a V))^f(w)` normalized over classes.
pub fn exact_posterior(
    train: &[(Vec<(String, u32)>, bool)],
    query: &[(String, u32)],
    alpha: &BigRational,
) -> BigRational {
    let mut counts: BTreeMap<&str, [u64; 2]> = BTreeMap::new();
    let mut tokens = [0u64; 2];
    let mut docs = [0u64; 2];
    for (doc, positive) in train {
        let c = if *positive { 0 } else { 1 };
        docs[c] += 1;
        for (w, f) in doc {
            counts.entry(w).or_default()[c] += *f as u64;
            tokens[c] += *f as u64;
        }
    }
    let v = BigRational::from_integer(BigInt::from(counts.len()));
    let joint = |c: usize| {
        let mut p = ratio(docs[c] as i64, (docs[0] + docs[1]) as i64);
        let denom = BigRational::from_integer(BigInt::from(tokens[c])) + alpha * &v;
        for (w, f) in query {
            let n = counts.get(w.as_str()).map_or(0, |x| x[c]);
            let l = (BigRational::from_integer(BigInt::from(n)) + alpha) / &denom;
            p *= pow(&l, *f);
        }
        p
    };
    let (jp, jn) = (joint(0), joint(1));
    let total = &jp + &jn;
    if total.is_zero() {
        return ratio(1, 2);
    }
    jp / total
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

// ---- threshold tuning ----

/// F1 as the exact fraction `2tp / (2tp + fp + fn)`.
pub fn f1_fraction(tp: u64, fp: u64, fn_: u64) -> (u64, u64) {
    (2 * tp, 2 * tp + fp + fn_)
}

pub fn cmp_fraction(a: (u64, u64), b: (u64, u64)) -> Ordering {
    // 0/0 counts as 0
    let a = if a.1 == 0 { (0, 1) } else { a };
    let b = if b.1 == 0 { (0, 1) } else { b };
    (a.0 as u128 * b.1 as u128).cmp(&(b.0 as u128 * a.1 as u128))
}

/// Every distinct score tried as `p >= t`; best F1, ties to the larger `t`.
pub fn sweep_best(scores: &[(f64, bool)]) -> (f64, (u64, u64)) {
    let mut candidates: Vec<f64> = scores.iter().map(|s| s.0).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let mut best: Option<(f64, (u64, u64))> = None;
    for &t in &candidates {
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for &(p, y) in scores {
            match (p >= t, y) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                _ => {}
            }
        }
        let f = f1_fraction(tp, fp, fn_);
        let take = match &best {
            None => true,
            Some((bt, bf)) => match cmp_fraction(f, *bf) {
                Ordering::Greater => true,
                Ordering::Equal => t > *bt,
                Ordering::Less => false,
            },
        };
        if take {
            best = Some((t, f));
        }
    }
    best.expect("non-empty scores")
}

// ---- clustering ----

/// DBSCAN by definition: core points are those with at least `min_pts`
/// points (self included) within `eps_m`; clusters are the transitive
/// closure of the eps-graph over core points; a border point joins the
/// adjacent cluster whose earliest core point comes first in
/// `(timestamp, id)` order. Returns clusters as index lists in that order.
pub fn closure_clusters(points: &[GeoTweet], eps_m: f64, min_pts: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = points.len();
    let near = |i: usize, j: usize| haversine(points[i].point, points[j].point) <= eps_m;
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts)
        .collect();

    // Warshall over the core-core adjacency
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = core[i] && core[j] && near(i, j);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        (points[a].timestamp, &points[a].id).cmp(&(points[b].timestamp, &points[b].id))
    });
    let rank: BTreeMap<usize, usize> = order.iter().enumerate().map(|(r, &i)| (i, r)).collect();

    // a component is named by its earliest core point
    let root = |i: usize| -> usize {
        (0..n)
            .filter(|&j| reach[i][j])
            .min_by_key(|&j| rank[&j])
            .expect("core points reach themselves")
    };
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let owner = if core[i] {
            Some(root(i))
        } else {
            (0..n)
                .filter(|&j| core[j] && near(i, j))
                .map(root)
                .min_by_key(|&r| rank[&r])
        };
        if let Some(r) = owner {
            groups.entry(rank[&r]).or_default().push(i);
        }
    }
    let clusters: Vec<Vec<usize>> = groups
        .into_values()
        .map(|mut m| {
            m.sort_by_key(|i| rank[i]);
            m
        })
        .collect();
    let assigned: BTreeSet<usize> = clusters.iter().flatten().copied().collect();
    let noise = order.into_iter().filter(|i| !assigned.contains(i)).collect();
    (clusters, noise)
}

// ---- geometry ----

/// Winding number of a closed `(x, y)` ring around `p`.
pub fn winding_number(ring: &[(f64, f64)], p: (f64, f64)) -> i32 {
    let is_left = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
    let mut w = 0;
    for e in ring.windows(2) {
        let (a, b) = (e[0], e[1]);
        if a.1 <= p.1 {
            if b.1 > p.1 && is_left(a, b) > 0.0 {
                w += 1;
            }
        } else if b.1 <= p.1 && is_left(a, b) < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Distance from `p` to the nearest ring edge, in coordinate units.
pub fn boundary_distance(ring: &[(f64, f64)], p: (f64, f64)) -> f64 {
    ring.windows(2)
        .map(|e| {
            let (a, b) = (e[0], e[1]);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len2 = dx * dx + dy * dy;
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
            };
            let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
            ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Star-shaped (hence simple) closed ring around `center`.
pub fn star_ring(center: (f64, f64), angles: &[f64], radii: &[f64]) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = angles.iter().copied().zip(radii.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.dedup_by(|a, b| a.0 == b.0);
    let mut ring: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(a, r)| (center.0 + r * a.cos(), center.1 + r * a.sin()))
        .collect();
    ring.push(ring[0]);
    ring
}

// ---- segmentation ----

/// Exhaustive search over every segmentation into lexicon entries and
/// unigrams, keeping the one whose sequence of piece lengths is
/// lexicographically largest (longest match first at every position).
pub fn longest_first_segmentation(tokens: &[String], lexicon: &BTreeSet<String>, max_len: usize) -> Vec<String> {
    fn best(
        i: usize,
        tokens: &[String],
        lexicon: &BTreeSet<String>,
        max_len: usize,
        memo: &mut BTreeMap<usize, Vec<usize>>,
    ) -> Vec<usize> {
        if i == tokens.len() {
            return Vec::new();
        }
        if let Some(v) = memo.get(&i) {
            return v.clone();
        }
        let mut options = Vec::new();
        for len in 1..=max_len.min(tokens.len() - i) {
            if len == 1 || lexicon.contains(&tokens[i..i + len].join(" ")) {
                let mut seq = vec![len];
                seq.extend(best(i + len, tokens, lexicon, max_len, memo));
                options.push(seq);
            }
        }
        let top = options.into_iter().max().expect("unigram always applies");
        memo.insert(i, top.clone());
        top
    }
    let lens = best(0, tokens, lexicon, max_len, &mut BTreeMap::new());
    let mut out = Vec::new();
    let mut i = 0;
    for l in lens {
        out.push(tokens[i..i + l].join(" "));
        i += l;
    }
    out
}

// ---- command line ----

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_actionlens"))
        .args(args)
        .output()
        .expect("run actionlens")
}

fn ok(args: &[&str]) {
    let out = cli(args);
    assert!(
        out.status.success(),
        "actionlens {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Runs every stage on the bundled fixture, writing into `dir`.
pub fn run_fixture_pipeline(dir: &Path, seed: u64) {
    let f = fixtures();
    let (tweets, windows, counties) = (
        f.join("tweets.ndjson"),
        f.join("windows.ndjson"),
        f.join("counties.geojson"),
    );
    let p = |name: &str| dir.join(name).to_str().unwrap().to_string();
    let s = |path: &Path| path.to_str().unwrap().to_string();
    let seed = seed.to_string();
    ok(&["lexicon", &s(&tweets), "--min-count", "5", "--out", &p("lexicon.txt")]);
    ok(&["train", &s(&tweets), "--lexicon", &p("lexicon.txt"), "--seed", &seed, "--out", &p("bundle")]);
    ok(&[
        "eval", &s(&tweets), "--lexicon", &p("lexicon.txt"), "--seed", &seed,
        "--out", &p("eval.json"), "--table", &p("eval.csv"),
    ]);
    let bundle = p("bundle/bundle.json");
    ok(&["classify", &s(&tweets), "--bundle", &bundle, "--out", &p("classified.ndjson")]);
    ok(&[
        "classify", &s(&tweets), "--bundle", &bundle, "--windows", &s(&windows),
        "--out", &p("protest.ndjson"),
    ]);
    ok(&[
        "explain", &p("classified.ndjson"), "--bundle", &bundle, "--mode", "collective_force",
        "--from", "2014-11-25T02:00:00Z", "--to", "2014-11-25T03:00:00Z", "--out", &p("shift.json"),
    ]);
    ok(&["cluster", &p("classified.ndjson"), "--bundle", &bundle, "--out", &p("clusters.json")]);
    ok(&["series", &p("classified.ndjson"), "--out", &p("series.json"), "--csv", &p("series.csv")]);
    ok(&[
        "counties", &p("classified.ndjson"), "--boundaries", &s(&counties),
        "--from", "2014-11-24T18:00:00Z", "--to", "2014-11-25T18:00:00Z",
        "--out", &p("counties.json"), "--csv", &p("counties.csv"),
    ]);
}

/// Relative path -> bytes for every file under `dir`.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
