mod common;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, TimeZone, Utc};
use proptest::prelude::*;

use actionlens::analytics::{
    county_activity, hourly_presence, parse_boundaries, point_in_polygon, County, Polygon, UNASSIGNED,
};
use actionlens::classify::{ActionMode, Classification};
use actionlens::geo::GeoPoint;
use actionlens::ingest::Tweet;
use actionlens::stream::ClassifiedTweet;
use actionlens::synth::grid_counties_geojson;
use actionlens::Timestamp;

use common::{boundary_distance, star_ring, winding_number};

fn t0() -> Timestamp {
    Utc.with_ymd_and_hms(2014, 11, 24, 18, 0, 0).unwrap()
}

fn classified(id: usize, secs: i64, lat: f64, lon: f64, posteriors: &[f64], political: bool) -> ClassifiedTweet {
    let posteriors: BTreeMap<ActionMode, f64> =
        ActionMode::ALL_MODES.iter().copied().zip(posteriors.iter().copied()).collect();
    let positives: BTreeSet<ActionMode> = if political {
        BTreeSet::from([ActionMode::All])
    } else {
        BTreeSet::new()
    };
    ClassifiedTweet {
        tweet: Tweet {
            id: format!("c{id:04}"),
            timestamp: t0() + Duration::seconds(secs),
            lat,
            lon,
            text: "x".into(),
            labels: None,
        },
        classification: Classification { posteriors, positives },
    }
}

fn stream() -> impl Strategy<Value = Vec<ClassifiedTweet>> {
    prop::collection::vec(
        (
            -3600i64..(30 * 3600),
            38.45f64..39.0,
            -90.65f64..-90.1,
            prop::collection::vec(0.0f64..=1.0, 9),
            any::<bool>(),
        ),
        0..120,
    )
    .prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (s, lat, lon, p, pol))| classified(i, s, lat, lon, &p, pol))
            .collect()
    })
}

proptest! {
    #[test]
    fn presence_conserves_posterior_mass(tweets in stream(), from_off in 0i64..7200, len in 0i64..(24 * 3600)) {
        let from = t0() + Duration::seconds(from_off);
        let to = from + Duration::seconds(len);
        let bins = hourly_presence(&tweets, &ActionMode::ALL_MODES, from, to).unwrap();
        let (start, end) = (bins.first().map(|b| b.start), bins.last().map(|b| b.start + Duration::hours(1)));
        for w in bins.windows(2) {
            prop_assert_eq!(w[1].start - w[0].start, Duration::hours(1));
        }
        let inside: Vec<&ClassifiedTweet> = tweets
            .iter()
            .filter(|t| matches!((start, end), (Some(s), Some(e)) if t.tweet.timestamp >= s && t.tweet.timestamp < e))
            .collect();
        prop_assert_eq!(bins.iter().map(|b| b.tweet_count as usize).sum::<usize>(), inside.len());
        for mode in ActionMode::ALL_MODES {
            let binned: f64 = bins.iter().map(|b| b.presence[&mode]).sum();
            let direct: f64 = inside.iter().map(|t| t.classification.posteriors[&mode]).sum();
            prop_assert!((binned - direct).abs() <= 1e-9, "{mode}: {binned} vs {direct}");
        }
    }

    #[test]
    fn county_partition_conserves_counts(tweets in stream()) {
        let counties = parse_boundaries(&grid_counties_geojson(38.5, -90.6, 3, 3, 0.15)).unwrap();
        let (from, to) = (t0(), t0() + Duration::hours(24));
        let table = county_activity(&tweets, &counties, from, to).unwrap();
        let assigned: u64 = table.counties.iter().map(|c| c.tweet_count).sum::<u64>() + table.unassigned.tweet_count;
        prop_assert_eq!(assigned + table.out_of_range, tweets.len() as u64);
        let political: u64 = table.counties.iter().map(|c| c.political_count).sum::<u64>() + table.unassigned.political_count;
        let expected = tweets
            .iter()
            .filter(|t| t.tweet.timestamp >= from && t.tweet.timestamp < to)
            .filter(|t| t.classification.positives.contains(&ActionMode::All))
            .count() as u64;
        prop_assert_eq!(political, expected);
        prop_assert_eq!(table.unassigned.county_id.as_str(), UNASSIGNED);
    }

    #[test]
    fn even_odd_agrees_with_winding_number(
        angles in prop::collection::vec(0.0f64..std::f64::consts::TAU, 3..12),
        radii in prop::collection::vec(0.2f64..1.0, 12),
        hole_scale in 0.05f64..0.15,
        probes in prop::collection::vec((-1.2f64..1.2, -1.2f64..1.2), 50),
    ) {
        let outer = star_ring((0.0, 0.0), &angles, &radii);
        prop_assume!(outer.len() >= 4);
        let hole: Vec<(f64, f64)> = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .map(|&(x, y)| (x * hole_scale, y * hole_scale))
            .collect();
        let solid = Polygon::new(outer.clone(), vec![]).unwrap();
        let holed = Polygon::new(outer.clone(), vec![hole.clone()]).unwrap();
        // the hole must sit inside the exterior for the comparison to be meaningful
        let hole_inside = hole.iter().all(|&p| winding_number(&outer, p) != 0 && boundary_distance(&outer, p) > 1e-9);
        for (x, y) in probes {
            if boundary_distance(&outer, (x, y)) < 1e-9 || boundary_distance(&hole, (x, y)) < 1e-9 {
                continue;
            }
            let p = GeoPoint::new(y, x);
            let in_outer = winding_number(&outer, (x, y)) != 0;
            prop_assert_eq!(point_in_polygon(p, &solid), in_outer);
            if hole_inside {
                let in_hole = winding_number(&hole, (x, y)) != 0;
                prop_assert_eq!(point_in_polygon(p, &holed), in_outer && !in_hole);
            }
        }
        // vertices are on the boundary and count as inside
        for &(x, y) in &outer {
            prop_assert!(point_in_polygon(GeoPoint::new(y, x), &solid));
        }
    }
}

#[test]
fn planted_county_rates_are_recovered_exactly() {
    let counties = parse_boundaries(&grid_counties_geojson(38.5, -90.6, 2, 2, 0.1)).unwrap();
    // (county, tweets, political)
    let plan = [("r0c0", 10, 3), ("r0c1", 7, 7), ("r1c0", 9, 0), ("r1c1", 0, 0)];
    let mut tweets = Vec::new();
    for (ci, &(id, n, k)) in plan.iter().enumerate() {
        let (r, c) = (ci / 2, ci % 2);
        assert_eq!(counties[ci].id, id);
        for j in 0..n {
            let lat = 38.5 + r as f64 * 0.1 + 0.01 + j as f64 * 0.005;
            let lon = -90.6 + c as f64 * 0.1 + 0.02;
            tweets.push(classified(tweets.len(), j as i64 * 60, lat, lon, &[0.5; 9], j < k));
        }
    }
    // two outside every county, one political
    tweets.push(classified(900, 10, 40.0, -95.0, &[0.5; 9], true));
    tweets.push(classified(901, 10, 40.0, -95.0, &[0.5; 9], false));
    // one on the shared edge of r0c0 and r0c1 goes to the first in file order
    tweets.push(classified(902, 10, 38.55, -90.5, &[0.5; 9], false));
    // one out of range
    tweets.push(classified(903, -10, 38.55, -90.55, &[0.5; 9], true));

    let table = county_activity(&tweets, &counties, t0(), t0() + Duration::hours(1)).unwrap();
    let got: Vec<(&str, u64, u64, Option<f64>)> = table
        .counties
        .iter()
        .map(|c| (c.county_id.as_str(), c.tweet_count, c.political_count, c.political_pct))
        .collect();
    assert_eq!(
        got,
        vec![
            ("r0c0", 11, 3, Some(300.0 / 11.0)),
            ("r0c1", 7, 7, Some(100.0)),
            ("r1c0", 9, 0, Some(0.0)),
            ("r1c1", 0, 0, None),
        ]
    );
    assert_eq!((table.unassigned.tweet_count, table.unassigned.political_count), (2, 1));
    assert_eq!(table.out_of_range, 1);
}

#[test]
fn multipolygon_and_numeric_ids_parse() {
    let text = r#"{"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"county_id":29189},"geometry":{"type":"MultiPolygon","coordinates":[
        [[[0,0],[1,0],[1,1],[0,1],[0,0]]],
        [[[5,5],[6,5],[6,6],[5,6],[5,5]]]]}}]}"#;
    let counties: Vec<County> = parse_boundaries(text).unwrap();
    assert_eq!(counties[0].id, "29189");
    assert!(counties[0].contains(GeoPoint::new(5.5, 5.5)));
    assert!(!counties[0].contains(GeoPoint::new(3.0, 3.0)));
    assert!(parse_boundaries(r#"{"type":"FeatureCollection","features":[{"type":"Feature","properties":{"county_id":"x"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[0,0]]]}}]}"#).is_err());
}
