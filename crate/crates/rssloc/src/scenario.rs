//! Geometric world description: area bounds, sensing-unit placement, and
//! transmitter tracks.
//!
//! A [`Scenario`] is the ground-truth deployment: a bounding box, a fixed
//! ordered list of sensing units (the list index identifies a unit
//! everywhere downstream), the transmitter antenna height, and the
//! reference distance of the path-loss model. Scenarios round-trip through
//! a small JSON schema:
//!
//! ```json
//! { "area_min": [0.0, 0.0, 0.0],
//!   "area_max": [86.3, 2.8, 2.5],
//!   "d0": 1.0,
//!   "tx_height": 0.5,
//!   "sensing_units": [[8.39, 0.3, 2.5], ...] }
//! ```
//!
//! All coordinates are meters in a local Cartesian frame.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the local Cartesian frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

/// Corridor dimensions that anchor the default sensing-unit placement rule.
/// The first unit of a 6-unit deployment in an 86.3 m corridor sits at
/// x = 8.39 m; other corridor lengths scale the margin proportionally.
const REF_CORRIDOR_LENGTH_M: f64 = 86.3;
const REF_FIRST_SU_X_M: f64 = 8.39;

/// Lateral offset of wall-mounted sensing units from the wall line.
const WALL_OFFSET_M: f64 = 0.3;

/// Deployment geometry: bounding box, sensing units, and model reference
/// distance.
///
/// The sensing-unit list order is stable; index `j` identifies unit `j` in
/// every RSS vector, covariance matrix, and dataset column downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub area_min: Point3,
    pub area_max: Point3,
    /// Reference distance of the path-loss model, meters (> 0).
    pub d0: f64,
    /// Transmit antenna height above the floor, meters.
    pub tx_height: f64,
    pub sensing_units: Vec<Point3>,
}

impl Scenario {
    /// Number of sensing units N_s.
    pub fn n_sensing_units(&self) -> usize {
        self.sensing_units.len()
    }

    /// True if `p` lies within or on the bounding box.
    pub fn contains(&self, p: Point3) -> bool {
        p.x >= self.area_min.x
            && p.x <= self.area_max.x
            && p.y >= self.area_min.y
            && p.y <= self.area_max.y
            && p.z >= self.area_min.z
            && p.z <= self.area_max.z
    }

    /// Checks every structural invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let fail = |field, reason: String| Err(Error::InvalidScenario { field, reason });
        if !self.area_min.is_finite() {
            return fail("area_min", "coordinates must be finite".into());
        }
        if !self.area_max.is_finite() {
            return fail("area_max", "coordinates must be finite".into());
        }
        if !(self.area_min.x < self.area_max.x) || !(self.area_min.y < self.area_max.y) {
            return fail(
                "area_max",
                "bounds must satisfy area_min < area_max in x and y".into(),
            );
        }
        if !(self.area_min.z <= self.area_max.z) {
            return fail("area_max", "bounds must satisfy min z <= max z".into());
        }
        if !(self.d0 > 0.0) || !self.d0.is_finite() {
            return fail("d0", format!("reference distance must be > 0, got {}", self.d0));
        }
        if !self.tx_height.is_finite() {
            return fail("tx_height", "must be finite".into());
        }
        if self.sensing_units.is_empty() {
            return fail("sensing_units", "at least one sensing unit is required".into());
        }
        for (j, su) in self.sensing_units.iter().enumerate() {
            if !su.is_finite() {
                return fail(
                    "sensing_units",
                    format!("unit {j} has non-finite coordinates"),
                );
            }
            if !self.contains(*su) {
                return fail(
                    "sensing_units",
                    format!(
                        "unit {j} at ({}, {}, {}) lies outside the area bounds",
                        su.x, su.y, su.z
                    ),
                );
            }
        }
        Ok(())
    }

    /// Loads and validates a scenario from a JSON file.
    pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scenario: Scenario =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        scenario
            .validate()
            .map_err(|e| Error::json(path, e))?;
        Ok(scenario)
    }

    /// Writes the scenario as pretty-printed JSON.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("scenario serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Builds a corridor deployment with `n_su` wall-mounted sensing units.
///
/// Units alternate between the two long walls (y = 0.3 and y = width − 0.3,
/// clamped to the corridor half-width) and are evenly spaced in x between a
/// margin and its mirror image. The margin scales with corridor length and
/// is anchored so that a 6-unit deployment in an 86.3 m corridor puts unit
/// 0 at x = 8.39 m. A single unit sits at the margin itself.
pub fn make_corridor_scenario(
    n_su: usize,
    length: f64,
    width: f64,
    su_height: f64,
    tx_height: f64,
) -> Result<Scenario> {
    if n_su == 0 {
        return Err(Error::InvalidArgument("n_su must be at least 1".into()));
    }
    for (name, v) in [
        ("length", length),
        ("width", width),
        ("su_height", su_height),
        ("tx_height", tx_height),
    ] {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be finite")));
        }
    }
    if length <= 0.0 || width <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "corridor dimensions must be positive, got length={length} width={width}"
        )));
    }
    if su_height < 0.0 || tx_height < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "heights must be non-negative, got su_height={su_height} tx_height={tx_height}"
        )));
    }

    // (length / ref_length) * ref_margin rather than length * ratio: the
    // former reproduces the anchor coordinate exactly when length equals the
    // reference corridor length.
    let margin = (length / REF_CORRIDOR_LENGTH_M) * REF_FIRST_SU_X_M;
    let wall_offset = WALL_OFFSET_M.min(width / 2.0);
    let spacing = if n_su > 1 {
        (length - 2.0 * margin) / (n_su - 1) as f64
    } else {
        0.0
    };

    let sensing_units = (0..n_su)
        .map(|j| {
            let x = margin + j as f64 * spacing;
            let y = if j % 2 == 0 { wall_offset } else { width - wall_offset };
            Point3::new(x, y, su_height)
        })
        .collect();

    let scenario = Scenario {
        area_min: Point3::new(0.0, 0.0, 0.0),
        area_max: Point3::new(length, width, su_height.max(tx_height)),
        d0: 1.0,
        tx_height,
        sensing_units,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// An ordered list of transmitter positions with a round tag per point.
///
/// Round tags group points that belong to one sweep of the area; they are
/// carried through to generated datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    points: Vec<Point3>,
    round_ids: Vec<u32>,
}

impl Track {
    /// Builds a track from explicit points, checking them against the
    /// scenario bounds.
    pub fn new(scenario: &Scenario, points: Vec<Point3>, round_ids: Vec<u32>) -> Result<Track> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("track must not be empty".into()));
        }
        if points.len() != round_ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} track points but {} round ids",
                points.len(),
                round_ids.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() || !scenario.contains(*p) {
                return Err(Error::InvalidArgument(format!(
                    "track point {i} at ({}, {}, {}) lies outside the area bounds",
                    p.x, p.y, p.z
                )));
            }
        }
        Ok(Track { points, round_ids })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn round_ids(&self) -> &[u32] {
        &self.round_ids
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Iterates over (round id, position) pairs.
    pub fn iter(&self) -> impl Iterator<Item = (u32, Point3)> + '_ {
        self.round_ids.iter().copied().zip(self.points.iter().copied())
    }
}

/// Builds a sweep track: for each lane y, the transmitter steps from
/// `x_start` to `x_end` and back at the scenario's `tx_height`.
///
/// The forward pass visits `x_start + k*step` for k = 0..=K with
/// K = floor((x_end − x_start)/step); the return pass revisits the same x
/// values in reverse, with the turnaround point emitted once. Each lane is
/// one round; a lane therefore contributes 2K + 1 points.
pub fn make_track(
    scenario: &Scenario,
    x_start: f64,
    x_end: f64,
    step: f64,
    y_lanes: &[f64],
) -> Result<Track> {
    if y_lanes.is_empty() {
        return Err(Error::InvalidArgument("at least one y lane is required".into()));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {step}")));
    }
    if !(x_end >= x_start) {
        return Err(Error::InvalidArgument(format!(
            "x_end ({x_end}) must not be less than x_start ({x_start})"
        )));
    }
    for (name, x) in [("x_start", x_start), ("x_end", x_end)] {
        if !x.is_finite() || x < scenario.area_min.x || x > scenario.area_max.x {
            return Err(Error::InvalidArgument(format!(
                "{name}={x} lies outside the area x bounds"
            )));
        }
    }
    for &y in y_lanes {
        if !y.is_finite() || y < scenario.area_min.y || y > scenario.area_max.y {
            return Err(Error::InvalidArgument(format!(
                "lane y={y} lies outside the area y bounds"
            )));
        }
    }
    let z = scenario.tx_height;
    if z < scenario.area_min.z || z > scenario.area_max.z {
        return Err(Error::InvalidArgument(format!(
            "tx_height={z} lies outside the area z bounds"
        )));
    }

    // Small slack so an exact multiple of `step` is not lost to rounding.
    let k_max = ((x_end - x_start) / step + 1e-9).floor() as usize;
    let x_at = |k: usize| (x_start + k as f64 * step).min(x_end);

    let per_lane = 2 * k_max + 1;
    let mut points = Vec::with_capacity(per_lane * y_lanes.len());
    let mut round_ids = Vec::with_capacity(per_lane * y_lanes.len());
    for (round, &y) in y_lanes.iter().enumerate() {
        for k in 0..=k_max {
            points.push(Point3::new(x_at(k), y, z));
        }
        for k in (0..k_max).rev() {
            points.push(Point3::new(x_at(k), y, z));
        }
        round_ids.extend(std::iter::repeat(round as u32).take(per_lane));
    }
    Track::new(scenario, points, round_ids)
}

/// Recipe for [`make_track`], loadable from JSON. This is the on-disk track
/// format consumed by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSpec {
    pub x_start: f64,
    pub x_end: f64,
    pub step: f64,
    pub y_lanes: Vec<f64>,
}

impl TrackSpec {
    /// Materializes the track against a scenario.
    pub fn build(&self, scenario: &Scenario) -> Result<Track> {
        make_track(scenario, self.x_start, self.x_end, self.step, &self.y_lanes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrackSpec> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("track spec serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corridor() -> Scenario {
        make_corridor_scenario(6, 86.3, 2.8, 2.5, 0.5).unwrap()
    }

    #[test]
    fn corridor_anchors_first_unit() {
        let s = corridor();
        let su0 = s.sensing_units[0];
        assert_eq!(su0.x, 8.39);
        assert_eq!(su0.y, 0.3);
        assert_eq!(su0.z, 2.5);
        assert_eq!(s.n_sensing_units(), 6);
        assert_eq!(s.d0, 1.0);
    }

    #[test]
    fn corridor_alternates_walls_and_is_symmetric() {
        let s = corridor();
        for (j, su) in s.sensing_units.iter().enumerate() {
            let expected_y = if j % 2 == 0 { 0.3 } else { 2.8 - 0.3 };
            assert!((su.y - expected_y).abs() < 1e-12, "unit {j} y={}", su.y);
        }
        let last = s.sensing_units.last().unwrap();
        assert!((last.x - (86.3 - 8.39)).abs() < 1e-9);
    }

    #[test]
    fn corridor_single_unit_is_valid() {
        let s = make_corridor_scenario(1, 10.0, 2.0, 2.5, 0.5).unwrap();
        assert_eq!(s.n_sensing_units(), 1);
        s.validate().unwrap();
    }

    #[test]
    fn corridor_two_units_follow_placement_rule() {
        // Hand evaluation of the rule: margin scales with length, units sit
        // at the margin and its mirror image on opposite walls.
        let s = make_corridor_scenario(2, 20.0, 2.8, 2.5, 0.5).unwrap();
        let expected_x0 = (20.0 / 86.3) * 8.39;
        assert!((s.sensing_units[0].x - expected_x0).abs() < 1e-12);
        assert!((s.sensing_units[1].x - (20.0 - expected_x0)).abs() < 1e-12);
        assert_eq!(s.sensing_units[0].y, 0.3);
        assert!((s.sensing_units[1].y - 2.5).abs() < 1e-12);
    }

    #[test]
    fn corridor_rejects_bad_dimensions() {
        assert!(make_corridor_scenario(0, 10.0, 2.0, 2.5, 0.5).is_err());
        assert!(make_corridor_scenario(4, 0.0, 2.0, 2.5, 0.5).is_err());
        assert!(make_corridor_scenario(4, 10.0, -1.0, 2.5, 0.5).is_err());
    }

    #[test]
    fn track_forward_and_back_single_turnaround() {
        let s = make_corridor_scenario(2, 10.0, 2.8, 2.5, 0.5).unwrap();
        let t = make_track(&s, 0.0, 1.0, 0.5, &[1.0]).unwrap();
        let xs: Vec<f64> = t.points().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0, 0.5, 0.0]);
        assert!(t.points().iter().all(|p| p.y == 1.0 && p.z == 0.5));
        assert_eq!(t.round_ids(), &[0, 0, 0, 0, 0]);
    }

    #[test]
    fn track_degenerate_range_gives_one_point_per_lane() {
        let s = make_corridor_scenario(2, 10.0, 2.8, 2.5, 0.5).unwrap();
        let t = make_track(&s, 3.0, 3.0, 0.25, &[0.8, 1.8]).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.round_ids(), &[0, 1]);
    }

    #[test]
    fn track_full_scale_point_count() {
        // 4 lanes, x from 9 to 79.32 in 0.12 m steps: 586 steps out, so
        // 587 + 586 points per lane and 4692 in total.
        let s = corridor();
        let t = make_track(&s, 9.0, 79.32, 0.12, &[0.8, 1.2, 1.4, 1.8]).unwrap();
        assert_eq!(t.len(), 4 * (2 * 586 + 1));
        assert_eq!(t.len(), 4692);
        let last = t.points().last().unwrap();
        assert_eq!((last.x, last.y), (9.0, 1.8));
    }

    #[test]
    fn track_rejects_bad_arguments() {
        let s = corridor();
        assert!(make_track(&s, 9.0, 79.32, 0.12, &[]).is_err());
        assert!(make_track(&s, 9.0, 79.32, 0.0, &[1.0]).is_err());
        assert!(make_track(&s, 9.0, 79.32, 0.12, &[5.0]).is_err());
        assert!(make_track(&s, -1.0, 79.32, 0.12, &[1.0]).is_err());
        assert!(make_track(&s, 10.0, 9.0, 0.12, &[1.0]).is_err());
    }

    #[test]
    fn scenario_json_round_trip_is_exact() {
        let s = corridor();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.json");
        s.save(&path).unwrap();
        let loaded = Scenario::load(&path).unwrap();
        assert_eq!(s, loaded);
    }

    #[test]
    fn scenario_load_rejects_invariant_violations() {
        let dir = tempfile::tempdir().unwrap();

        let no_units = r#"{"area_min":[0,0,0],"area_max":[10,2,3],"d0":1.0,
                           "tx_height":0.5,"sensing_units":[]}"#;
        let path = dir.path().join("empty.json");
        fs::write(&path, no_units).unwrap();
        let err = Scenario::load(&path).unwrap_err().to_string();
        assert!(err.contains("sensing_units"), "{err}");

        let outside = r#"{"area_min":[0,0,0],"area_max":[10,2,3],"d0":1.0,
                          "tx_height":0.5,"sensing_units":[[11,1,2]]}"#;
        let path = dir.path().join("outside.json");
        fs::write(&path, outside).unwrap();
        let err = Scenario::load(&path).unwrap_err().to_string();
        assert!(err.contains("outside the area bounds"), "{err}");

        let bad_d0 = r#"{"area_min":[0,0,0],"area_max":[10,2,3],"d0":0.0,
                         "tx_height":0.5,"sensing_units":[[1,1,2]]}"#;
        let path = dir.path().join("d0.json");
        fs::write(&path, bad_d0).unwrap();
        let err = Scenario::load(&path).unwrap_err().to_string();
        assert!(err.contains("d0"), "{err}");
    }

    #[test]
    fn track_spec_round_trip() {
        let spec = TrackSpec {
            x_start: 9.0,
            x_end: 79.32,
            step: 0.12,
            y_lanes: vec![0.8, 1.2, 1.4, 1.8],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("track.json");
        spec.save(&path).unwrap();
        assert_eq!(TrackSpec::load(&path).unwrap(), spec);
    }

    proptest! {
        #[test]
        fn corridor_always_satisfies_invariants(
            n_su in 1usize..40,
            length in 0.5f64..200.0,
            width in 0.2f64..10.0,
            su_height in 0.0f64..5.0,
            tx_height in 0.0f64..5.0,
        ) {
            let s = make_corridor_scenario(n_su, length, width, su_height, tx_height).unwrap();
            prop_assert!(s.validate().is_ok());
        }

        #[test]
        fn track_points_never_exit_bounds(
            length in 5.0f64..100.0,
            width in 1.0f64..5.0,
            start_frac in 0.0f64..1.0,
            span_frac in 0.0f64..1.0,
            step in 0.05f64..2.0,
            lane_frac in 0.0f64..1.0,
        ) {
            let s = make_corridor_scenario(3, length, width, 2.5, 0.5).unwrap();
            let x_start = start_frac * length;
            let x_end = x_start + span_frac * (length - x_start);
            let lane = lane_frac * width;
            let t = make_track(&s, x_start, x_end, step, &[lane]).unwrap();
            prop_assert!(t.points().iter().all(|p| s.contains(*p)));
        }
    }
}
