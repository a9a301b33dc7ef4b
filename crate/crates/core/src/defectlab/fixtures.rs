use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::DefectError;
use crate::geodata::{features_to_geojson, Direction, FarCodeMap, RegionOfInterest, RoadFeature};
use crate::{Dem, Point2};

/// Global position of every fixture's local (0, 0).
pub const FIXTURE_ORIGIN: (f64, f64) = (604_000.0, 5_792_000.0);

const LANE_WIDTH: f64 = 3.5;
const ARC_SPACING: f64 = 0.02;
const LEAD: f64 = 30.0;
const ROI_MARGIN: f64 = 20.0;
const DEM_MARGIN: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    Straight,
    Curve,
    TJunction,
    Crossing,
    Merge,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [Scenario::Straight, Scenario::Curve, Scenario::TJunction, Scenario::Crossing, Scenario::Merge];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureParams {
    /// Road length in meters; the arc radius for [`Scenario::Curve`].
    pub size: f64,
    pub lanes_per_direction: u32,
}

/// The three parameter sets per scenario used for the clean-map survey.
pub fn survey_parameter_sets(s: Scenario) -> [FixtureParams; 3] {
    let p = |size, lanes_per_direction| FixtureParams { size, lanes_per_direction };
    match s {
        Scenario::Straight => [p(100.0, 1), p(250.0, 2), p(500.0, 3)],
        Scenario::Curve => [p(15.0, 1), p(30.0, 2), p(60.0, 3)],
        _ => [p(100.0, 1), p(200.0, 2), p(300.0, 3)],
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub scenario: Scenario,
    pub params: FixtureParams,
    /// Global coordinates.
    pub features: Vec<RoadFeature>,
    pub roi: RegionOfInterest,
    pub dem: Dem,
}

impl Fixture {
    pub fn geojson(&self) -> Value {
        features_to_geojson(&self.features, &FarCodeMap::default())
    }
}

/// Gentle analytic terrain in fixture coordinates; |slope| stays below 0.03.
pub fn fixture_terrain(x: f64, y: f64) -> f64 {
    50.0 + 0.02 * x + (y / 50.0).sin()
}

fn feature(id: &str, pts: Vec<(f64, f64)>, lanes: u32, direction: Direction) -> RoadFeature {
    let (ox, oy) = FIXTURE_ORIGIN;
    RoadFeature {
        id: id.into(),
        geometry: pts.into_iter().map(|(x, y)| Point2::new(ox + x, oy + y)).collect(),
        lane_count: Some(lanes),
        width_m: Some(LANE_WIDTH * lanes as f64),
        direction: Some(direction),
        far_code: None,
        road_class: Default::default(),
        name: None,
    }
}

fn arc(radius: f64) -> Vec<(f64, f64)> {
    let len = radius * FRAC_PI_2;
    let n = (len / ARC_SPACING).ceil() as usize;
    (0..=n)
        .map(|i| {
            let a = FRAC_PI_2 * i as f64 / n as f64;
            (radius * a.sin(), radius - radius * a.cos())
        })
        .collect()
}

/// Deterministic road network and terrain for a scenario.
///
/// Two-way roads carry `lanes_per_direction` lanes each way, 3.5 m wide.
pub fn make_fixture(scenario: Scenario, params: FixtureParams) -> Result<Fixture, DefectError> {
    let FixtureParams { size, lanes_per_direction: n } = params;
    if !(1..=3).contains(&n) {
        return Err(DefectError::Config(format!("lanes per direction {n} outside 1..=3")));
    }
    match scenario {
        Scenario::Curve if !(size.is_finite() && size >= 15.0) => {
            return Err(DefectError::Config(format!("radius {size} m below 15 m")))
        }
        Scenario::Curve => {}
        _ if !(50.0..=500.0).contains(&size) => {
            return Err(DefectError::Config(format!("length {size} m outside 50..=500 m")))
        }
        _ => {}
    }
    let both = 2 * n;
    let h = size / 2.0;
    let features = match scenario {
        Scenario::Straight => vec![feature("road", vec![(0.0, 0.0), (size, 0.0)], both, Direction::BothWays)],
        Scenario::Curve => vec![
            feature("lead_in", vec![(-LEAD, 0.0), (0.0, 0.0)], both, Direction::BothWays),
            feature("arc", arc(size), both, Direction::BothWays),
            feature("lead_out", vec![(size, size), (size, size + LEAD)], both, Direction::BothWays),
        ],
        Scenario::TJunction => vec![
            feature("bar", vec![(-h, 0.0), (h, 0.0)], both, Direction::BothWays),
            feature("stem", vec![(0.0, -h), (0.0, -0.3)], both, Direction::BothWays),
        ],
        Scenario::Crossing => vec![
            feature("west", vec![(-h, 0.0), (0.0, 0.0)], both, Direction::BothWays),
            feature("east", vec![(h, 0.0), (0.0, 0.0)], both, Direction::BothWays),
            feature("south", vec![(0.0, -h), (0.0, 0.0)], both, Direction::BothWays),
            feature("north", vec![(0.0, h), (0.0, 0.0)], both, Direction::BothWays),
        ],
        Scenario::Merge => vec![
            feature("main_in", vec![(-h, 0.0), (0.0, 0.0)], n, Direction::ForwardOnly),
            feature("ramp", vec![(-h, -h / 4.0), (0.0, -0.5)], 1, Direction::ForwardOnly),
            feature("main_out", vec![(0.0, 0.0), (h, 0.0)], n, Direction::ForwardOnly),
        ],
    };

    let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in features.iter().flat_map(|f| &f.geometry) {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let roi = RegionOfInterest::new(lo.x - ROI_MARGIN, lo.y - ROI_MARGIN, hi.x + ROI_MARGIN, hi.y + ROI_MARGIN)
        .map_err(|e| DefectError::Config(e.to_string()))?;
    let (ox, oy) = FIXTURE_ORIGIN;
    let (dx, dy) = ((roi.min_x - DEM_MARGIN).floor(), (roi.min_y - DEM_MARGIN).floor());
    let cols = (roi.max_x + DEM_MARGIN - dx).ceil() as usize;
    let rows = (roi.max_y + DEM_MARGIN - dy).ceil() as usize;
    let dem = Dem::from_fn(dx, dy, 1.0, cols, rows, |x, y| fixture_terrain(x - ox, y - oy));
    Ok(Fixture { scenario, params, features, roi, dem })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapgen::{generate, GeneratorConfig};

    #[test]
    fn straight_attributes() {
        let f = make_fixture(Scenario::Straight, FixtureParams { size: 100.0, lanes_per_direction: 1 }).unwrap();
        let gj = f.geojson();
        let feats = gj["features"].as_array().unwrap();
        assert_eq!(feats.len(), 1);
        assert_eq!(feats[0]["properties"]["FSZ"], 2);
        assert_eq!(feats[0]["properties"]["BRF"], 7.0);
        assert_eq!(feats[0]["properties"]["FAR"], "both");
    }

    #[test]
    fn arc_points_are_on_the_circle() {
        for p in arc(15.0) {
            assert!(((p.0).hypot(p.1 - 15.0) - 15.0).abs() < 1e-12);
        }
    }

    #[test]
    fn t_junction_has_a_three_way_node() {
        let f = make_fixture(Scenario::TJunction, FixtureParams { size: 100.0, lanes_per_direction: 1 }).unwrap();
        let map = generate(&f.features, &f.roi, Some(&f.dem), &GeneratorConfig::default()).unwrap().map;
        let at_node = |id: u32| map.segments.iter().filter(|s| s.start_node_id == id || s.end_node_id == id).count();
        assert!(map.nodes.iter().any(|n| at_node(n.id) >= 3));
    }

    #[test]
    fn terrain_stays_gentle() {
        for i in 0..2000 {
            let (x, y) = (i as f64 * 0.37 - 300.0, i as f64 * 0.61 - 500.0);
            let gx = (fixture_terrain(x + 1e-4, y) - fixture_terrain(x, y)) / 1e-4;
            let gy = (fixture_terrain(x, y + 1e-4) - fixture_terrain(x, y)) / 1e-4;
            assert!(gx.hypot(gy) <= 0.05);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        let bad = |s, size, lanes_per_direction| make_fixture(s, FixtureParams { size, lanes_per_direction }).is_err();
        assert!(bad(Scenario::Straight, 40.0, 1));
        assert!(bad(Scenario::Straight, 600.0, 1));
        assert!(bad(Scenario::Curve, 10.0, 1));
        assert!(bad(Scenario::Crossing, 100.0, 4));
        assert!(bad(Scenario::Merge, 100.0, 0));
    }
}
