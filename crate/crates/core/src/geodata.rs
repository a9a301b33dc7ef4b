//! Road-centerline ingest: GeoJSON loading, region-of-interest clipping,
//! attribute semantics, and the local metric frame.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::geom::segment_intersects_rect;
use crate::Point2;

/// Coincidence threshold for consecutive centerline vertices, meters.
pub const COINCIDENT_EPS: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum GeoDataError {
    #[error("malformed GeoJSON at byte {offset}: {message}")]
    Json { offset: usize, message: String },
    #[error("not a GeoJSON FeatureCollection: {0}")]
    NotFeatureCollection(String),
    #[error("invalid region of interest: {0}")]
    InvalidRoi(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Axis-aligned bounding box in the dataset's projected CRS, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionOfInterest {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl RegionOfInterest {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self, GeoDataError> {
        let roi = Self { min_x, min_y, max_x, max_y };
        roi.validate()?;
        Ok(roi)
    }

    pub fn validate(&self) -> Result<(), GeoDataError> {
        let finite = [self.min_x, self.min_y, self.max_x, self.max_y].iter().all(|v| v.is_finite());
        if !finite || self.min_x >= self.max_x || self.min_y >= self.max_y {
            return Err(GeoDataError::InvalidRoi(format!(
                "need min < max on both axes, got ({}, {}, {}, {})",
                self.min_x, self.min_y, self.max_x, self.max_y
            )));
        }
        Ok(())
    }

    /// Parses `x0,y0,x1,y1`.
    pub fn parse(text: &str) -> Result<Self, GeoDataError> {
        let vals: Vec<f64> = text
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| GeoDataError::InvalidRoi(format!("{text:?}: {e}")))?;
        match vals[..] {
            [a, b, c, d] => Self::new(a, b, c, d),
            _ => Err(GeoDataError::InvalidRoi(format!("{text:?}: expected four comma-separated numbers"))),
        }
    }

    pub fn area(&self) -> f64 {
        (self.max_x - self.min_x) * (self.max_y - self.min_y)
    }

    pub fn min(&self) -> Point2 {
        Point2::new(self.min_x, self.min_y)
    }

    pub fn max(&self) -> Point2 {
        Point2::new(self.max_x, self.max_y)
    }

    /// Whether any edge of the polyline touches the rectangle.
    pub fn intersects(&self, pts: &[Point2]) -> bool {
        let (lo, hi) = (self.min(), self.max());
        match pts {
            [] => false,
            [p] => p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y,
            _ => pts.windows(2).any(|w| segment_intersects_rect(w[0], w[1], lo, hi)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    BothWays,
    ForwardOnly,
    BackwardOnly,
}

/// FAR raw-code lookup. Keys are compared case-insensitively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarCodeMap(pub BTreeMap<String, Direction>);

impl Default for FarCodeMap {
    fn default() -> Self {
        let mut m = BTreeMap::new();
        m.insert("both".to_string(), Direction::BothWays);
        m.insert("in_direction".to_string(), Direction::ForwardOnly);
        m.insert("against_direction".to_string(), Direction::BackwardOnly);
        Self(m)
    }
}

impl FarCodeMap {
    pub fn lookup(&self, code: &str) -> Option<Direction> {
        let code = code.trim();
        self.0
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(code))
            .map(|(_, d)| *d)
    }

    /// Canonical code for a direction, used when writing cache files.
    pub fn code_for(&self, dir: Direction) -> Option<&str> {
        self.0.iter().find(|(_, d)| **d == dir).map(|(k, _)| k.as_str())
    }
}

/// A road centerline with its parsed Basis-DLM style attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadFeature {
    pub id: String,
    pub geometry: Vec<Point2>,
    /// FSZ
    pub lane_count: Option<u32>,
    /// BRF, meters
    pub width_m: Option<f64>,
    /// FAR, mapped through [`FarCodeMap`]
    pub direction: Option<Direction>,
    /// Raw FAR code as found in the source.
    pub far_code: Option<String>,
    /// FKT, WDM and ZUS tags, keyed by upper-case attribute name.
    pub road_class: BTreeMap<String, String>,
    /// NAM, falling back to BEZ.
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    FromAttribute,
    Defaulted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticsProvenance {
    pub lane_count: Provenance,
    pub width_m: Provenance,
    pub direction: Provenance,
}

/// Lane count, width and direction with every default applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSemantics {
    pub lane_count: u32,
    pub width_m: f64,
    pub direction: Direction,
    pub provenance: SemanticsProvenance,
}

impl ResolvedSemantics {
    pub fn lane_width(&self) -> f64 {
        self.width_m / self.lane_count as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SemanticDefaults {
    pub default_lane_width: f64,
    /// FSZ counts lanes across both directions (true) or per direction (false).
    pub fsz_is_total: bool,
    pub far_codes: FarCodeMap,
}

impl Default for SemanticDefaults {
    fn default() -> Self {
        Self { default_lane_width: 3.25, fsz_is_total: true, far_codes: FarCodeMap::default() }
    }
}

/// Global coordinates of the local frame's origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OriginOffset {
    #[serde(rename = "x")]
    pub offset_x: f64,
    #[serde(rename = "y")]
    pub offset_y: f64,
}

impl OriginOffset {
    pub fn to_global(&self, p: Point2) -> Point2 {
        Point2::new(p.x + self.offset_x, p.y + self.offset_y)
    }

    pub fn to_local(&self, p: Point2) -> Point2 {
        Point2::new(p.x - self.offset_x, p.y - self.offset_y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipEntry {
    pub index: usize,
    pub reason: String,
}

/// Per-feature outcomes of a load that did not abort it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub skipped: Vec<SkipEntry>,
    /// Indices of features whose id was synthesized because OBJID was missing.
    pub defaulted_ids: Vec<usize>,
    pub warnings: Vec<String>,
}

impl LoadReport {
    /// Flat list of entries, as stored in the cache file.
    pub fn entries(&self) -> Vec<Value> {
        let mut out = Vec::new();
        for s in &self.skipped {
            out.push(json!({"kind": "skipped", "index": s.index, "message": s.reason}));
        }
        for i in &self.defaulted_ids {
            out.push(json!({"kind": "defaulted_id", "index": i, "message": format!("OBJID missing, using feat-{i}")}));
        }
        for w in &self.warnings {
            out.push(json!({"kind": "warning", "message": w}));
        }
        out
    }
}

const CLASS_KEYS: [&str; 3] = ["FKT", "WDM", "ZUS"];

pub fn load_road_features(path: &Path, far: &FarCodeMap) -> Result<(Vec<RoadFeature>, LoadReport), GeoDataError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| GeoDataError::Io { path: path.display().to_string(), source })?;
    parse_road_features(&text, far)
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Parses a GeoJSON FeatureCollection of LineString features, preserving order.
pub fn parse_road_features(text: &str, far: &FarCodeMap) -> Result<(Vec<RoadFeature>, LoadReport), GeoDataError> {
    let root: Value = serde_json::from_str(text).map_err(|e| GeoDataError::Json {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(GeoDataError::NotFeatureCollection("top-level type must be \"FeatureCollection\"".into()));
    }
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| GeoDataError::NotFeatureCollection("missing \"features\" array".into()))?;

    let mut report = LoadReport::default();
    let mut out = Vec::new();
    for (index, feat) in features.iter().enumerate() {
        match parse_feature(index, feat, far, &mut report) {
            Ok(f) => out.push(f),
            Err(reason) => report.skipped.push(SkipEntry { index, reason }),
        }
    }
    Ok((out, report))
}

fn parse_feature(index: usize, feat: &Value, far: &FarCodeMap, report: &mut LoadReport) -> Result<RoadFeature, String> {
    let geom = feat.get("geometry").ok_or("feature has no geometry")?;
    let gtype = geom.get("type").and_then(Value::as_str).unwrap_or("null");
    if gtype != "LineString" {
        return Err(format!("geometry type {gtype} is not LineString"));
    }
    let coords = geom
        .get("coordinates")
        .and_then(Value::as_array)
        .ok_or("LineString without coordinates")?;
    let mut geometry: Vec<Point2> = Vec::with_capacity(coords.len());
    for c in coords {
        let pos = c.as_array().filter(|a| a.len() >= 2).ok_or("coordinate is not a position")?;
        let x = pos[0].as_f64().ok_or("non-numeric coordinate")?;
        let y = pos[1].as_f64().ok_or("non-numeric coordinate")?;
        let p = Point2::new(x, y);
        if geometry.last().is_none_or(|q| q.dist(p) > COINCIDENT_EPS) {
            geometry.push(p);
        }
    }
    if geometry.len() < 2 {
        return Err("LineString has fewer than two distinct points".into());
    }

    // Case-insensitive attribute lookup.
    let props: BTreeMap<String, &Value> = feat
        .get("properties")
        .and_then(Value::as_object)
        .map(|m| m.iter().map(|(k, v)| (k.to_ascii_uppercase(), v)).collect())
        .unwrap_or_default();
    let text_of = |key: &str| props.get(key).and_then(|v| scalar_text(v));
    let num_of = |key: &str| props.get(key).and_then(|v| scalar_number(v));

    let id = match text_of("OBJID") {
        Some(id) => id,
        None => {
            report.defaulted_ids.push(index);
            format!("feat-{index}")
        }
    };

    let lane_count = match num_of("FSZ") {
        Some(v) if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => Some(v as u32),
        Some(v) => {
            report.warnings.push(format!("{id}: FSZ {v} is not a positive integer, ignored"));
            None
        }
        None => None,
    };
    let width_m = match num_of("BRF") {
        Some(v) if v > 0.0 && v.is_finite() => Some(v),
        Some(v) => {
            report.warnings.push(format!("{id}: BRF {v} is not positive, ignored"));
            None
        }
        None => None,
    };
    let far_code = text_of("FAR");
    let direction = far_code.as_deref().map(|code| {
        far.lookup(code).unwrap_or_else(|| {
            report.warnings.push(format!("{id}: unknown FAR code {code:?}, assuming BothWays"));
            Direction::BothWays
        })
    });
    let road_class = CLASS_KEYS
        .iter()
        .filter_map(|k| text_of(k).map(|v| (k.to_string(), v)))
        .collect();
    let name = text_of("NAM").or_else(|| text_of("BEZ"));

    Ok(RoadFeature { id, geometry, lane_count, width_m, direction, far_code, road_class, name })
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.trim().is_empty() => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn scalar_number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// Keeps, whole, every feature whose geometry touches the ROI.
pub fn clip_to_roi(features: &[RoadFeature], roi: &RegionOfInterest) -> Vec<RoadFeature> {
    features.iter().filter(|f| roi.intersects(&f.geometry)).cloned().collect()
}

pub fn resolve_semantics(feature: &RoadFeature, defaults: &SemanticDefaults) -> ResolvedSemantics {
    use Provenance::*;
    let lane_w = defaults.default_lane_width;
    let direction = feature.direction.unwrap_or(Direction::BothWays);
    let from_fsz = feature.lane_count.map(|n| {
        if defaults.fsz_is_total || direction != Direction::BothWays {
            n
        } else {
            n * 2
        }
    });
    let lane_count = match (from_fsz, feature.width_m) {
        (Some(n), _) => n,
        (None, Some(w)) => ((w / lane_w).round() as i64).clamp(1, 8) as u32,
        (None, None) => 1,
    };
    let width_m = feature.width_m.unwrap_or(lane_count as f64 * lane_w);
    ResolvedSemantics {
        lane_count,
        width_m,
        direction,
        provenance: SemanticsProvenance {
            lane_count: if feature.lane_count.is_some() { FromAttribute } else { Defaulted },
            width_m: if feature.width_m.is_some() { FromAttribute } else { Defaulted },
            direction: if feature.direction.is_some() { FromAttribute } else { Defaulted },
        },
    }
}

/// Translates every point so that the ROI's lower-left corner becomes the origin.
pub fn to_local(features: &[RoadFeature], roi: &RegionOfInterest) -> (Vec<RoadFeature>, OriginOffset) {
    let offset = OriginOffset { offset_x: roi.min_x, offset_y: roi.min_y };
    let local = features
        .iter()
        .map(|f| RoadFeature {
            geometry: f.geometry.iter().map(|p| offset.to_local(*p)).collect(),
            ..f.clone()
        })
        .collect();
    (local, offset)
}

/// Serializes features back to GeoJSON with the original attribute keys.
pub fn features_to_geojson(features: &[RoadFeature], far: &FarCodeMap) -> Value {
    let feats: Vec<Value> = features
        .iter()
        .map(|f| {
            let mut props = Map::new();
            props.insert("OBJID".into(), json!(f.id));
            if let Some(n) = f.lane_count {
                props.insert("FSZ".into(), json!(n));
            }
            if let Some(w) = f.width_m {
                props.insert("BRF".into(), json!(w));
            }
            let far_code = f.far_code.clone().or_else(|| f.direction.and_then(|d| far.code_for(d)).map(String::from));
            if let Some(code) = far_code {
                props.insert("FAR".into(), json!(code));
            }
            for (k, v) in &f.road_class {
                props.insert(k.clone(), json!(v));
            }
            if let Some(n) = &f.name {
                props.insert("NAM".into(), json!(n));
            }
            let coords: Vec<Value> = f.geometry.iter().map(|p| json!([p.x, p.y])).collect();
            json!({
                "type": "Feature",
                "properties": props,
                "geometry": {"type": "LineString", "coordinates": coords},
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": feats})
}

/// Clipped-feature cache: the input schema plus `origin_offset` and `load_report`.
///
/// Coordinates stay global, so a cache file is itself a valid road input.
pub fn cache_document(features: &[RoadFeature], offset: OriginOffset, report: &LoadReport, far: &FarCodeMap) -> Value {
    let mut doc = features_to_geojson(features, far);
    doc["origin_offset"] = json!({"x": offset.offset_x, "y": offset.offset_y});
    doc["load_report"] = Value::Array(report.entries());
    doc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fc(features: &str) -> String {
        format!(r#"{{"type":"FeatureCollection","features":[{features}]}}"#)
    }

    fn line(props: &str, coords: &str) -> String {
        format!(r#"{{"type":"Feature","properties":{{{props}}},"geometry":{{"type":"LineString","coordinates":{coords}}}}}"#)
    }

    #[test]
    fn direct_attribute_mapping() {
        let text = fc(&line(r#""OBJID":"a1","FSZ":2,"BRF":7.0,"FAR":"both""#, "[[0,0],[100,0]]"));
        let (f, rep) = parse_road_features(&text, &FarCodeMap::default()).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].lane_count, Some(2));
        assert_eq!(f[0].width_m, Some(7.0));
        assert_eq!(f[0].direction, Some(Direction::BothWays));
        assert!(rep.skipped.is_empty() && rep.defaulted_ids.is_empty());
    }

    #[test]
    fn absent_attributes_pass_through() {
        let text = fc(&line(r#""OBJID":"a1""#, "[[0,0],[100,0]]"));
        let (f, _) = parse_road_features(&text, &FarCodeMap::default()).unwrap();
        assert_eq!((f[0].lane_count, f[0].width_m, f[0].direction), (None, None, None));
    }

    #[test]
    fn keys_are_case_insensitive_and_strings_parse() {
        let text = fc(&line(r#""objid":7,"fsz":"3","Brf":"9.75","far":"IN_DIRECTION","nam":"Hauptstr""#, "[[0,0],[1,1]]"));
        let (f, _) = parse_road_features(&text, &FarCodeMap::default()).unwrap();
        assert_eq!(f[0].id, "7");
        assert_eq!(f[0].lane_count, Some(3));
        assert_eq!(f[0].width_m, Some(9.75));
        assert_eq!(f[0].direction, Some(Direction::ForwardOnly));
        assert_eq!(f[0].name.as_deref(), Some("Hauptstr"));
    }

    #[test]
    fn point_feature_is_skipped() {
        let point = r#"{"type":"Feature","properties":{},"geometry":{"type":"Point","coordinates":[1,2]}}"#;
        let text = fc(&format!("{point},{}", line(r#""OBJID":"x""#, "[[0,0],[5,0]]")));
        let (f, rep) = parse_road_features(&text, &FarCodeMap::default()).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(rep.skipped.len(), 1);
        assert_eq!(rep.skipped[0].index, 0);
    }

    #[test]
    fn missing_objid_is_synthesized() {
        let text = fc(&format!("{},{}", line("", "[[0,0],[5,0]]"), line("", "[[0,1],[5,1]]")));
        let (f, rep) = parse_road_features(&text, &FarCodeMap::default()).unwrap();
        assert_eq!(f[1].id, "feat-1");
        assert_eq!(rep.defaulted_ids, vec![0, 1]);
    }

    #[test]
    fn unknown_far_code_warns() {
        let text = fc(&line(r#""OBJID":"a","FAR":"9999""#, "[[0,0],[5,0]]"));
        let (f, rep) = parse_road_features(&text, &FarCodeMap::default()).unwrap();
        assert_eq!(f[0].direction, Some(Direction::BothWays));
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn malformed_json_reports_offset() {
        let text = "{\"type\": \"FeatureCollection\",\n \"features\": [ oops ] }";
        match parse_road_features(text, &FarCodeMap::default()) {
            Err(GeoDataError::Json { offset, .. }) => assert_eq!(&text[offset..offset + 1], "o"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_vertices_collapse() {
        let text = fc(&line(r#""OBJID":"a""#, "[[0,0],[0,0],[3,0]]"));
        let (f, _) = parse_road_features(&text, &FarCodeMap::default()).unwrap();
        assert_eq!(f[0].geometry.len(), 2);
        let text = fc(&line(r#""OBJID":"a""#, "[[0,0],[0,0]]"));
        let (f, rep) = parse_road_features(&text, &FarCodeMap::default()).unwrap();
        assert!(f.is_empty() && rep.skipped.len() == 1);
    }

    fn feat(pts: &[(f64, f64)]) -> RoadFeature {
        RoadFeature {
            id: "f".into(),
            geometry: pts.iter().map(|&(x, y)| Point2::new(x, y)).collect(),
            lane_count: None,
            width_m: None,
            direction: None,
            far_code: None,
            road_class: BTreeMap::new(),
            name: None,
        }
    }

    #[test]
    fn clipping_rules() {
        let roi = RegionOfInterest::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let inside = feat(&[(1.0, 1.0), (9.0, 9.0)]);
        let outside = feat(&[(20.0, 20.0), (30.0, 20.0)]);
        let crossing = feat(&[(-5.0, 5.0), (15.0, 5.0)]);
        let kept = clip_to_roi(&[inside.clone(), outside, crossing.clone()], &roi);
        assert_eq!(kept, vec![inside, crossing.clone()]);
        // kept whole, not cut
        assert_eq!(kept[1].geometry, crossing.geometry);
        assert_eq!(clip_to_roi(&kept, &roi), kept);
    }

    #[test]
    fn roi_validation() {
        assert!(RegionOfInterest::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(RegionOfInterest::new(0.0, 2.0, 1.0, 1.0).is_err());
        let r = RegionOfInterest::parse("604000,5792000,604500,5792400").unwrap();
        assert_eq!(r.area(), 500.0 * 400.0);
        assert!(RegionOfInterest::parse("1,2,3").is_err());
    }

    #[test]
    fn semantics_defaults() {
        let d = SemanticDefaults::default();
        let mut f = feat(&[(0.0, 0.0), (1.0, 0.0)]);
        f.lane_count = Some(2);
        f.width_m = Some(7.0);
        f.direction = Some(Direction::BothWays);
        let s = resolve_semantics(&f, &d);
        assert_eq!((s.lane_count, s.width_m, s.direction), (2, 7.0, Direction::BothWays));
        assert_eq!(s.provenance.lane_count, Provenance::FromAttribute);

        let mut f = feat(&[(0.0, 0.0), (1.0, 0.0)]);
        f.width_m = Some(6.5);
        let s = resolve_semantics(&f, &d);
        assert_eq!((s.lane_count, s.width_m, s.direction), (2, 6.5, Direction::BothWays));
        assert_eq!(s.provenance.lane_count, Provenance::Defaulted);

        let s = resolve_semantics(&feat(&[(0.0, 0.0), (1.0, 0.0)]), &d);
        assert_eq!((s.lane_count, s.width_m), (1, 3.25));
        assert_eq!(s.provenance.width_m, Provenance::Defaulted);
        assert_eq!(s.provenance.direction, Provenance::Defaulted);

        let mut f = feat(&[(0.0, 0.0), (1.0, 0.0)]);
        f.width_m = Some(100.0);
        assert_eq!(resolve_semantics(&f, &d).lane_count, 8);
    }

    #[test]
    fn fsz_per_direction_flag() {
        let d = SemanticDefaults { fsz_is_total: false, ..Default::default() };
        let mut f = feat(&[(0.0, 0.0), (1.0, 0.0)]);
        f.lane_count = Some(1);
        assert_eq!(resolve_semantics(&f, &d).lane_count, 2);
        f.direction = Some(Direction::ForwardOnly);
        assert_eq!(resolve_semantics(&f, &d).lane_count, 1);
    }

    #[test]
    fn local_frame() {
        let roi = RegionOfInterest::new(604000.0, 5792000.0, 605000.0, 5793000.0).unwrap();
        let f = feat(&[(604000.0, 5792000.0), (604123.5, 5792456.25)]);
        let (local, off) = to_local(std::slice::from_ref(&f), &roi);
        assert_eq!(local[0].geometry[0], Point2::new(0.0, 0.0));
        assert_eq!(local[0].geometry[1], Point2::new(123.5, 456.25));
        let back: Vec<_> = local[0].geometry.iter().map(|p| off.to_global(*p)).collect();
        assert_eq!(back, f.geometry);
    }

    #[test]
    fn geojson_round_trip_preserves_attributes() {
        let text = fc(&line(r#""OBJID":"a1","FSZ":2,"BRF":7.0,"FAR":"both","FKT":"1","NAM":"x""#, "[[0,0],[100,0]]"));
        let far = FarCodeMap::default();
        let (f, _) = parse_road_features(&text, &far).unwrap();
        let again = features_to_geojson(&f, &far).to_string();
        let (g, _) = parse_road_features(&again, &far).unwrap();
        assert_eq!(f, g);
    }
}
