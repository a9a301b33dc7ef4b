//! Lane-level map generation from locally referenced road centerlines.
//!
//! Stages, in pipeline order: [`cluster_endpoints`], [`split_at_interior_nodes`],
//! [`densify_segments`], [`build_lanes`], [`connect_lanes`], [`classify_turns`],
//! [`apply_elevation`] and finally [`restore_global`]. [`generate`] runs them all.

mod document;
mod elevation;
mod lanes;
mod nodes;
mod segments;
mod topology;

pub use document::*;
pub use elevation::{apply_elevation, clamp_grade, smooth_profile};
pub use lanes::{build_lanes, IdAllocator};
pub use nodes::cluster_endpoints;
pub use segments::{densify_segments, split_at_interior_nodes, SplitParams};
pub use topology::{classify_turns, connect_lanes, lane_exit_entry_nodes, Candidate, NodeMatching, TurnThresholds};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geodata::{resolve_semantics, OriginOffset, RegionOfInterest, RoadFeature, SemanticDefaults};
use crate::Dem;

pub const TOOL_VERSION: &str = concat!("geohd ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error, PartialEq)]
pub enum MapGenError {
    #[error("segment {segment_id}: degenerate geometry, zero-length edge at vertex {vertex}")]
    DegenerateSegment { segment_id: u32, vertex: usize },
    #[error("elevation: no map vertex lies inside the DEM")]
    OutsideDem,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Every tunable of the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    /// Single-linkage distance for endpoint clustering, meters.
    pub cluster_tol: f64,
    /// Max node distance from a road interior to split it, meters.
    pub proj_tol: f64,
    pub min_segment_length: f64,
    /// Max edge length of segment centerlines before lane building, meters.
    pub vertex_spacing: f64,
    pub match_radius: f64,
    /// Heading tolerance for plain continuation links, degrees.
    pub heading_tol_deg: f64,
    /// |heading change| up to this is a straight movement, degrees.
    pub straight_max_deg: f64,
    /// |heading change| above this is a U-turn and gets no connection, degrees.
    pub turn_max_deg: f64,
    pub smooth_window: usize,
    pub max_grade: f64,
    /// Cap on the miter scale factor at polyline corners.
    pub miter_cap: f64,
    /// For two-way roads, put the opposing lanes on the left of the digitizing direction.
    pub against_on_left: bool,
    pub semantics: SemanticDefaults,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            cluster_tol: 1.0,
            proj_tol: 1.0,
            min_segment_length: 1.0,
            vertex_spacing: 1.0,
            match_radius: 5.0,
            heading_tol_deg: 30.0,
            straight_max_deg: 30.0,
            turn_max_deg: 150.0,
            smooth_window: 5,
            max_grade: 0.12,
            miter_cap: 3.0,
            against_on_left: true,
            semantics: SemanticDefaults::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), MapGenError> {
        let bad = |m: String| Err(MapGenError::InvalidConfig(m));
        let positive = [
            ("cluster_tol", self.cluster_tol),
            ("proj_tol", self.proj_tol),
            ("min_segment_length", self.min_segment_length),
            ("vertex_spacing", self.vertex_spacing),
            ("match_radius", self.match_radius),
            ("default_lane_width", self.semantics.default_lane_width),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(0.0..=180.0).contains(&self.heading_tol_deg) {
            return bad(format!("heading_tol_deg must be within [0, 180], got {}", self.heading_tol_deg));
        }
        if !(0.0 <= self.straight_max_deg && self.straight_max_deg < self.turn_max_deg && self.turn_max_deg <= 180.0) {
            return bad("turn thresholds need 0 <= straight_max_deg < turn_max_deg <= 180".into());
        }
        if self.smooth_window == 0 || self.smooth_window.is_multiple_of(2) {
            return bad(format!("smooth_window must be odd, got {}", self.smooth_window));
        }
        if !(self.max_grade > 0.0 && self.max_grade.is_finite()) {
            return bad(format!("max_grade must be positive, got {}", self.max_grade));
        }
        if !(self.miter_cap >= 1.0) {
            return bad(format!("miter_cap must be at least 1, got {}", self.miter_cap));
        }
        Ok(())
    }

    pub fn split_params(&self) -> SplitParams {
        SplitParams { proj_tol: self.proj_tol, min_segment_length: self.min_segment_length }
    }

    pub fn turn_thresholds(&self) -> TurnThresholds {
        TurnThresholds {
            match_radius: self.match_radius,
            straight_max_deg: self.straight_max_deg,
            turn_max_deg: self.turn_max_deg,
        }
    }
}

/// Short hex digest identifying a (ROI, generator config) pair.
pub fn config_hash(roi: &RegionOfInterest, cfg: &GeneratorConfig) -> String {
    let canon = serde_json::to_string(&(roi, cfg)).expect("config serializes");
    hex::encode(&Sha256::digest(canon.as_bytes())[..8])
}

/// Everything [`generate`] produced, including intermediate matching records.
#[derive(Debug, Clone)]
pub struct Generated {
    /// The map in the local frame.
    pub map: HdMapDocument,
    pub matchings: Vec<NodeMatching>,
}

/// Builds the lane-level map from clipped features in global coordinates.
///
/// The returned document is in the local frame; call [`restore_global`] for
/// the global one.
pub fn generate(
    features: &[RoadFeature],
    roi: &RegionOfInterest,
    dem: Option<&Dem>,
    cfg: &GeneratorConfig,
) -> Result<Generated, MapGenError> {
    cfg.validate()?;
    let (mut local, origin) = crate::geodata::to_local(features, roi);
    let mut warnings = Vec::new();
    dedupe_ids(&mut local, &mut warnings);

    let mut nodes = cluster_endpoints(&local, cfg.cluster_tol);
    let (segments, split_warnings) =
        split_at_interior_nodes(&local, &mut nodes, cfg.split_params(), |f| resolve_semantics(f, &cfg.semantics));
    warnings.extend(split_warnings);
    let segments = densify_segments(segments, cfg.vertex_spacing);

    let mut map = HdMapDocument::empty(origin, config_hash(roi, cfg));
    map.nodes = nodes;
    let mut ids = IdAllocator::default();
    for seg in &segments {
        let (group, lanes, bounds) = build_lanes(seg, &mut ids, cfg.miter_cap, cfg.against_on_left)?;
        map.groups.push(group);
        map.lanes.extend(lanes);
        map.boundaries.extend(bounds);
    }
    map.segments = segments;

    let matchings = connect_lanes(&mut map, cfg.match_radius, cfg.heading_tol_deg);
    classify_turns(&mut map, &cfg.turn_thresholds());

    match dem {
        Some(dem) => apply_elevation(&mut map, dem, cfg.smooth_window, cfg.max_grade)?,
        None => warnings.push("no DEM given, elevation left at 0".into()),
    }
    map.metadata.warnings.splice(0..0, warnings);
    Ok(Generated { map, matchings })
}

fn dedupe_ids(features: &mut [RoadFeature], warnings: &mut Vec<String>) {
    let mut seen = BTreeSet::new();
    for (i, f) in features.iter_mut().enumerate() {
        if !seen.insert(f.id.clone()) {
            let renamed = format!("{}#{i}", f.id);
            warnings.push(format!("duplicate feature id {:?} at index {i} renamed to {renamed:?}", f.id));
            f.id = renamed.clone();
            seen.insert(renamed);
        }
    }
}

/// Translates a local-frame map into global coordinates.
///
/// A second application is a no-op that records a warning and returns `false`.
pub fn restore_global(map: &mut HdMapDocument) -> bool {
    if map.metadata.frame == Frame::Global {
        map.metadata.warnings.push("restore_global called on a global document; ignored".into());
        return false;
    }
    let off: OriginOffset = map.origin_offset;
    let shift2 = |p: &mut crate::Point2| *p = off.to_global(*p);
    let shift3 = |p: &mut crate::Point3| {
        p.x += off.offset_x;
        p.y += off.offset_y;
    };
    for n in &mut map.nodes {
        shift2(&mut n.position);
    }
    for s in &mut map.segments {
        s.centerline.iter_mut().for_each(shift2);
    }
    for l in &mut map.lanes {
        l.centerline.iter_mut().for_each(shift3);
    }
    for b in &mut map.boundaries {
        b.points.iter_mut().for_each(shift3);
    }
    map.metadata.frame = Frame::Global;
    true
}
