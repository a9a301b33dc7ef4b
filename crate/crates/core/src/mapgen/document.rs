use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::geodata::{OriginOffset, ResolvedSemantics};
use crate::{Point2, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    Start,
    End,
    /// The node was projected onto the feature's interior and split it there.
    Interior,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeMember {
    pub feature_id: String,
    pub end: EndKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub id: u32,
    /// Centroid of the start/end member endpoints.
    pub position: Point2,
    pub members: Vec<NodeMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadSegment {
    pub id: u32,
    pub source_feature_id: String,
    pub centerline: Vec<Point2>,
    pub start_node_id: u32,
    pub end_node_id: u32,
    pub semantics: ResolvedSemantics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TravelDirection {
    AlongSegment,
    AgainstSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TurnType {
    #[default]
    None,
    Straight,
    Left,
    Right,
}

/// Outgoing connection with the movement it represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaneLink {
    pub lane: u32,
    pub turn: TurnType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub id: u32,
    pub group_id: u32,
    /// Ordered in travel direction.
    pub centerline: Vec<Point3>,
    pub left_boundary_id: u32,
    pub right_boundary_id: u32,
    pub travel_direction: TravelDirection,
    pub width_m: f64,
    pub predecessors: Vec<u32>,
    pub successors: Vec<LaneLink>,
    /// Movement by which the lane is entered at an intersection: the label of
    /// the link from its lowest-id labelled predecessor, `None` if there is none.
    pub turn_type: TurnType,
}

impl Lane {
    pub fn successor_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.successors.iter().map(|l| l.lane)
    }
}

/// Boundary polyline, ordered in the travel direction of its lane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneBoundary {
    pub id: u32,
    pub points: Vec<Point3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneGroup {
    pub id: u32,
    pub segment_id: u32,
    /// Left to right when facing along the segment.
    pub lane_ids: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub tool_version: String,
    pub config_hash: String,
    pub frame: Frame,
    pub warnings: Vec<String>,
}

/// The generated lane-level map. Ids of every collection equal their index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdMapDocument {
    pub origin_offset: OriginOffset,
    pub nodes: Vec<NetworkNode>,
    pub segments: Vec<RoadSegment>,
    pub lanes: Vec<Lane>,
    pub boundaries: Vec<LaneBoundary>,
    pub groups: Vec<LaneGroup>,
    pub metadata: MapMetadata,
}

impl HdMapDocument {
    pub fn empty(origin_offset: OriginOffset, config_hash: String) -> Self {
        Self {
            origin_offset,
            nodes: Vec::new(),
            segments: Vec::new(),
            lanes: Vec::new(),
            boundaries: Vec::new(),
            groups: Vec::new(),
            metadata: MapMetadata {
                tool_version: super::TOOL_VERSION.to_string(),
                config_hash,
                frame: Frame::Local,
                warnings: Vec::new(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("map serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn lane(&self, id: u32) -> &Lane {
        &self.lanes[id as usize]
    }

    /// Dangling or inconsistent cross-references, as messages.
    pub fn check_references(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let dense = |what: &str, ids: Vec<u32>, problems: &mut Vec<String>| {
            for (i, id) in ids.into_iter().enumerate() {
                if id as usize != i {
                    problems.push(format!("{what} at index {i} has id {id}"));
                }
            }
        };
        dense("node", self.nodes.iter().map(|n| n.id).collect(), &mut problems);
        dense("segment", self.segments.iter().map(|n| n.id).collect(), &mut problems);
        dense("lane", self.lanes.iter().map(|n| n.id).collect(), &mut problems);
        dense("boundary", self.boundaries.iter().map(|n| n.id).collect(), &mut problems);
        dense("group", self.groups.iter().map(|n| n.id).collect(), &mut problems);

        let (nn, ns, nl, nb, ng) = (
            self.nodes.len() as u32,
            self.segments.len() as u32,
            self.lanes.len() as u32,
            self.boundaries.len() as u32,
            self.groups.len() as u32,
        );
        for s in &self.segments {
            if s.start_node_id >= nn || s.end_node_id >= nn {
                problems.push(format!("segment {} references a missing node", s.id));
            }
        }
        for g in &self.groups {
            if g.segment_id >= ns {
                problems.push(format!("group {} references missing segment {}", g.id, g.segment_id));
            }
            let unique: BTreeSet<_> = g.lane_ids.iter().collect();
            if g.lane_ids.is_empty() || unique.len() != g.lane_ids.len() {
                problems.push(format!("group {} has empty or repeated lane ids", g.id));
            }
            for l in &g.lane_ids {
                if *l >= nl {
                    problems.push(format!("group {} references missing lane {l}", g.id));
                }
            }
        }
        for l in &self.lanes {
            if l.group_id >= ng {
                problems.push(format!("lane {} references missing group {}", l.id, l.group_id));
            }
            if l.left_boundary_id >= nb || l.right_boundary_id >= nb {
                problems.push(format!("lane {} references a missing boundary", l.id));
            }
            for other in l.predecessors.iter().copied().chain(l.successor_ids()) {
                if other >= nl {
                    problems.push(format!("lane {} links to missing lane {other}", l.id));
                }
            }
        }
        problems
    }
}
