use super::{EndKind, NetworkNode, NodeMember, RoadSegment};
use crate::geodata::{ResolvedSemantics, RoadFeature};
use crate::geom::{densify, polyline_length, project_onto_polyline};
use crate::Point2;

const SAME_POINT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitParams {
    pub proj_tol: f64,
    pub min_segment_length: f64,
}

#[derive(Debug, Clone, Copy)]
struct Cut {
    station: f64,
    edge: usize,
    foot: Point2,
    node: u32,
}

fn node_of(nodes: &[NetworkNode], feature_id: &str, end: EndKind) -> u32 {
    nodes
        .iter()
        .find(|n| n.members.iter().any(|m| m.feature_id == feature_id && m.end == end))
        .map(|n| n.id)
        .expect("every feature endpoint is clustered")
}

/// Splits features where a node lies within `proj_tol` of their interior.
///
/// The perpendicular foot becomes a shared vertex of the two pieces, and the
/// node gains an `Interior` member for the feature. The first and last
/// `2 * proj_tol` meters of a feature never split. Cuts that would leave a
/// piece shorter than `min_segment_length` are dropped, which merges that
/// piece into its neighbor. Features no longer than `min_segment_length`
/// are skipped with a warning.
pub fn split_at_interior_nodes(
    features: &[RoadFeature],
    nodes: &mut [NetworkNode],
    params: SplitParams,
    semantics: impl Fn(&RoadFeature) -> ResolvedSemantics,
) -> (Vec<RoadSegment>, Vec<String>) {
    let mut segments = Vec::new();
    let mut warnings = Vec::new();
    for f in features {
        let g = &f.geometry;
        let length = polyline_length(g);
        if length <= params.min_segment_length {
            warnings.push(format!("feature {}: length {length:.3} m is too short, skipped", f.id));
            continue;
        }
        let start_node = node_of(nodes, &f.id, EndKind::Start);
        let end_node = node_of(nodes, &f.id, EndKind::End);
        let band = 2.0 * params.proj_tol;

        let mut cuts: Vec<Cut> = nodes
            .iter()
            .filter_map(|n| {
                let p = project_onto_polyline(n.position, g)?;
                let interior = p.station > band && p.station < length - band;
                (interior && p.distance <= params.proj_tol).then_some(Cut {
                    station: p.station,
                    edge: p.edge,
                    foot: p.foot,
                    node: n.id,
                })
            })
            .collect();
        cuts.sort_by(|a, b| a.station.total_cmp(&b.station).then(a.node.cmp(&b.node)));
        cuts.dedup_by(|b, a| (b.station - a.station).abs() <= SAME_POINT);

        let mut kept: Vec<Cut> = Vec::with_capacity(cuts.len());
        let mut last = 0.0;
        for c in cuts {
            if c.station - last >= params.min_segment_length && length - c.station >= params.min_segment_length {
                last = c.station;
                kept.push(c);
            }
        }

        let mut pieces: Vec<Vec<Point2>> = Vec::with_capacity(kept.len() + 1);
        let mut cur = vec![g[0]];
        let mut next_cut = kept.iter().peekable();
        for e in 0..g.len() - 1 {
            while let Some(c) = next_cut.next_if(|c| c.edge == e) {
                if cur.last().unwrap().dist(c.foot) > SAME_POINT {
                    cur.push(c.foot);
                }
                pieces.push(std::mem::replace(&mut cur, vec![c.foot]));
            }
            if cur.last().unwrap().dist(g[e + 1]) > SAME_POINT {
                cur.push(g[e + 1]);
            }
        }
        pieces.push(cur);

        let sem = semantics(f);
        let n_pieces = pieces.len();
        for (k, centerline) in pieces.into_iter().enumerate() {
            let start_node_id = if k == 0 { start_node } else { kept[k - 1].node };
            let end_node_id = if k + 1 == n_pieces { end_node } else { kept[k].node };
            segments.push(RoadSegment {
                id: segments.len() as u32,
                source_feature_id: f.id.clone(),
                centerline,
                start_node_id,
                end_node_id,
                semantics: sem,
            });
        }
        for c in &kept {
            let node = &mut nodes[c.node as usize];
            node.members.push(NodeMember { feature_id: f.id.clone(), end: EndKind::Interior });
            node.members.sort();
        }
    }
    (segments, warnings)
}

/// Subdivides long centerline edges so elevation can follow the terrain.
pub fn densify_segments(segments: Vec<RoadSegment>, spacing: f64) -> Vec<RoadSegment> {
    segments
        .into_iter()
        .map(|s| RoadSegment { centerline: densify(&s.centerline, spacing), ..s })
        .collect()
}
