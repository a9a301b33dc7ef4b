use std::collections::BTreeSet;

use super::{HdMapDocument, Lane, LaneLink, TravelDirection, TurnType};
use crate::geom::signed_angle_deg;
use crate::Point2;

/// A potential exit-to-entry connection at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub exit: u32,
    pub entry: u32,
    /// Distance between the exit's last and the entry's first centerline point.
    pub gap: f64,
    /// Signed heading change from exit to entry, degrees.
    pub heading_change: f64,
}

/// Record of the greedy matching at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMatching {
    pub node_id: u32,
    pub exits: Vec<u32>,
    pub entries: Vec<u32>,
    /// Pairs that passed the distance and heading filters.
    pub candidates: Vec<Candidate>,
    /// Accepted `(exit, entry)` pairs in acceptance order.
    pub accepted: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnThresholds {
    pub match_radius: f64,
    pub straight_max_deg: f64,
    pub turn_max_deg: f64,
}

impl TurnThresholds {
    /// Movement label for a signed heading change; `None` for U-turns.
    pub fn classify(&self, delta_deg: f64) -> Option<TurnType> {
        let a = delta_deg.abs();
        if a <= self.straight_max_deg {
            Some(TurnType::Straight)
        } else if a <= self.turn_max_deg {
            Some(if delta_deg > 0.0 { TurnType::Left } else { TurnType::Right })
        } else {
            None
        }
    }
}

/// Nodes where a lane is entered and left: `(entry node, exit node)`.
pub fn lane_exit_entry_nodes(map: &HdMapDocument, lane: &Lane) -> (u32, u32) {
    let seg = &map.segments[map.groups[lane.group_id as usize].segment_id as usize];
    match lane.travel_direction {
        TravelDirection::AlongSegment => (seg.start_node_id, seg.end_node_id),
        TravelDirection::AgainstSegment => (seg.end_node_id, seg.start_node_id),
    }
}

fn planar(lane: &Lane) -> Vec<Point2> {
    lane.centerline.iter().map(|p| p.xy()).collect()
}

fn exit_tangent(lane: &Lane) -> Point2 {
    let c = planar(lane);
    c[c.len() - 1] - c[c.len() - 2]
}

fn entry_tangent(lane: &Lane) -> Point2 {
    let c = planar(lane);
    c[1] - c[0]
}

fn gap(exit: &Lane, entry: &Lane) -> f64 {
    exit.centerline.last().unwrap().xy().dist(entry.centerline[0].xy())
}

// Lanes leaving and entering each node, ordered by lane id.
fn ends_by_node(map: &HdMapDocument) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let mut exits = vec![Vec::new(); map.nodes.len()];
    let mut entries = vec![Vec::new(); map.nodes.len()];
    for lane in &map.lanes {
        let (entry_node, exit_node) = lane_exit_entry_nodes(map, lane);
        exits[exit_node as usize].push(lane.id);
        entries[entry_node as usize].push(lane.id);
    }
    (exits, entries)
}

fn link(map: &mut HdMapDocument, exit: u32, entry: u32, turn: TurnType) {
    let from = &mut map.lanes[exit as usize];
    match from.successors.iter_mut().find(|l| l.lane == entry) {
        Some(existing) => existing.turn = turn,
        None => {
            from.successors.push(LaneLink { lane: entry, turn });
            from.successors.sort_by_key(|l| l.lane);
        }
    }
    let to = &mut map.lanes[entry as usize];
    if !to.predecessors.contains(&exit) {
        to.predecessors.push(exit);
        to.predecessors.sort_unstable();
    }
}

/// Greedy one-to-one continuation links at every node.
///
/// A lane's exit belongs to the node its segment ends at in travel direction,
/// and its entry to the node it starts at. Candidate pairs need a gap of at
/// most `match_radius` and a heading difference of at most `heading_tol_deg`.
/// Candidates are taken by ascending gap, ties by (exit id, entry id), while
/// both ends are still free.
pub fn connect_lanes(map: &mut HdMapDocument, match_radius: f64, heading_tol_deg: f64) -> Vec<NodeMatching> {
    let (exits_at, entries_at) = ends_by_node(map);
    let mut used_exits = BTreeSet::new();
    let mut used_entries = BTreeSet::new();
    let mut records = Vec::with_capacity(map.nodes.len());
    for node in 0..map.nodes.len() {
        let (exits, entries) = (&exits_at[node], &entries_at[node]);
        let mut candidates = Vec::new();
        for &e in exits {
            for &n in entries {
                if e == n {
                    continue;
                }
                let (le, ln) = (map.lane(e), map.lane(n));
                let g = gap(le, ln);
                let delta = signed_angle_deg(exit_tangent(le), entry_tangent(ln));
                if g <= match_radius && delta.abs() <= heading_tol_deg {
                    candidates.push(Candidate { exit: e, entry: n, gap: g, heading_change: delta });
                }
            }
        }
        candidates.sort_by(|a, b| a.gap.total_cmp(&b.gap).then(a.exit.cmp(&b.exit)).then(a.entry.cmp(&b.entry)));
        let mut accepted = Vec::new();
        for c in &candidates {
            if !used_exits.contains(&c.exit) && !used_entries.contains(&c.entry) {
                used_exits.insert(c.exit);
                used_entries.insert(c.entry);
                accepted.push((c.exit, c.entry));
            }
        }
        for &(e, n) in &accepted {
            link(map, e, n, TurnType::None);
        }
        records.push(NodeMatching {
            node_id: node as u32,
            exits: exits.clone(),
            entries: entries.clone(),
            candidates,
            accepted,
        });
    }
    records
}

/// Straight, left and right movements at intersections, i.e. nodes where at
/// least three distinct segments meet.
///
/// Every exit/entry pair within `match_radius` is labelled by its signed
/// heading change. Existing links take the label; missing ones are added.
/// U-turns get no connection.
pub fn classify_turns(map: &mut HdMapDocument, t: &TurnThresholds) {
    let (exits_at, entries_at) = ends_by_node(map);
    for node in 0..map.nodes.len() {
        let segs: BTreeSet<u32> = map
            .segments
            .iter()
            .filter(|s| s.start_node_id as usize == node || s.end_node_id as usize == node)
            .map(|s| s.id)
            .collect();
        if segs.len() < 3 {
            continue;
        }
        for &e in &exits_at[node] {
            for &n in &entries_at[node] {
                if e == n {
                    continue;
                }
                let (le, ln) = (map.lane(e), map.lane(n));
                if gap(le, ln) > t.match_radius {
                    continue;
                }
                let delta = signed_angle_deg(exit_tangent(le), entry_tangent(ln));
                if let Some(turn) = t.classify(delta) {
                    link(map, e, n, turn);
                }
            }
        }
    }
    let entered_by: Vec<TurnType> = map
        .lanes
        .iter()
        .map(|lane| {
            lane.predecessors
                .iter()
                .filter_map(|&p| map.lane(p).successors.iter().find(|l| l.lane == lane.id).map(|l| l.turn))
                .find(|t| *t != TurnType::None)
                .unwrap_or(TurnType::None)
        })
        .collect();
    for (lane, turn) in map.lanes.iter_mut().zip(entered_by) {
        lane.turn_type = turn;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::{Direction, OriginOffset};
    use crate::geodata::{resolve_semantics, SemanticDefaults};
    use crate::mapgen::tests::road;
    use crate::mapgen::{build_lanes, cluster_endpoints, split_at_interior_nodes, IdAllocator, SplitParams};
    use crate::geodata::RoadFeature;

    fn build(features: &[RoadFeature]) -> HdMapDocument {
        let mut nodes = cluster_endpoints(features, 1.0);
        let d = SemanticDefaults::default();
        let params = SplitParams { proj_tol: 1.0, min_segment_length: 1.0 };
        let (segs, _) = split_at_interior_nodes(features, &mut nodes, params, |f| resolve_semantics(f, &d));
        let mut map = HdMapDocument::empty(OriginOffset::default(), String::new());
        let mut ids = IdAllocator::default();
        for s in &segs {
            let (g, l, b) = build_lanes(s, &mut ids, 3.0, true).unwrap();
            map.groups.push(g);
            map.lanes.extend(l);
            map.boundaries.extend(b);
        }
        map.nodes = nodes;
        map.segments = segs;
        map
    }

    const T: TurnThresholds = TurnThresholds { match_radius: 5.0, straight_max_deg: 30.0, turn_max_deg: 150.0 };

    #[test]
    fn thresholds() {
        assert_eq!(T.classify(0.0), Some(TurnType::Straight));
        assert_eq!(T.classify(30.0), Some(TurnType::Straight));
        assert_eq!(T.classify(90.0), Some(TurnType::Left));
        assert_eq!(T.classify(-90.0), Some(TurnType::Right));
        assert_eq!(T.classify(150.0), Some(TurnType::Left));
        assert_eq!(T.classify(-150.0), Some(TurnType::Right));
        assert_eq!(T.classify(180.0), None);
    }

    #[test]
    fn collinear_one_way_link() {
        let a = road("a", &[(0.0, 0.0), (50.0, 0.0)], 1, 3.5, Direction::ForwardOnly);
        let b = road("b", &[(50.0, 0.0), (100.0, 0.0)], 1, 3.5, Direction::ForwardOnly);
        let mut map = build(&[a, b]);
        let rec = connect_lanes(&mut map, 5.0, 30.0);
        assert_eq!(rec.iter().map(|r| r.accepted.len()).sum::<usize>(), 1);
        assert_eq!(map.lanes[0].successors, vec![LaneLink { lane: 1, turn: TurnType::None }]);
        assert_eq!(map.lanes[1].predecessors, vec![0]);
    }

    #[test]
    fn right_angle_is_not_a_continuation() {
        let a = road("a", &[(0.0, 0.0), (50.0, 0.0)], 1, 3.5, Direction::ForwardOnly);
        let b = road("b", &[(50.0, 0.0), (50.0, 50.0)], 1, 3.5, Direction::ForwardOnly);
        let mut map = build(&[a, b]);
        connect_lanes(&mut map, 5.0, 30.0);
        assert!(map.lanes.iter().all(|l| l.successors.is_empty()));
        // two-segment node: no turn classification either
        classify_turns(&mut map, &T);
        assert!(map.lanes.iter().all(|l| l.successors.is_empty()));
    }

    #[test]
    fn two_by_two_matches_pairwise() {
        let a = road("a", &[(0.0, 0.0), (50.0, 0.0)], 2, 7.0, Direction::BothWays);
        let b = road("b", &[(50.0, 0.0), (100.0, 0.0)], 2, 7.0, Direction::BothWays);
        let mut map = build(&[a, b]);
        let rec = connect_lanes(&mut map, 5.0, 30.0);
        let mid = rec.iter().find(|r| r.exits.len() == 2).unwrap();
        assert_eq!(mid.entries.len(), 2);
        // Enumerate both perfect matchings of the 2x2 instance; greedy must pick the cheaper.
        let (e, n) = (&mid.exits, &mid.entries);
        let cost = |pairs: &[(u32, u32)]| -> f64 { pairs.iter().map(|&(x, y)| gap(map.lane(x), map.lane(y))).sum() };
        let m1 = [(e[0], n[0]), (e[1], n[1])];
        let m2 = [(e[0], n[1]), (e[1], n[0])];
        let feasible = |m: &[(u32, u32)]| m.iter().all(|p| mid.candidates.iter().any(|c| (c.exit, c.entry) == *p));
        let best: Vec<(u32, u32)> = [m1, m2]
            .into_iter()
            .filter(|m| feasible(m))
            .min_by(|a, b| cost(a).total_cmp(&cost(b)))
            .unwrap()
            .to_vec();
        let mut got = mid.accepted.clone();
        got.sort();
        let mut want = best;
        want.sort();
        assert_eq!(got, want);
        // lane 1 (along, a) -> lane 3 (along, b); lane 2 (against, b) -> lane 0 (against, a)
        assert_eq!(want, vec![(1, 3), (2, 0)]);
    }

    #[test]
    fn t_junction_turns() {
        let bar = road("bar", &[(0.0, 0.0), (100.0, 0.0)], 2, 7.0, Direction::BothWays);
        let stem = road("stem", &[(50.0, -60.0), (50.0, -0.3)], 2, 7.0, Direction::BothWays);
        let mut map = build(&[bar, stem]);
        connect_lanes(&mut map, 5.0, 30.0);
        classify_turns(&mut map, &T);
        // stem: segment 2, lanes 4 (against, southbound) and 5 (along, northbound)
        let north = &map.lanes[5];
        assert_eq!(north.travel_direction, TravelDirection::AlongSegment);
        let turns: Vec<(u32, TurnType)> = north.successors.iter().map(|l| (l.lane, l.turn)).collect();
        // westbound entry: bar west piece against lane 0; eastbound entry: bar east piece along lane 3
        assert_eq!(turns, vec![(0, TurnType::Left), (3, TurnType::Right)]);
        assert_eq!(map.lanes[0].turn_type, TurnType::Straight);
        // straight-through links get labelled too
        let east = map.lanes[1].successors.iter().find(|l| l.lane == 3).unwrap();
        assert_eq!(east.turn, TurnType::Straight);
        assert!(map.lanes.iter().all(|l| !l.successor_ids().any(|s| s == l.id)));
    }
}
