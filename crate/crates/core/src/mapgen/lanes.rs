use super::{Lane, LaneBoundary, LaneGroup, MapGenError, RoadSegment, TravelDirection, TurnType};
use crate::geodata::Direction;
use crate::geom::miter_directions;
use crate::Point3;

#[derive(Debug, Default, Clone)]
pub struct IdAllocator {
    pub next_lane: u32,
    pub next_boundary: u32,
    pub next_group: u32,
}

impl IdAllocator {
    fn take(counter: &mut u32) -> u32 {
        let id = *counter;
        *counter += 1;
        id
    }
}

/// Lane group, lanes and boundaries for one segment, all at z = 0.
///
/// Lanes are laid out left to right when facing along the segment, each
/// `width / n` wide. On two-way roads the `ceil(n / 2)` lanes on the
/// `against_on_left` side carry opposing traffic. Every polyline is stored in
/// its lane's travel direction, and each lane owns its two boundaries.
pub fn build_lanes(
    segment: &RoadSegment,
    ids: &mut IdAllocator,
    miter_cap: f64,
    against_on_left: bool,
) -> Result<(LaneGroup, Vec<Lane>, Vec<LaneBoundary>), MapGenError> {
    let base = &segment.centerline;
    let dirs = miter_directions(base, miter_cap)
        .map_err(|vertex| MapGenError::DegenerateSegment { segment_id: segment.id, vertex })?;
    let offset_line = |o: f64| -> Vec<Point3> { base.iter().zip(&dirs).map(|(p, d)| (*p + *d * o).with_z(0.0)).collect() };

    let n = segment.semantics.lane_count as usize;
    let w = segment.semantics.lane_width();
    let n_against = match segment.semantics.direction {
        Direction::BothWays => n.div_ceil(2),
        Direction::ForwardOnly => 0,
        Direction::BackwardOnly => n,
    };
    let group_id = IdAllocator::take(&mut ids.next_group);
    let mut lanes = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(2 * n);
    for i in 0..n {
        let against = if against_on_left { i < n_against } else { i >= n - n_against };
        let offset = ((n - 1) as f64 / 2.0 - i as f64) * w;
        let mut center = offset_line(offset);
        let mut left = offset_line(offset + w / 2.0);
        let mut right = offset_line(offset - w / 2.0);
        let travel = if against {
            center.reverse();
            left.reverse();
            right.reverse();
            std::mem::swap(&mut left, &mut right);
            TravelDirection::AgainstSegment
        } else {
            TravelDirection::AlongSegment
        };
        let left_id = IdAllocator::take(&mut ids.next_boundary);
        let right_id = IdAllocator::take(&mut ids.next_boundary);
        bounds.push(LaneBoundary { id: left_id, points: left });
        bounds.push(LaneBoundary { id: right_id, points: right });
        lanes.push(Lane {
            id: IdAllocator::take(&mut ids.next_lane),
            group_id,
            centerline: center,
            left_boundary_id: left_id,
            right_boundary_id: right_id,
            travel_direction: travel,
            width_m: w,
            predecessors: Vec::new(),
            successors: Vec::new(),
            turn_type: TurnType::None,
        });
    }
    let group = LaneGroup { id: group_id, segment_id: segment.id, lane_ids: lanes.iter().map(|l| l.id).collect() };
    Ok((group, lanes, bounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::{Provenance, ResolvedSemantics, SemanticsProvenance};
    use crate::Point2;

    fn segment(pts: &[(f64, f64)], n: u32, width: f64, direction: Direction) -> RoadSegment {
        let p = Provenance::FromAttribute;
        RoadSegment {
            id: 0,
            source_feature_id: "s".into(),
            centerline: pts.iter().map(|&(x, y)| Point2::new(x, y)).collect(),
            start_node_id: 0,
            end_node_id: 1,
            semantics: ResolvedSemantics {
                lane_count: n,
                width_m: width,
                direction,
                provenance: SemanticsProvenance { lane_count: p, width_m: p, direction: p },
            },
        }
    }

    fn ys(pts: &[Point3]) -> Vec<f64> {
        pts.iter().map(|p| p.y).collect()
    }

    #[test]
    fn two_way_two_lanes() {
        let seg = segment(&[(0.0, 0.0), (100.0, 0.0)], 2, 7.0, Direction::BothWays);
        let (group, lanes, bounds) = build_lanes(&seg, &mut IdAllocator::default(), 3.0, true).unwrap();
        assert_eq!(group.lane_ids, vec![0, 1]);
        let (a, b) = (&lanes[0], &lanes[1]);
        assert_eq!(a.travel_direction, TravelDirection::AgainstSegment);
        assert_eq!(b.travel_direction, TravelDirection::AlongSegment);
        assert_eq!(ys(&a.centerline), vec![1.75, 1.75]);
        assert_eq!(a.centerline[0].x, 100.0);
        assert_eq!(ys(&b.centerline), vec![-1.75, -1.75]);
        assert_eq!(b.centerline[0].x, 0.0);
        // Travel-relative sides: the opposing lane's left boundary is the center line.
        assert_eq!(ys(&bounds[a.left_boundary_id as usize].points), vec![0.0, 0.0]);
        assert_eq!(ys(&bounds[a.right_boundary_id as usize].points), vec![3.5, 3.5]);
        assert_eq!(ys(&bounds[b.left_boundary_id as usize].points), vec![0.0, 0.0]);
        assert_eq!(ys(&bounds[b.right_boundary_id as usize].points), vec![-3.5, -3.5]);
        assert!(lanes.iter().all(|l| l.centerline.iter().all(|p| p.z == 0.0)));
    }

    #[test]
    fn one_way_single_lane_on_centerline() {
        let seg = segment(&[(0.0, 0.0), (50.0, 0.0)], 1, 3.5, Direction::ForwardOnly);
        let (_, lanes, bounds) = build_lanes(&seg, &mut IdAllocator::default(), 3.0, true).unwrap();
        assert_eq!(ys(&lanes[0].centerline), vec![0.0, 0.0]);
        assert_eq!(ys(&bounds[0].points), vec![1.75, 1.75]);
        assert_eq!(ys(&bounds[1].points), vec![-1.75, -1.75]);
    }

    #[test]
    fn three_lane_split() {
        let seg = segment(&[(0.0, 0.0), (50.0, 0.0)], 3, 10.5, Direction::BothWays);
        let (_, lanes, _) = build_lanes(&seg, &mut IdAllocator::default(), 3.0, true).unwrap();
        let against = lanes.iter().filter(|l| l.travel_direction == TravelDirection::AgainstSegment).count();
        assert_eq!(against, 2);
        let (_, lanes, _) = build_lanes(&seg, &mut IdAllocator::default(), 3.0, false).unwrap();
        assert_eq!(lanes[0].travel_direction, TravelDirection::AlongSegment);
        assert_eq!(lanes[1].travel_direction, TravelDirection::AgainstSegment);
        assert_eq!(lanes[2].travel_direction, TravelDirection::AgainstSegment);
        let seg = segment(&[(0.0, 0.0), (50.0, 0.0)], 2, 7.0, Direction::BothWays);
        let (_, lanes, _) = build_lanes(&seg, &mut IdAllocator::default(), 3.0, false).unwrap();
        assert_eq!(lanes[0].travel_direction, TravelDirection::AlongSegment);
        assert_eq!(lanes[1].travel_direction, TravelDirection::AgainstSegment);
    }

    #[test]
    fn midpoint_property_on_bent_segment() {
        let seg = segment(&[(0.0, 0.0), (30.0, 0.0), (50.0, 15.0), (55.0, 40.0)], 4, 13.0, Direction::BothWays);
        let (_, lanes, bounds) = build_lanes(&seg, &mut IdAllocator::default(), 3.0, true).unwrap();
        for l in &lanes {
            let (lb, rb) = (&bounds[l.left_boundary_id as usize], &bounds[l.right_boundary_id as usize]);
            assert_eq!(lb.points.len(), l.centerline.len());
            for ((c, a), b) in l.centerline.iter().zip(&lb.points).zip(&rb.points) {
                assert!(c.xy().dist(a.xy().midpoint(b.xy())) < 1e-6);
            }
        }
    }

    #[test]
    fn degenerate_segment_errors() {
        let mut seg = segment(&[(0.0, 0.0), (0.0, 0.0), (5.0, 0.0)], 1, 3.5, Direction::BothWays);
        seg.id = 9;
        assert_eq!(
            build_lanes(&seg, &mut IdAllocator::default(), 3.0, true).unwrap_err(),
            MapGenError::DegenerateSegment { segment_id: 9, vertex: 0 }
        );
    }
}
