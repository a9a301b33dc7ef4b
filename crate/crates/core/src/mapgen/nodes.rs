use super::{EndKind, NetworkNode, NodeMember};
use crate::geodata::RoadFeature;
use crate::Point2;

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Single-linkage clustering of feature endpoints with link distance `tol`.
///
/// The result does not depend on feature order: members are sorted before
/// their centroid is taken, and nodes are numbered by their smallest member.
pub fn cluster_endpoints(features: &[RoadFeature], tol: f64) -> Vec<NetworkNode> {
    let mut ends: Vec<(NodeMember, Point2)> = Vec::with_capacity(features.len() * 2);
    for f in features {
        let (Some(first), Some(last)) = (f.geometry.first(), f.geometry.last()) else {
            continue;
        };
        ends.push((NodeMember { feature_id: f.id.clone(), end: EndKind::Start }, *first));
        ends.push((NodeMember { feature_id: f.id.clone(), end: EndKind::End }, *last));
    }
    ends.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.x.total_cmp(&b.1.x)).then(a.1.y.total_cmp(&b.1.y)));

    let mut sets = DisjointSet((0..ends.len()).collect());
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            if ends[i].1.dist(ends[j].1) <= tol {
                sets.union(i, j);
            }
        }
    }

    // Roots are the smallest index of each cluster, so iterating in index
    // order visits clusters by their smallest member.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; ends.len()];
    for i in 0..ends.len() {
        let root = sets.find(i);
        if slot[root] == usize::MAX {
            slot[root] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[slot[root]].push(i);
    }

    clusters
        .into_iter()
        .enumerate()
        .map(|(id, members)| {
            let n = members.len() as f64;
            let (sx, sy) = members.iter().fold((0.0, 0.0), |(sx, sy), &i| (sx + ends[i].1.x, sy + ends[i].1.y));
            NetworkNode {
                id: id as u32,
                position: Point2::new(sx / n, sy / n),
                members: members.iter().map(|&i| ends[i].0.clone()).collect(),
            }
        })
        .collect()
}
