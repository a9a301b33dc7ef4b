//! Conversion of the lane-level map into an explicit lanelet network, and the
//! network's XML exchange format.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geom::{Scalar, Vec3};
use crate::mapgen::{HdMapDocument, TravelDirection};
use crate::Point3;

#[derive(Debug, Error)]
pub enum LaneletError {
    #[error("lane {lane}: {message}")]
    Conversion { lane: u32, message: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("network references missing lanelets: {0}")]
    Dangling(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adjacency {
    pub id: u32,
    pub same_direction: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lanelet {
    pub id: u32,
    /// Left and right relative to the travel direction, both ordered along it.
    pub left_bound: Vec<Point3>,
    pub right_bound: Vec<Point3>,
    pub centerline: Vec<Point3>,
    pub predecessors: Vec<u32>,
    pub successors: Vec<u32>,
    pub adjacent_left: Option<Adjacency>,
    pub adjacent_right: Option<Adjacency>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkMetadata {
    /// sha256 of the source map document.
    pub source: String,
    pub sampling_step: f64,
    pub config_hash: String,
    /// Set on networks that carry injected defects.
    pub defect_artifact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneletNetwork {
    /// Sorted by ascending id.
    pub lanelets: Vec<Lanelet>,
    pub metadata: NetworkMetadata,
}

impl LaneletNetwork {
    pub fn get(&self, id: u32) -> Option<&Lanelet> {
        self.lanelets.binary_search_by_key(&id, |l| l.id).ok().map(|i| &self.lanelets[i])
    }

    pub fn get_mut(&mut self, id: u32) -> Option<&mut Lanelet> {
        self.lanelets.binary_search_by_key(&id, |l| l.id).ok().map(|i| &mut self.lanelets[i])
    }

    /// Relations pointing at ids that are not in the network.
    pub fn dangling_references(&self) -> Vec<(u32, u32)> {
        let ids: BTreeSet<u32> = self.lanelets.iter().map(|l| l.id).collect();
        let mut out = Vec::new();
        for l in &self.lanelets {
            let adj = l.adjacent_left.iter().chain(&l.adjacent_right).map(|a| a.id);
            for r in l.predecessors.iter().chain(&l.successors).copied().chain(adj) {
                if !ids.contains(&r) {
                    out.push((l.id, r));
                }
            }
        }
        out
    }
}

/// Point at each of `count` uniform fractions of the planar arclength, with
/// z interpolated linearly. Both endpoints are reproduced exactly.
pub fn resample<T: Scalar>(pts: &[Vec3<T>], count: usize) -> Vec<Vec3<T>> {
    let mut stations = Vec::with_capacity(pts.len());
    let mut acc = T::zero();
    stations.push(acc);
    for w in pts.windows(2) {
        acc = acc + w[0].xy().dist(w[1].xy());
        stations.push(acc);
    }
    let total = acc;
    let last = count - 1;
    let mut out = Vec::with_capacity(count);
    let mut edge = 0;
    for k in 0..count {
        if k == 0 {
            out.push(pts[0]);
            continue;
        }
        if k == last {
            out.push(pts[pts.len() - 1]);
            continue;
        }
        let s = total * T::from_usize(k).unwrap() / T::from_usize(last).unwrap();
        while edge + 2 < pts.len() && stations[edge + 1] < s {
            edge += 1;
        }
        let len = stations[edge + 1] - stations[edge];
        let t = if len > T::zero() { (s - stations[edge]) / len } else { T::zero() };
        out.push(pts[edge].lerp(pts[edge + 1], t));
    }
    out
}

/// Number of samples for bounds of the given planar lengths at `step`.
pub fn sample_count(left_len: f64, right_len: f64, step: f64) -> usize {
    ((left_len.max(right_len) / step - 1e-9).ceil().max(1.0)) as usize + 1
}

fn planar_length(pts: &[Point3]) -> f64 {
    pts.windows(2).map(|w| w[0].xy().dist(w[1].xy())).sum()
}

pub fn lanelet_id(lane_id: u32) -> u32 {
    lane_id + 1
}

pub fn document_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// One lanelet per lane. Bounds are resampled at `step` and the centerline is
/// rebuilt from their midpoints.
pub fn convert(map: &HdMapDocument, step: f64) -> Result<LaneletNetwork, LaneletError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(LaneletError::Conversion { lane: 0, message: format!("sampling step {step} must be positive") });
    }
    let mut lanelets = Vec::with_capacity(map.lanes.len());
    for lane in &map.lanes {
        let left = &map.boundaries[lane.left_boundary_id as usize].points;
        let right = &map.boundaries[lane.right_boundary_id as usize].points;
        for (side, b) in [("left", left), ("right", right)] {
            if b.len() < 2 {
                return Err(LaneletError::Conversion {
                    lane: lane.id,
                    message: format!("{side} boundary has {} point(s)", b.len()),
                });
            }
        }
        let n = sample_count(planar_length(left), planar_length(right), step);
        let left_bound = resample(left, n);
        let right_bound = resample(right, n);
        let centerline = left_bound.iter().zip(&right_bound).map(|(a, b)| a.midpoint(*b)).collect();
        lanelets.push(Lanelet {
            id: lanelet_id(lane.id),
            left_bound,
            right_bound,
            centerline,
            predecessors: lane.predecessors.iter().map(|&p| lanelet_id(p)).collect(),
            successors: lane.successor_ids().map(lanelet_id).collect(),
            adjacent_left: None,
            adjacent_right: None,
        });
    }

    // Group lanes run left to right facing along the segment; an opposing
    // lane sees that order mirrored.
    for g in &map.groups {
        for pair in g.lane_ids.windows(2) {
            let (a, b) = (map.lane(pair[0]), map.lane(pair[1]));
            let same = a.travel_direction == b.travel_direction;
            let adj_a = Adjacency { id: lanelet_id(b.id), same_direction: same };
            let adj_b = Adjacency { id: lanelet_id(a.id), same_direction: same };
            let la = &mut lanelets[a.id as usize];
            match a.travel_direction {
                TravelDirection::AlongSegment => la.adjacent_right = Some(adj_a),
                TravelDirection::AgainstSegment => la.adjacent_left = Some(adj_a),
            }
            let lb = &mut lanelets[b.id as usize];
            match b.travel_direction {
                TravelDirection::AlongSegment => lb.adjacent_left = Some(adj_b),
                TravelDirection::AgainstSegment => lb.adjacent_right = Some(adj_b),
            }
        }
    }

    Ok(LaneletNetwork {
        lanelets,
        metadata: NetworkMetadata {
            source: document_hash(&map.to_json()),
            sampling_step: step,
            config_hash: map.metadata.config_hash.clone(),
            defect_artifact: false,
        },
    })
}

pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        v.to_string()
    }
}

fn parse_number(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok().filter(|v: &f64| v.is_finite()),
    }
}

pub fn to_xml(net: &LaneletNetwork) -> String {
    let m = &net.metadata;
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = write!(
        s,
        "<laneletNetwork meta_source=\"{}\" sampling_step=\"{}\" config_hash=\"{}\"",
        escape(&m.source),
        format_number(m.sampling_step),
        escape(&m.config_hash)
    );
    if m.defect_artifact {
        s.push_str(" defect_artifact=\"true\"");
    }
    s.push_str(">\n");
    for l in &net.lanelets {
        let _ = writeln!(s, "  <lanelet id=\"{}\">", l.id);
        for (tag, pts) in [("leftBound", &l.left_bound), ("rightBound", &l.right_bound), ("centerline", &l.centerline)] {
            let _ = writeln!(s, "    <{tag}>");
            for p in pts {
                let _ = writeln!(
                    s,
                    "      <point x=\"{}\" y=\"{}\" z=\"{}\"/>",
                    format_number(p.x),
                    format_number(p.y),
                    format_number(p.z)
                );
            }
            let _ = writeln!(s, "    </{tag}>");
        }
        for p in &l.predecessors {
            let _ = writeln!(s, "    <predecessor ref=\"{p}\"/>");
        }
        for p in &l.successors {
            let _ = writeln!(s, "    <successor ref=\"{p}\"/>");
        }
        for (tag, adj) in [("adjacentLeft", l.adjacent_left), ("adjacentRight", l.adjacent_right)] {
            if let Some(a) = adj {
                let _ = writeln!(s, "    <{tag} ref=\"{}\" sameDirection=\"{}\"/>", a.id, a.same_direction);
            }
        }
        s.push_str("  </lanelet>\n");
    }
    s.push_str("</laneletNetwork>\n");
    s
}

pub fn network_hash(net: &LaneletNetwork) -> String {
    document_hash(&to_xml(net))
}

pub fn write_network(net: &LaneletNetwork, path: &Path) -> Result<(), LaneletError> {
    let dangling = net.dangling_references();
    if !dangling.is_empty() && !net.metadata.defect_artifact {
        return Err(LaneletError::Dangling(describe_dangling(&dangling)));
    }
    std::fs::write(path, to_xml(net))?;
    Ok(())
}

pub fn read_network(path: &Path) -> Result<LaneletNetwork, LaneletError> {
    from_xml(&std::fs::read_to_string(path)?)
}

fn describe_dangling(d: &[(u32, u32)]) -> String {
    d.iter().map(|(from, to)| format!("{from}->{to}")).collect::<Vec<_>>().join(", ")
}

struct XmlCursor {
    path: Vec<String>,
}

impl XmlCursor {
    fn path(&self) -> String {
        format!("/{}", self.path.join("/"))
    }

    fn err(&self, message: impl Into<String>) -> LaneletError {
        LaneletError::Schema { path: self.path(), message: message.into() }
    }

    fn attr(&self, e: &BytesStart, name: &str) -> Result<Option<String>, LaneletError> {
        for a in e.attributes() {
            let a = a.map_err(|x| self.err(x.to_string()))?;
            if a.key.as_ref() == name.as_bytes() {
                let v = a.unescape_value().map_err(|x| self.err(x.to_string()))?;
                return Ok(Some(v.into_owned()));
            }
        }
        Ok(None)
    }

    fn required(&self, e: &BytesStart, name: &str) -> Result<String, LaneletError> {
        self.attr(e, name)?.ok_or_else(|| self.err(format!("missing attribute `{name}`")))
    }

    fn number(&self, e: &BytesStart, name: &str) -> Result<f64, LaneletError> {
        let v = self.required(e, name)?;
        parse_number(&v).ok_or_else(|| self.err(format!("attribute `{name}`: `{v}` is not a number")))
    }

    fn id(&self, e: &BytesStart, name: &str) -> Result<u32, LaneletError> {
        let v = self.required(e, name)?;
        v.parse().map_err(|_| self.err(format!("attribute `{name}`: `{v}` is not an id")))
    }

    fn flag(&self, e: &BytesStart, name: &str) -> Result<bool, LaneletError> {
        match self.required(e, name)?.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            v => Err(self.err(format!("attribute `{name}`: `{v}` is not true/false"))),
        }
    }
}

fn empty_lanelet(id: u32) -> Lanelet {
    Lanelet {
        id,
        left_bound: Vec::new(),
        right_bound: Vec::new(),
        centerline: Vec::new(),
        predecessors: Vec::new(),
        successors: Vec::new(),
        adjacent_left: None,
        adjacent_right: None,
    }
}

pub fn from_xml(text: &str) -> Result<LaneletNetwork, LaneletError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    let mut cur = XmlCursor { path: Vec::new() };
    let mut metadata = None;
    let mut lanelets: Vec<Lanelet> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut current: Option<Lanelet> = None;
    let mut bound: Option<String> = None;

    loop {
        let ev = reader.read_event().map_err(|e| cur.err(e.to_string()))?;
        let (e, is_empty) = match ev {
            Event::Start(e) => (e, false),
            Event::Empty(e) => (e, true),
            Event::End(end) => {
                let name = String::from_utf8_lossy(end.name().as_ref()).into_owned();
                match name.as_str() {
                    "lanelet" => {
                        let l = current.take().expect("open lanelet");
                        for (tag, pts) in [("leftBound", &l.left_bound), ("rightBound", &l.right_bound), ("centerline", &l.centerline)] {
                            if pts.len() < 2 {
                                return Err(cur.err(format!("<{tag}> needs at least 2 points, found {}", pts.len())));
                            }
                        }
                        lanelets.push(l);
                    }
                    "leftBound" | "rightBound" | "centerline" => bound = None,
                    _ => {}
                }
                cur.path.pop();
                continue;
            }
            Event::Eof => break,
            Event::Text(_) => return Err(cur.err("unexpected text content")),
            _ => continue,
        };
        let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
        let depth = cur.path.len();
        let label = if name == "lanelet" {
            match cur.attr(&e, "id")? {
                Some(id) => format!("lanelet[@id={id}]"),
                None => name.clone(),
            }
        } else {
            name.clone()
        };
        cur.path.push(label);
        match (depth, name.as_str()) {
            (0, "laneletNetwork") => {
                let defect_artifact = match cur.attr(&e, "defect_artifact")? {
                    Some(_) => cur.flag(&e, "defect_artifact")?,
                    None => false,
                };
                metadata = Some(NetworkMetadata {
                    source: cur.required(&e, "meta_source")?,
                    sampling_step: cur.number(&e, "sampling_step")?,
                    config_hash: cur.attr(&e, "config_hash")?.unwrap_or_default(),
                    defect_artifact,
                });
            }
            (1, "lanelet") => {
                let id = cur.id(&e, "id")?;
                if !seen.insert(id) {
                    return Err(cur.err(format!("duplicate lanelet id {id}")));
                }
                current = Some(empty_lanelet(id));
            }
            (2, "leftBound" | "rightBound" | "centerline") => bound = Some(name.clone()),
            (3, "point") if bound.is_some() => {
                let p = Point3::new(cur.number(&e, "x")?, cur.number(&e, "y")?, cur.number(&e, "z")?);
                let l = current.as_mut().expect("open lanelet");
                match bound.as_deref() {
                    Some("leftBound") => l.left_bound.push(p),
                    Some("rightBound") => l.right_bound.push(p),
                    _ => l.centerline.push(p),
                }
            }
            (2, "predecessor") => {
                let r = cur.id(&e, "ref")?;
                current.as_mut().expect("open lanelet").predecessors.push(r);
            }
            (2, "successor") => {
                let r = cur.id(&e, "ref")?;
                current.as_mut().expect("open lanelet").successors.push(r);
            }
            (2, "adjacentLeft" | "adjacentRight") => {
                let adj = Adjacency { id: cur.id(&e, "ref")?, same_direction: cur.flag(&e, "sameDirection")? };
                let l = current.as_mut().expect("open lanelet");
                let slot = if name == "adjacentLeft" { &mut l.adjacent_left } else { &mut l.adjacent_right };
                if slot.replace(adj).is_some() {
                    return Err(cur.err(format!("repeated <{name}>")));
                }
            }
            _ => return Err(cur.err("unexpected element")),
        }
        if is_empty {
            cur.path.pop();
        }
    }
    let metadata = metadata.ok_or_else(|| cur.err("missing <laneletNetwork> root"))?;
    lanelets.sort_by_key(|l| l.id);
    let net = LaneletNetwork { lanelets, metadata };
    let dangling = net.dangling_references();
    if !dangling.is_empty() && !net.metadata.defect_artifact {
        return Err(LaneletError::Dangling(describe_dangling(&dangling)));
    }
    Ok(net)
}
