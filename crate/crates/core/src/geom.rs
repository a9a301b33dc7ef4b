//! Planar and spatial polyline geometry, generic over the floating-point scalar.
//!
//! Everything here works for any [`Scalar`] (`f32` or `f64`). The map documents
//! themselves are stored in `f64`; see the aliases at the crate root.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Floating-point scalar usable by the geometry and terrain kernels.
pub trait Scalar: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Unit vector, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::lit(1e-12) && n.is_finite() {
            Some(Self::new(self.x / n, self.y / n))
        } else {
            None
        }
    }

    /// Left-hand unit normal (counter-clockwise rotation by 90 degrees).
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Self, t: T) -> Self {
        Self::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    pub fn midpoint(self, o: Self) -> Self {
        Self::new((self.x + o.x) / T::lit(2.0), (self.y + o.y) / T::lit(2.0))
    }

    pub fn with_z(self, z: T) -> Vec3<T> {
        Vec3::new(self.x, self.y, z)
    }
}

impl<T: Scalar> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn xy(self) -> Vec2<T> {
        Vec2::new(self.x, self.y)
    }

    pub fn lerp(self, o: Self, t: T) -> Self {
        Self::new(
            self.x + (o.x - self.x) * t,
            self.y + (o.y - self.y) * t,
            self.z + (o.z - self.z) * t,
        )
    }

    pub fn midpoint(self, o: Self) -> Self {
        let two = T::lit(2.0);
        Self::new((self.x + o.x) / two, (self.y + o.y) / two, (self.z + o.z) / two)
    }

    pub fn dist(self, o: Self) -> T {
        let d = Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z);
        (d.x * d.x + d.y * d.y + d.z * d.z).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

// Points serialize as bare coordinate arrays: [x, y] and [x, y, z].

impl<T: Serialize> Serialize for Vec2<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.x, &self.y).serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Vec2<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y) = <(T, T)>::deserialize(d)?;
        Ok(Self { x, y })
    }
}

impl<T: Serialize> Serialize for Vec3<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.x, &self.y, &self.z).serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Vec3<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y, z) = <(T, T, T)>::deserialize(d)?;
        Ok(Self { x, y, z })
    }
}

/// Cumulative planar arclength at each vertex; first entry is zero.
pub fn cumulative_length<T: Scalar>(pts: &[Vec2<T>]) -> Vec<T> {
    let mut out = Vec::with_capacity(pts.len());
    let mut acc = T::zero();
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            acc = acc + p.dist(pts[i - 1]);
        }
        out.push(acc);
    }
    out
}

pub fn polyline_length<T: Scalar>(pts: &[Vec2<T>]) -> T {
    pts.windows(2).fold(T::zero(), |acc, w| acc + w[0].dist(w[1]))
}

/// Planar arclength of a 3D polyline (z ignored).
pub fn polyline_length_xy<T: Scalar>(pts: &[Vec3<T>]) -> T {
    pts.windows(2).fold(T::zero(), |acc, w| acc + w[0].xy().dist(w[1].xy()))
}

/// Closest point on segment `[a, b]` to `p`, as `(foot, t)` with `t` in `[0, 1]`.
pub fn project_onto_segment<T: Scalar>(p: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> (Vec2<T>, T) {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= T::zero() {
        return (a, T::zero());
    }
    let t = ((p - a).dot(ab) / len2).max(T::zero()).min(T::one());
    (a.lerp(b, t), t)
}

/// Foot of the perpendicular from `p` onto a polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylineProjection<T> {
    pub foot: Vec2<T>,
    pub distance: T,
    /// Index of the edge `[pts[edge], pts[edge + 1]]` holding the foot.
    pub edge: usize,
    /// Arclength from the first vertex to the foot.
    pub station: T,
}

/// Closest point on a polyline; ties resolve to the lowest station.
pub fn project_onto_polyline<T: Scalar>(p: Vec2<T>, pts: &[Vec2<T>]) -> Option<PolylineProjection<T>> {
    let mut best: Option<PolylineProjection<T>> = None;
    let mut start = T::zero();
    for (edge, w) in pts.windows(2).enumerate() {
        let (foot, t) = project_onto_segment(p, w[0], w[1]);
        let len = w[0].dist(w[1]);
        let distance = p.dist(foot);
        if best.is_none_or(|b| distance < b.distance) {
            best = Some(PolylineProjection { foot, distance, edge, station: start + len * t });
        }
        start = start + len;
    }
    best
}

/// Whether segment `[a, b]` touches the closed rectangle `[lo, hi]`.
pub fn segment_intersects_rect<T: Scalar>(a: Vec2<T>, b: Vec2<T>, lo: Vec2<T>, hi: Vec2<T>) -> bool {
    // Liang-Barsky clipping of the parametric segment against the four slabs.
    let d = b - a;
    let mut t0 = T::zero();
    let mut t1 = T::one();
    for (p, q) in [
        (-d.x, a.x - lo.x),
        (d.x, hi.x - a.x),
        (-d.y, a.y - lo.y),
        (d.y, hi.y - a.y),
    ] {
        if p == T::zero() {
            if q < T::zero() {
                return false;
            }
        } else {
            let r = q / p;
            if p < T::zero() {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Insert vertices so no edge is longer than `spacing`. Original vertices are kept bit-for-bit.
pub fn densify<T: Scalar>(pts: &[Vec2<T>], spacing: T) -> Vec<Vec2<T>> {
    let mut out = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            let prev = pts[i - 1];
            let len = prev.dist(*p);
            let pieces = (len / spacing).ceil().to_usize().unwrap_or(1).max(1);
            for k in 1..pieces {
                let t = T::from_usize(k).unwrap() / T::from_usize(pieces).unwrap();
                out.push(prev.lerp(*p, t));
            }
        }
        out.push(*p);
    }
    out
}

/// Per-vertex lateral offset directions for miter-joined offsetting.
///
/// `point + dirs[i] * d` is the vertex offset by signed distance `d` (left positive).
/// Interior directions are the averaged unit normals scaled by the miter factor,
/// with the factor capped at `miter_cap`. Returns the index of the first
/// zero-length edge on failure.
pub fn miter_directions<T: Scalar>(pts: &[Vec2<T>], miter_cap: T) -> Result<Vec<Vec2<T>>, usize> {
    let normals = pts
        .windows(2)
        .enumerate()
        .map(|(i, w)| (w[1] - w[0]).normalized().map(Vec2::perp).ok_or(i))
        .collect::<Result<Vec<_>, _>>()?;
    if normals.is_empty() {
        return Err(0);
    }
    let mut dirs = Vec::with_capacity(pts.len());
    dirs.push(normals[0]);
    for k in 1..pts.len() - 1 {
        let (n0, n1) = (normals[k - 1], normals[k]);
        let dir = match (n0 + n1).normalized() {
            Some(m) => {
                let cos = m.dot(n1);
                let scale = if cos * miter_cap > T::one() { T::one() / cos } else { miter_cap };
                m * scale
            }
            // Full reversal: fall back to the outgoing normal.
            None => n1,
        };
        dirs.push(dir);
    }
    dirs.push(normals[normals.len() - 1]);
    Ok(dirs)
}

/// Circumradius of a vertex triple; `+inf` for (near) collinear triples.
///
/// The collinearity guard is relative: area below `1e-9 * a * b * c`.
pub fn circumradius<T: Scalar>(p: Vec2<T>, q: Vec2<T>, r: Vec2<T>) -> T {
    let a = p.dist(q);
    let b = q.dist(r);
    let c = r.dist(p);
    let area = ((q - p).cross(r - p) / T::lit(2.0)).abs();
    let abc = a * b * c;
    if area < T::lit(1e-9) * abc || abc == T::zero() {
        T::infinity()
    } else {
        abc / (T::lit(4.0) * area)
    }
}

/// Minimum circumradius over consecutive vertex triples; `+inf` for fewer than three points.
pub fn min_turning_radius<T: Scalar>(pts: &[Vec2<T>]) -> T {
    pts.windows(3)
        .map(|w| circumradius(w[0], w[1], w[2]))
        .fold(T::infinity(), T::min)
}

/// Signed angle in degrees from heading `from` to heading `to`, in `(-180, 180]`.
/// Counter-clockwise is positive.
pub fn signed_angle_deg<T: Scalar>(from: Vec2<T>, to: Vec2<T>) -> T {
    let ang = from.cross(to).atan2(from.dot(to)).to_degrees();
    if ang <= T::lit(-180.0) {
        ang + T::lit(360.0)
    } else {
        ang
    }
}
