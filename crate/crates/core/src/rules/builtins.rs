use crate::geom::min_turning_radius;
use crate::laneletize::Lanelet;
use crate::Point3;

const DISTINCT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predicate {
    FiniteElevation,
    SelfSuccessor,
    ValidPolyline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    MinTurningRadius,
    MinWidth,
}

impl Predicate {
    pub const ALL: [Predicate; 3] = [Predicate::FiniteElevation, Predicate::SelfSuccessor, Predicate::ValidPolyline];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::FiniteElevation => "finite_elevation",
            Predicate::SelfSuccessor => "self_successor",
            Predicate::ValidPolyline => "valid_polyline",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn eval(self, l: &Lanelet) -> bool {
        match self {
            Predicate::FiniteElevation => finite_elevation(l),
            Predicate::SelfSuccessor => l.successors.contains(&l.id),
            Predicate::ValidPolyline => valid_polyline(l),
        }
    }
}

impl Function {
    pub const ALL: [Function; 2] = [Function::MinTurningRadius, Function::MinWidth];

    pub fn name(self) -> &'static str {
        match self {
            Function::MinTurningRadius => "min_turning_radius",
            Function::MinWidth => "min_width",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// The term's value, or why it cannot be computed on this lanelet.
    pub fn eval(self, l: &Lanelet) -> Result<f64, String> {
        match self {
            Function::MinTurningRadius => {
                if !valid_polyline(l) {
                    return Err("min_turning_radius: bounds are not valid polylines".into());
                }
                let xy: Vec<_> = l.centerline.iter().map(|p| p.xy()).collect();
                if !xy.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
                    return Err("min_turning_radius: centerline has non-finite x/y".into());
                }
                Ok(min_turning_radius(&xy))
            }
            Function::MinWidth => {
                if l.left_bound.len() != l.right_bound.len() || l.left_bound.is_empty() {
                    return Err(format!(
                        "min_width: bounds have {} and {} points",
                        l.left_bound.len(),
                        l.right_bound.len()
                    ));
                }
                Ok(l.left_bound
                    .iter()
                    .zip(&l.right_bound)
                    .map(|(a, b)| a.xy().dist(b.xy()))
                    .fold(f64::INFINITY, f64::min))
            }
        }
    }
}

fn finite_elevation(l: &Lanelet) -> bool {
    [&l.left_bound, &l.right_bound, &l.centerline].iter().all(|b| b.iter().all(|p| p.z.is_finite()))
}

fn distinct_points(pts: &[Point3]) -> bool {
    pts.iter().enumerate().any(|(i, p)| pts[i + 1..].iter().any(|q| p.xy().dist(q.xy()) > DISTINCT))
}

fn valid_polyline(l: &Lanelet) -> bool {
    [&l.left_bound, &l.right_bound].iter().all(|b| b.len() >= 2 && distinct_points(b))
}
