use std::collections::BTreeMap;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::DefectError;
use crate::laneletize::{Lanelet, LaneletNetwork};
use crate::rules::{evaluate, parse_rules, DEFAULT_RULES};
use crate::Point3;

/// Lateral distance between the bounds at a narrowed vertex, meters.
pub const NARROW_WIDTH: f64 = 0.8;
const SPAN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DefectCategory {
    ElevationNonFinite,
    LaneWidthNarrow,
    SelfLoopSuccessor,
}

impl DefectCategory {
    pub const ALL: [DefectCategory; 3] =
        [DefectCategory::ElevationNonFinite, DefectCategory::LaneWidthNarrow, DefectCategory::SelfLoopSuccessor];
}

impl FromStr for DefectCategory {
    type Err = DefectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['_', '-'], "");
        match key.as_str() {
            "elevationnonfinite" | "elevation" => Ok(Self::ElevationNonFinite),
            "lanewidthnarrow" | "width" => Ok(Self::LaneWidthNarrow),
            "selfloopsuccessor" | "selfloop" => Ok(Self::SelfLoopSuccessor),
            _ => Err(DefectError::Spec(format!("unknown defect category `{}`", s.trim()))),
        }
    }
}

/// Number of defects per category.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionSpec(pub BTreeMap<DefectCategory, usize>);

impl FromStr for InjectionSpec {
    type Err = DefectError;

    /// `category=count,...`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (cat, count) =
                part.split_once('=').ok_or_else(|| DefectError::Spec(format!("`{part}` is not category=count")))?;
            let count: usize =
                count.trim().parse().map_err(|_| DefectError::Spec(format!("`{}` is not a count", count.trim())))?;
            if out.insert(cat.parse()?, count).is_some() {
                return Err(DefectError::Spec(format!("category `{}` given twice", cat.trim())));
            }
        }
        Ok(Self(out))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub category: DefectCategory,
    pub target_lanelet_id: u32,
    pub parameters: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectManifest {
    pub seed: u64,
    /// Sorted by (category, target).
    pub entries: Vec<ManifestEntry>,
}

impl DefectManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn has_interior_span(l: &Lanelet) -> bool {
    let n = l.left_bound.len().min(l.right_bound.len());
    n >= SPAN + 2 && l.left_bound.len() == l.right_bound.len()
}

fn eligible(net: &LaneletNetwork, c: DefectCategory) -> Vec<usize> {
    (0..net.lanelets.len())
        .filter(|&i| match c {
            DefectCategory::SelfLoopSuccessor => true,
            _ => has_interior_span(&net.lanelets[i]),
        })
        .collect()
}

// First of SPAN consecutive interior indices.
fn interior_start(l: &Lanelet, rng: &mut ChaCha8Rng) -> usize {
    rng.gen_range(1..=l.left_bound.len() - 1 - SPAN)
}

fn recompute_centerline(l: &mut Lanelet, idx: &[usize]) {
    for &i in idx {
        l.centerline[i] = l.left_bound[i].midpoint(l.right_bound[i]);
    }
}

fn apply(l: &mut Lanelet, c: DefectCategory, rng: &mut ChaCha8Rng) -> Value {
    match c {
        DefectCategory::ElevationNonFinite => {
            let s = interior_start(l, rng);
            let idx: Vec<usize> = (s..s + SPAN).collect();
            for &i in &idx {
                l.left_bound[i].z = f64::NAN;
            }
            recompute_centerline(l, &idx);
            json!({"bound": "left", "indices": idx, "z": "nan"})
        }
        DefectCategory::LaneWidthNarrow => {
            let s = interior_start(l, rng);
            let idx: Vec<usize> = (s..s + SPAN).collect();
            for &i in &idx {
                let (a, b) = (l.left_bound[i], l.right_bound[i]);
                let mid = a.xy().midpoint(b.xy());
                let half = (a.xy() - b.xy()).normalized().unwrap_or(crate::Point2::new(0.0, 1.0)) * (NARROW_WIDTH / 2.0);
                let (na, nb) = (mid + half, mid - half);
                l.left_bound[i] = Point3::new(na.x, na.y, a.z);
                l.right_bound[i] = Point3::new(nb.x, nb.y, b.z);
            }
            recompute_centerline(l, &idx);
            json!({"indices": idx, "width_m": NARROW_WIDTH})
        }
        DefectCategory::SelfLoopSuccessor => {
            l.successors.push(l.id);
            json!({})
        }
    }
}

/// Injects known defects into a clean network.
///
/// Targets are drawn without replacement per category, categories in their
/// declaration order, from one ChaCha8 stream seeded with `seed`.
pub fn inject(net: &LaneletNetwork, spec: &InjectionSpec, seed: u64) -> Result<(LaneletNetwork, DefectManifest), DefectError> {
    let rules = parse_rules(DEFAULT_RULES).expect("shipped rules parse");
    let baseline = evaluate(&rules, net);
    if baseline.total_violations > 0 {
        return Err(DefectError::DirtyBaseline(baseline.total_violations));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = net.clone();
    let mut entries = Vec::new();
    for (&category, &count) in &spec.0 {
        let pool = eligible(net, category);
        if count > pool.len() {
            return Err(DefectError::NotEnoughTargets { category, requested: count, eligible: pool.len() });
        }
        let mut picks: Vec<usize> = sample(&mut rng, pool.len(), count).into_iter().map(|k| pool[k]).collect();
        picks.sort_unstable();
        for i in picks {
            let l = &mut out.lanelets[i];
            let parameters = apply(l, category, &mut rng);
            entries.push(ManifestEntry { category, target_lanelet_id: l.id, parameters });
        }
    }
    out.metadata.defect_artifact = true;
    Ok((out, DefectManifest { seed, entries }))
}
