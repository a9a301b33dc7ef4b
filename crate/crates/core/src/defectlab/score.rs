use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{DefectCategory, DefectError, DefectManifest};
use crate::rules::ViolationReport;

/// Which defect category each rule detects; `None` marks a rule that is
/// checked but attributed to no category.
pub type RuleMap = BTreeMap<String, Option<DefectCategory>>;

pub fn default_rule_map() -> RuleMap {
    [
        ("elevation_complete", Some(DefectCategory::ElevationNonFinite)),
        ("no_self_loop", Some(DefectCategory::SelfLoopSuccessor)),
        ("polyline_valid", None),
        ("min_turn_radius", None),
        ("lane_width", Some(DefectCategory::LaneWidthNarrow)),
    ]
    .into_iter()
    .map(|(r, c)| (r.to_string(), c))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub n_injected: usize,
    pub n_reported: usize,
    pub n_true_positive: usize,
    pub n_false_positive: usize,
    /// `None` when nothing was reported.
    pub precision: Option<f64>,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    #[serde(flatten)]
    pub categories: BTreeMap<DefectCategory, CategoryMetrics>,
    /// Violations of rules mapped to no category.
    pub unattributed_violations: usize,
}

impl DetectionMetrics {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics serialize");
        s.push('\n');
        s
    }
}

/// Precision and true positive rate per category. A reported violation is a
/// true positive when its (category, element id) pair is in the manifest.
pub fn score(report: &ViolationReport, manifest: &DefectManifest, rule_map: &RuleMap) -> Result<DetectionMetrics, DefectError> {
    let truth: BTreeSet<(DefectCategory, u32)> =
        manifest.entries.iter().map(|e| (e.category, e.target_lanelet_id)).collect();
    let mut reported: BTreeMap<DefectCategory, BTreeSet<u32>> = BTreeMap::new();
    let mut unattributed = 0;
    for r in &report.rules {
        match rule_map.get(&r.rule_id) {
            None => return Err(DefectError::UnmappedRule(r.rule_id.clone())),
            Some(None) => unattributed += r.count,
            Some(Some(c)) => reported.entry(*c).or_default().extend(r.violations.iter().map(|v| v.element_id)),
        }
    }
    let categories = DefectCategory::ALL
        .into_iter()
        .map(|c| {
            let n_injected = truth.iter().filter(|(k, _)| *k == c).count();
            let ids = reported.remove(&c).unwrap_or_default();
            let n_reported = ids.len();
            let n_true_positive = ids.iter().filter(|id| truth.contains(&(c, **id))).count();
            let m = CategoryMetrics {
                n_injected,
                n_reported,
                n_true_positive,
                n_false_positive: n_reported - n_true_positive,
                precision: (n_reported > 0).then(|| n_true_positive as f64 / n_reported as f64),
                tpr: if n_injected > 0 { n_true_positive as f64 / n_injected as f64 } else { 1.0 },
            };
            (c, m)
        })
        .collect();
    Ok(DetectionMetrics { categories, unattributed_violations: unattributed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defectlab::ManifestEntry;
    use crate::rules::{RuleViolations, Violation};

    fn report(rule: &str, ids: &[u32]) -> ViolationReport {
        let violations: Vec<Violation> =
            ids.iter().map(|&element_id| Violation { element_id, measured: vec![], message: String::new() }).collect();
        ViolationReport {
            network_hash: String::new(),
            total_violations: ids.len(),
            rules: vec![RuleViolations { rule_id: rule.into(), count: ids.len(), violations }],
        }
    }

    fn manifest(c: DefectCategory, ids: impl Iterator<Item = u32>) -> DefectManifest {
        DefectManifest {
            seed: 0,
            entries: ids.map(|t| ManifestEntry { category: c, target_lanelet_id: t, parameters: serde_json::json!({}) }).collect(),
        }
    }

    #[test]
    fn perfect_detection() {
        let ids: Vec<u32> = (1..=10).collect();
        let m = score(&report("elevation_complete", &ids), &manifest(DefectCategory::ElevationNonFinite, 1..=10), &default_rule_map()).unwrap();
        let e = &m.categories[&DefectCategory::ElevationNonFinite];
        assert_eq!((e.n_injected, e.n_reported, e.n_true_positive, e.n_false_positive), (10, 10, 10, 0));
        assert_eq!((e.precision, e.tpr), (Some(1.0), 1.0));
        let w = &m.categories[&DefectCategory::LaneWidthNarrow];
        assert_eq!((w.precision, w.tpr), (None, 1.0));
    }

    #[test]
    fn nothing_reported() {
        let m = score(&report("no_self_loop", &[]), &manifest(DefectCategory::SelfLoopSuccessor, 1..=10), &default_rule_map()).unwrap();
        let s = &m.categories[&DefectCategory::SelfLoopSuccessor];
        assert_eq!((s.precision, s.tpr), (None, 0.0));
        assert!(m.to_json().contains("\"precision\": null"));
    }

    #[test]
    fn false_positives() {
        let ids: Vec<u32> = (1..=12).collect();
        let m = score(&report("lane_width", &ids), &manifest(DefectCategory::LaneWidthNarrow, 1..=10), &default_rule_map()).unwrap();
        let w = &m.categories[&DefectCategory::LaneWidthNarrow];
        assert_eq!((w.n_true_positive, w.n_false_positive), (10, 2));
        assert_eq!(w.precision, Some(10.0 / 12.0));
        assert_eq!(w.tpr, 1.0);
    }

    #[test]
    fn category_mismatch_is_not_a_hit() {
        let m = score(&report("no_self_loop", &[3]), &manifest(DefectCategory::ElevationNonFinite, 3..=3), &default_rule_map()).unwrap();
        assert_eq!(m.categories[&DefectCategory::SelfLoopSuccessor].n_false_positive, 1);
        assert_eq!(m.categories[&DefectCategory::ElevationNonFinite].tpr, 0.0);
    }

    #[test]
    fn unmapped_rules_fail_and_untracked_rules_are_counted() {
        let err = score(&report("mystery", &[1]), &manifest(DefectCategory::ElevationNonFinite, 1..=1), &default_rule_map());
        assert_eq!(err.unwrap_err(), DefectError::UnmappedRule("mystery".into()));
        let m = score(&report("polyline_valid", &[1, 2]), &manifest(DefectCategory::ElevationNonFinite, 1..=1), &default_rule_map()).unwrap();
        assert_eq!(m.unattributed_violations, 2);
    }
}
