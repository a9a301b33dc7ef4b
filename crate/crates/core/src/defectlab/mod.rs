//! Synthetic scenario fixtures, seeded defect injection and detection scoring.

mod fixtures;
mod inject;
mod score;

pub use fixtures::{fixture_terrain, make_fixture, survey_parameter_sets, Fixture, FixtureParams, Scenario, FIXTURE_ORIGIN};
pub use inject::{inject, DefectCategory, DefectManifest, InjectionSpec, ManifestEntry, NARROW_WIDTH};
pub use score::{default_rule_map, score, CategoryMetrics, DetectionMetrics, RuleMap};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DefectError {
    #[error("fixture: {0}")]
    Config(String),
    #[error("baseline network is not clean: {0} violation(s)")]
    DirtyBaseline(usize),
    #[error("{category:?}: {requested} requested but only {eligible} eligible lanelet(s)")]
    NotEnoughTargets { category: DefectCategory, requested: usize, eligible: usize },
    #[error("injection spec: {0}")]
    Spec(String),
    #[error("rule `{0}` is not in the rule map")]
    UnmappedRule(String),
}
