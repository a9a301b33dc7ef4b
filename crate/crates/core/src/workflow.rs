//! Run configuration and the pipeline stages behind the command line.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::geodata::{cache_document, clip_to_roi, load_road_features, OriginOffset, RegionOfInterest, RoadFeature};
use crate::laneletize::{convert, read_network, to_xml, LaneletNetwork};
use crate::mapgen::{config_hash, generate, restore_global, GeneratorConfig, HdMapDocument};
use crate::rules::{evaluate_partitioned, parse_rules, RuleAst, ViolationReport, DEFAULT_RULES};
use crate::terrain::{load_asc, mosaic};
use crate::Dem;

pub const CLIPPED_FILE: &str = "clipped.geojson";
pub const MAP_FILE: &str = "map.hdmap.json";
pub const LOCAL_MAP_FILE: &str = "map.local.hdmap.json";
pub const NETWORK_FILE: &str = "network.lanelets.xml";
pub const REPORT_FILE: &str = "report.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const INJECTED_FILE: &str = "network.injected.xml";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.json";

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{stage} ({input}): {message}")]
    Stage { stage: &'static str, input: String, message: String },
}

pub fn stage_err(stage: &'static str, input: impl AsRef<Path>, e: impl ToString) -> WorkflowError {
    WorkflowError::Stage { stage, input: input.as_ref().display().to_string(), message: e.to_string() }
}

fn one() -> f64 {
    1.0
}

fn one_partition() -> usize {
    1
}

/// Everything a pipeline run needs. Relative paths are taken relative to
/// the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `[min_x, min_y, max_x, max_y]`
    pub roi: [f64; 4],
    pub roads: PathBuf,
    #[serde(default)]
    pub dem: Vec<PathBuf>,
    #[serde(default)]
    pub generator: GeneratorConfig,
    #[serde(default = "one")]
    pub sampling_step: f64,
    /// Rule file; the shipped rules when absent.
    #[serde(default)]
    pub rules: Option<PathBuf>,
    #[serde(default = "one_partition")]
    pub partitions: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, WorkflowError> {
        let text = fs::read_to_string(path).map_err(|e| WorkflowError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| WorkflowError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.roads);
        self.dem.iter_mut().for_each(fix);
        if let Some(r) = &mut self.rules {
            fix(r);
        }
        if let Some(o) = &mut self.out_dir {
            fix(o);
        }
    }

    pub fn region(&self) -> Result<RegionOfInterest, WorkflowError> {
        let [a, b, c, d] = self.roi;
        RegionOfInterest::new(a, b, c, d).map_err(|e| WorkflowError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), WorkflowError> {
        self.region()?;
        self.generator.validate().map_err(|e| WorkflowError::Config(e.to_string()))?;
        if !(self.sampling_step > 0.0 && self.sampling_step <= 10.0) {
            return Err(WorkflowError::Config(format!("sampling_step must be in (0, 10], got {}", self.sampling_step)));
        }
        if self.partitions == 0 {
            return Err(WorkflowError::Config("partitions must be at least 1".into()));
        }
        Ok(())
    }

    /// The tunables of this run, without file locations.
    pub fn effective(&self) -> Value {
        let roi = self.region().expect("validated");
        json!({
            "config_hash": config_hash(&roi, &self.generator),
            "roi": self.roi,
            "generator": self.generator,
            "sampling_step": self.sampling_step,
            "partitions": self.partitions,
            "seed": self.seed,
        })
    }
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, WorkflowError> {
    fs::create_dir_all(dir).map_err(|e| stage_err("output", dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| stage_err("output", &path, e))?;
    Ok(path)
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

pub struct Clipped {
    pub features: Vec<RoadFeature>,
    /// Cache document: the clipped features plus load diagnostics.
    pub cache: Value,
}

pub fn clip_stage(roads: &Path, roi: &RegionOfInterest, cfg: &GeneratorConfig) -> Result<Clipped, WorkflowError> {
    let far = &cfg.semantics.far_codes;
    let (features, report) = load_road_features(roads, far).map_err(|e| stage_err("clip", roads, e))?;
    let features = clip_to_roi(&features, roi);
    let offset = OriginOffset { offset_x: roi.min_x, offset_y: roi.min_y };
    let cache = cache_document(&features, offset, &report, far);
    Ok(Clipped { features, cache })
}

pub fn load_dem(paths: &[PathBuf]) -> Result<Option<Dem>, WorkflowError> {
    if paths.is_empty() {
        return Ok(None);
    }
    let tiles = paths
        .iter()
        .map(|p| load_asc::<f64>(p).map_err(|e| stage_err("generate", p, e)))
        .collect::<Result<Vec<_>, _>>()?;
    mosaic(&tiles).map(Some).map_err(|e| stage_err("generate", &paths[0], e))
}

/// The map in global coordinates and in the local frame.
pub fn generate_stage(
    features: &[RoadFeature],
    roi: &RegionOfInterest,
    dem: Option<&Dem>,
    cfg: &GeneratorConfig,
    input: &Path,
) -> Result<(HdMapDocument, HdMapDocument), WorkflowError> {
    let local = generate(features, roi, dem, cfg).map_err(|e| stage_err("generate", input, e))?.map;
    let mut global = local.clone();
    restore_global(&mut global);
    Ok((global, local))
}

pub fn convert_stage(map: &HdMapDocument, step: f64, input: &Path) -> Result<LaneletNetwork, WorkflowError> {
    convert(map, step).map_err(|e| stage_err("convert", input, e))
}

pub fn load_map(path: &Path) -> Result<HdMapDocument, WorkflowError> {
    let text = fs::read_to_string(path).map_err(|e| stage_err("convert", path, e))?;
    HdMapDocument::from_json(&text).map_err(|e| stage_err("convert", path, e))
}

pub fn load_network(path: &Path, stage: &'static str) -> Result<LaneletNetwork, WorkflowError> {
    read_network(path).map_err(|e| stage_err(stage, path, e))
}

pub fn load_rules(path: Option<&Path>) -> Result<Vec<RuleAst>, WorkflowError> {
    match path {
        None => Ok(parse_rules(DEFAULT_RULES).expect("shipped rules parse")),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| stage_err("verify", p, e))?;
            parse_rules(&text).map_err(|e| stage_err("verify", p, e))
        }
    }
}

pub fn verify_stage(net: &LaneletNetwork, rules: &[RuleAst], partitions: usize) -> ViolationReport {
    evaluate_partitioned(rules, net, partitions)
}

/// Writes the verification report as JSON and text.
pub fn write_report(dir: &Path, report: &ViolationReport) -> Result<(), WorkflowError> {
    write_artifact(dir, REPORT_FILE, &report.to_json())?;
    write_artifact(dir, REPORT_TEXT_FILE, &report.to_text())?;
    Ok(())
}

/// clip, generate, convert and verify, writing every artifact under `out`.
pub fn run_pipeline(cfg: &RunConfig, out: &Path) -> Result<ViolationReport, WorkflowError> {
    cfg.validate()?;
    let roi = cfg.region()?;
    write_artifact(out, EFFECTIVE_CONFIG_FILE, &pretty(&cfg.effective()))?;

    let clipped = clip_stage(&cfg.roads, &roi, &cfg.generator)?;
    write_artifact(out, CLIPPED_FILE, &pretty(&clipped.cache))?;

    let dem = load_dem(&cfg.dem)?;
    let (global, local) = generate_stage(&clipped.features, &roi, dem.as_ref(), &cfg.generator, &cfg.roads)?;
    write_artifact(out, MAP_FILE, &global.to_json())?;
    write_artifact(out, LOCAL_MAP_FILE, &local.to_json())?;

    let net = convert_stage(&global, cfg.sampling_step, &out.join(MAP_FILE))?;
    write_artifact(out, NETWORK_FILE, &to_xml(&net))?;

    let rules = load_rules(cfg.rules.as_deref())?;
    let report = verify_stage(&net, &rules, cfg.partitions);
    write_report(out, &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defectlab::{make_fixture, FixtureParams, Scenario};
    use crate::terrain::write_asc;

    #[test]
    fn config_defaults_and_paths() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        fs::write(&p, r#"{"roi":[0,0,10,10],"roads":"in/roads.geojson","dem":["t.asc"],"generator":{"max_grade":0.1}}"#).unwrap();
        let c = RunConfig::load(&p).unwrap();
        assert_eq!(c.roads, dir.path().join("in/roads.geojson"));
        assert_eq!(c.dem, vec![dir.path().join("t.asc")]);
        assert_eq!(c.generator.max_grade, 0.1);
        assert_eq!(c.generator.cluster_tol, 1.0);
        assert_eq!((c.sampling_step, c.partitions, c.seed), (1.0, 1, 0));

        fs::write(&p, r#"{"roi":[0,0,10,10],"roads":"r","bogus":1}"#).unwrap();
        assert!(RunConfig::load(&p).unwrap_err().to_string().contains("bogus"));
        fs::write(&p, r#"{"roi":[10,0,0,10],"roads":"r"}"#).unwrap();
        assert!(RunConfig::load(&p).is_err());
        fs::write(&p, r#"{"roi":[0,0,10,10],"roads":"r","partitions":0}"#).unwrap();
        assert!(RunConfig::load(&p).is_err());
    }

    #[test]
    fn pipeline_on_straight_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let fx = make_fixture(Scenario::Straight, FixtureParams { size: 100.0, lanes_per_direction: 1 }).unwrap();
        fs::write(dir.path().join("roads.geojson"), pretty(&fx.geojson())).unwrap();
        fs::write(dir.path().join("dem.asc"), write_asc(&fx.dem)).unwrap();
        let cfg = RunConfig {
            roi: [fx.roi.min_x, fx.roi.min_y, fx.roi.max_x, fx.roi.max_y],
            roads: dir.path().join("roads.geojson"),
            dem: vec![dir.path().join("dem.asc")],
            generator: GeneratorConfig::default(),
            sampling_step: 1.0,
            rules: None,
            partitions: 2,
            out_dir: None,
            seed: 0,
        };
        let out = dir.path().join("out");
        let report = run_pipeline(&cfg, &out).unwrap();
        assert_eq!(report.total_violations, 0);
        for f in [CLIPPED_FILE, MAP_FILE, LOCAL_MAP_FILE, NETWORK_FILE, REPORT_FILE, REPORT_TEXT_FILE, EFFECTIVE_CONFIG_FILE] {
            assert!(out.join(f).is_file(), "{f}");
        }
        let net = load_network(&out.join(NETWORK_FILE), "verify").unwrap();
        assert_eq!(net.lanelets.len(), 2);
        assert_eq!(net.metadata.config_hash, cfg.effective()["config_hash"]);

        let text = fs::read_to_string(out.join(MAP_FILE)).unwrap();
        let map = load_map(&out.join(MAP_FILE)).unwrap();
        assert_eq!(map.to_json(), text);
        assert_eq!(to_xml(&convert_stage(&map, 1.0, &out).unwrap()), fs::read_to_string(out.join(NETWORK_FILE)).unwrap());
    }
}
