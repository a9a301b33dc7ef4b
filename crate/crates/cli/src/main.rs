use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use geohd::defectlab::{default_rule_map, inject, make_fixture, score, DefectManifest, FixtureParams, InjectionSpec, Scenario};
use geohd::geodata::RegionOfInterest;
use geohd::laneletize::to_xml;
use geohd::mapgen::GeneratorConfig;
use geohd::rules::ViolationReport;
use geohd::terrain::write_asc;
use geohd::workflow::{self as wf, pretty, stage_err, RunConfig, WorkflowError};

#[derive(Parser)]
#[command(name = "geohd", version, about = "Generate, convert and verify lane-level HD maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Out {
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Load road centerlines and keep the features touching the ROI.
    Clip {
        #[arg(long, value_name = "F")]
        roads: PathBuf,
        #[arg(long, value_name = "x0,y0,x1,y1", value_parser = parse_roi, allow_hyphen_values = true)]
        roi: RegionOfInterest,
        /// Write the clipped features to clipped.geojson.
        #[arg(long)]
        cache: bool,
        /// Generator settings (JSON).
        #[arg(long, value_name = "F")]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Build the lane-level map.
    Generate {
        #[arg(long, value_name = "F")]
        roads: PathBuf,
        #[arg(long, value_name = "x0,y0,x1,y1", value_parser = parse_roi, allow_hyphen_values = true)]
        roi: RegionOfInterest,
        /// DEM tiles, mosaicked in order; later tiles win where they overlap.
        #[arg(long, value_name = "F", num_args = 1..)]
        dem: Vec<PathBuf>,
        #[arg(long, value_name = "F")]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Turn a global map document into a lanelet network.
    Convert {
        #[arg(long, value_name = "F")]
        map: PathBuf,
        #[arg(long, value_name = "S", default_value_t = 1.0)]
        step: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Evaluate rules on a lanelet network.
    Verify {
        #[arg(long = "net", value_name = "F")]
        net_flag: Option<PathBuf>,
        #[arg(value_name = "NET", conflicts_with = "net_flag")]
        net: Option<PathBuf>,
        /// Rule file; the shipped rules when omitted.
        #[arg(long, value_name = "F")]
        rules: Option<PathBuf>,
        #[arg(long, value_name = "N", default_value_t = 1)]
        partitions: usize,
        /// Exit with status 1 when a rule is violated.
        #[arg(long, value_name = "BOOL", default_value_t = true, action = ArgAction::Set)]
        fail_on_violation: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Inject known defects into a clean network.
    Inject {
        #[arg(long, value_name = "F")]
        net: PathBuf,
        /// category=count,... with categories elevation, width, self_loop.
        #[arg(long, value_name = "SPEC")]
        spec: InjectionSpec,
        #[arg(long, value_name = "N")]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Score a report against an injection manifest.
    Evaluate {
        #[arg(long = "report", value_name = "F")]
        report_flag: Option<PathBuf>,
        #[arg(long = "manifest", value_name = "F")]
        manifest_flag: Option<PathBuf>,
        #[arg(value_name = "REPORT", conflicts_with = "report_flag")]
        report: Option<PathBuf>,
        #[arg(value_name = "MANIFEST", conflicts_with = "manifest_flag")]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Run clip, generate, convert and verify from a configuration file.
    Pipeline {
        #[arg(long, value_name = "F")]
        config: PathBuf,
        /// Overrides `out_dir` of the configuration.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        partitions: Option<usize>,
        #[arg(long, value_name = "S")]
        step: Option<f64>,
        #[arg(long, value_name = "F")]
        rules: Option<PathBuf>,
        /// Exit with status 1 when a rule is violated.
        #[arg(long)]
        fail_on_violation: bool,
    },
    /// Write a synthetic test scene: roads.geojson, dem.asc and config.json.
    Fixture {
        /// straight, curve, t-junction, crossing or merge.
        #[arg(long, value_parser = parse_scenario)]
        scenario: Scenario,
        /// Road length in meters, or the radius for a curve.
        #[arg(long)]
        size: f64,
        /// Lanes per direction.
        #[arg(long)]
        lanes: u32,
        #[command(flatten)]
        out: Out,
    },
}

fn parse_roi(s: &str) -> Result<RegionOfInterest, String> {
    RegionOfInterest::parse(s).map_err(|e| e.to_string())
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
        "straight" => Ok(Scenario::Straight),
        "curve" => Ok(Scenario::Curve),
        "tjunction" => Ok(Scenario::TJunction),
        "crossing" => Ok(Scenario::Crossing),
        "merge" => Ok(Scenario::Merge),
        _ => Err(format!("unknown scenario `{s}`")),
    }
}

fn generator_config(path: Option<&Path>, stage: &'static str) -> Result<GeneratorConfig, WorkflowError> {
    let Some(p) = path else { return Ok(GeneratorConfig::default()) };
    let text = fs::read_to_string(p).map_err(|e| stage_err(stage, p, e))?;
    let cfg: GeneratorConfig = serde_json::from_str(&text).map_err(|e| stage_err(stage, p, e))?;
    cfg.validate().map_err(|e| stage_err(stage, p, e))?;
    Ok(cfg)
}

fn either(flag: Option<PathBuf>, pos: Option<PathBuf>, name: &str) -> Result<PathBuf> {
    match flag.or(pos) {
        Some(p) => Ok(p),
        None => bail!("missing required argument --{name}"),
    }
}

fn read(path: &Path, stage: &'static str) -> Result<String, WorkflowError> {
    fs::read_to_string(path).map_err(|e| stage_err(stage, path, e))
}

fn written(path: &Path) {
    println!("wrote {}", path.display());
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Clip { roads, roi, cache, config, out } => {
            let cfg = generator_config(config.as_deref(), "clip")?;
            let clipped = wf::clip_stage(&roads, &roi, &cfg)?;
            println!("{} feature(s) inside the ROI", clipped.features.len());
            if cache {
                written(&wf::write_artifact(&out.out, wf::CLIPPED_FILE, &pretty(&clipped.cache))?);
            }
        }
        Command::Generate { roads, roi, dem, config, out } => {
            let cfg = generator_config(config.as_deref(), "generate")?;
            let clipped = wf::clip_stage(&roads, &roi, &cfg)?;
            let dem = wf::load_dem(&dem)?;
            let (global, local) = wf::generate_stage(&clipped.features, &roi, dem.as_ref(), &cfg, &roads)?;
            for w in &global.metadata.warnings {
                eprintln!("warning: {w}");
            }
            written(&wf::write_artifact(&out.out, wf::MAP_FILE, &global.to_json())?);
            written(&wf::write_artifact(&out.out, wf::LOCAL_MAP_FILE, &local.to_json())?);
        }
        Command::Convert { map, step, out } => {
            if !(step > 0.0 && step <= 10.0) {
                bail!("invalid value for --step: {step} is outside (0, 10]");
            }
            let doc = wf::load_map(&map)?;
            let net = wf::convert_stage(&doc, step, &map)?;
            written(&wf::write_artifact(&out.out, wf::NETWORK_FILE, &to_xml(&net))?);
        }
        Command::Verify { net_flag, net, rules, partitions, fail_on_violation, out } => {
            if partitions == 0 {
                bail!("invalid value for --partitions: must be at least 1");
            }
            let path = either(net_flag, net, "net")?;
            let net = wf::load_network(&path, "verify")?;
            let rules = wf::load_rules(rules.as_deref())?;
            let report = wf::verify_stage(&net, &rules, partitions);
            wf::write_report(&out.out, &report)?;
            print!("{}", report.to_text());
            if report.total_violations > 0 && fail_on_violation {
                return Ok(1);
            }
        }
        Command::Inject { net, spec, seed, out } => {
            let base = wf::load_network(&net, "inject")?;
            let (injected, manifest) = inject(&base, &spec, seed).map_err(|e| stage_err("inject", &net, e))?;
            written(&wf::write_artifact(&out.out, wf::INJECTED_FILE, &to_xml(&injected))?);
            written(&wf::write_artifact(&out.out, wf::MANIFEST_FILE, &manifest.to_json())?);
        }
        Command::Evaluate { report_flag, manifest_flag, report, manifest, out } => {
            let report_path = either(report_flag, report, "report")?;
            let manifest_path = either(manifest_flag, manifest, "manifest")?;
            let report = ViolationReport::from_json(&read(&report_path, "evaluate")?)
                .map_err(|e| stage_err("evaluate", &report_path, e))?;
            let manifest = DefectManifest::from_json(&read(&manifest_path, "evaluate")?)
                .map_err(|e| stage_err("evaluate", &manifest_path, e))?;
            let metrics =
                score(&report, &manifest, &default_rule_map()).map_err(|e| stage_err("evaluate", &report_path, e))?;
            let text = metrics.to_json();
            wf::write_artifact(&out.out, wf::METRICS_FILE, &text)?;
            print!("{text}");
        }
        Command::Pipeline { config, out, partitions, step, rules, fail_on_violation } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(p) = partitions {
                cfg.partitions = p;
            }
            if let Some(s) = step {
                cfg.sampling_step = s;
            }
            if rules.is_some() {
                cfg.rules = rules;
            }
            cfg.validate()?;
            let dir = out.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
            let report = wf::run_pipeline(&cfg, &dir)?;
            println!("{} violation(s); artifacts in {}", report.total_violations, dir.display());
            if report.total_violations > 0 && fail_on_violation {
                return Ok(1);
            }
        }
        Command::Fixture { scenario, size, lanes, out } => {
            let fx = make_fixture(scenario, FixtureParams { size, lanes_per_direction: lanes })
                .map_err(|e| anyhow::anyhow!("fixture: {e}"))?;
            written(&wf::write_artifact(&out.out, "roads.geojson", &pretty(&fx.geojson()))?);
            written(&wf::write_artifact(&out.out, "dem.asc", &write_asc(&fx.dem))?);
            let cfg = serde_json::json!({
                "roi": [fx.roi.min_x, fx.roi.min_y, fx.roi.max_x, fx.roi.max_y],
                "roads": "roads.geojson",
                "dem": ["dem.asc"],
            });
            written(&wf::write_artifact(&out.out, "config.json", &pretty(&cfg))?);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
