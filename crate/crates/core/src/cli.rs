//! Command-line front end. Exit codes: 0 success, 1 validation failure or
//! runtime error, 2 usage or parse error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::avd::{self, BuildConfig, LeafRule};
use crate::capsule::build_capsule;
use crate::ellipsoid::inscribed_ellipsoid;
use crate::error::{Error, Result};
use crate::geometry::{instance_stats, local_feature_size, SegmentSet};
use crate::linalg::Point;
use crate::svg::{render_svg, RenderOptions};
use crate::tensors::{blended_tensor, distance_triple, local_tensor};
use crate::workbench::{self, BenchSpec, ValidationOptions, SUITES};

pub const SEED_ENV: &str = "SEGAVD_SEED";

#[derive(Parser, Debug)]
#[command(name = "segavd", version, about = "Approximate nearest-segment search with anisotropic Voronoi diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Seeded random disjoint segments in the unit cube.
    GenRandom(GenRandomArgs),
    /// Griddle instance: n+1 vertical and n+1 horizontal segments in 3-D.
    GenGriddle(GenGriddleArgs),
    /// Build a structure from an instance file.
    Build(BuildArgs),
    /// Answer queries against a structure file.
    Query(QueryArgs),
    /// Run property suites.
    Validate(ValidateArgs),
    /// Time builds and queries over a random family.
    Bench(BenchArgs),
    /// Distance data, tensors and capsule at a point.
    Probe(ProbeArgs),
    /// Draw one tier of a planar structure as SVG.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
struct GenRandomArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    min_gap: f64,
    /// Redraw until the spread is at least this.
    #[arg(long)]
    spread_min: Option<f64>,
    /// Redraw until the spread is at most this.
    #[arg(long)]
    spread_max: Option<f64>,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct GenGriddleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, short)]
    output: PathBuf,
    /// Also write the odd query points, one per line.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LeafRuleArg {
    Certified,
    Scale,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "certified")]
    leaf_rule: LeafRuleArg,
    #[arg(long)]
    root_samples: Option<usize>,
    #[arg(long)]
    node_samples: Option<usize>,
}

#[derive(Args, Debug)]
struct QueryArgs {
    /// Structure file written by `build`.
    #[arg(long)]
    ds: PathBuf,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    point: Vec<String>,
    /// File with one point per line (commas or spaces; `#` starts a comment).
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Suite names, or `all`.
    #[arg(long = "suite", required = true)]
    suites: Vec<String>,
    /// Instance file; random instances are drawn when absent.
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    configs: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    queries: Option<usize>,
    #[arg(long)]
    volume_samples: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10, 20])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5f64])]
    epsilons: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    min_gap: f64,
    #[arg(long, default_value_t = 10_000)]
    root_samples: usize,
    #[arg(long, default_value_t = 100)]
    node_samples: usize,
    /// Write the JSON report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Capsule distance parameter; defaults to the local feature size.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[arg(long)]
    ds: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    level: usize,
    /// Refinement exponent; every exponent of the level when absent.
    #[arg(long)]
    exponent: Option<usize>,
    #[arg(long, default_value_t = 800.0)]
    width: f64,
    #[arg(long, default_value_t = 1.0)]
    stroke_scale: f64,
    #[arg(long)]
    inner: bool,
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn env_seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

fn emit(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string(value).expect("output serializes");
    writeln!(out, "{text}")?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::parse(path.display().to_string(), e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::parse(path.display().to_string(), e))
}

fn read_instance(path: &Path) -> Result<SegmentSet> {
    SegmentSet::from_json(&read(path)?).map_err(|e| match e {
        Error::Parse { context, message } => Error::parse(format!("{}: {context}", path.display()), message),
        other => other,
    })
}

fn read_structure(path: &Path) -> Result<avd::AvdDag> {
    avd::deserialize(&read(path)?).map_err(|e| match e {
        Error::Parse { context, message } => Error::parse(format!("{}: {context}", path.display()), message),
        other => other,
    })
}

/// Parses `"x,y,..."` (commas and/or whitespace).
pub fn parse_point(text: &str) -> Result<Point> {
    let coords: std::result::Result<Vec<f64>, _> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::parse::<f64>)
        .collect();
    let coords = coords.map_err(|e| Error::parse("point", format!("{text:?}: {e}")))?;
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::parse("point", format!("{text:?}: coordinates must be finite")));
    }
    Point::try_from_slice(&coords)
        .ok_or_else(|| Error::parse("point", format!("{text:?}: unsupported dimension {}", coords.len())))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Usage(format!("{name} must be positive, got {v}")))
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::GenRandom(a) => {
            let band = match (a.spread_min, a.spread_max) {
                (None, None) => None,
                (lo, hi) => Some((lo.unwrap_or(0.0), hi.unwrap_or(f64::INFINITY))),
            };
            let set = workbench::gen_random(a.n, a.d, env_seed(a.seed)?, a.min_gap, band)?;
            write_file(&a.output, &set.to_json())?;
            emit(
                out,
                &json!({"n": set.len(), "d": set.dim, "diam": set.diam, "min_gap": set.min_gap, "spread": set.spread}),
            )?;
        }
        Command::GenGriddle(a) => {
            let g = workbench::gen_griddle(a.n, a.epsilon, a.delta)?;
            write_file(&a.output, &g.set.to_json())?;
            if let Some(p) = &a.points {
                let mut text = String::new();
                for q in &g.query_points {
                    let c: Vec<String> = q.point.as_slice().iter().map(|v| v.to_string()).collect();
                    text.push_str(&c.join(","));
                    text.push('\n');
                }
                write_file(p, &text)?;
            }
            let report = workbench::verify_griddle(&g);
            let stats = instance_stats(&g.set)?;
            emit(
                out,
                &json!({
                    "n": g.set.len(), "d": g.set.dim, "spread": stats.spread, "grid": g.n,
                    "epsilon": g.epsilon, "delta": g.delta, "odd_points": report.points_checked,
                    "witnesses": report.witness_count, "failures": report.failures.len(),
                }),
            )?;
            if !report.passed() {
                return Ok(1);
            }
        }
        Command::Build(a) => {
            positive("epsilon", a.epsilon)?;
            let set = read_instance(&a.input)?;
            let mut cfg = BuildConfig::with_seed(env_seed(a.seed)?);
            cfg.leaf_rule = match a.leaf_rule {
                LeafRuleArg::Certified => LeafRule::Certified,
                LeafRuleArg::Scale => LeafRule::Scale,
            };
            if let Some(s) = a.root_samples {
                cfg.root_samples = s;
            }
            if let Some(s) = a.node_samples {
                cfg.node_samples = s;
            }
            let dag = avd::build(&set, a.epsilon, &cfg)?;
            write_file(&a.output, &avd::serialize(&dag))?;
            emit(out, &dag.stats)?;
        }
        Command::Query(a) => {
            let dag = read_structure(&a.ds)?;
            let mut points = Vec::new();
            for p in &a.point {
                points.push(parse_point(p)?);
            }
            if let Some(path) = &a.points {
                for (i, line) in read(path)?.lines().enumerate() {
                    let body = line.split('#').next().unwrap_or("").trim();
                    if body.is_empty() {
                        continue;
                    }
                    let p = parse_point(body).map_err(|e| match e {
                        Error::Parse { message, .. } => {
                            Error::parse(format!("{} line {}", path.display(), i + 1), message)
                        }
                        other => other,
                    })?;
                    points.push(p);
                }
            }
            if points.is_empty() {
                return Err(Error::Usage("give --point or --points".into()));
            }
            for p in &points {
                emit(out, &dag.try_query(p)?)?;
            }
        }
        Command::Validate(a) => {
            let names: Vec<String> = if a.suites.iter().any(|s| s == "all") {
                SUITES.iter().map(|s| s.to_string()).collect()
            } else {
                a.suites.clone()
            };
            if let Some(bad) = names.iter().find(|s| !SUITES.contains(&s.as_str())) {
                return Err(Error::Usage(format!("unknown suite {bad:?}; known: {}", SUITES.join(", "))));
            }
            let set = a.input.as_deref().map(read_instance).transpose()?;
            let defaults = ValidationOptions::default();
            let opts = ValidationOptions {
                configs: a.configs.unwrap_or(defaults.configs),
                samples: a.samples.unwrap_or(defaults.samples),
                epsilon: a.epsilon.unwrap_or(defaults.epsilon),
                queries: a.queries.unwrap_or(defaults.queries),
                volume_samples: a.volume_samples.unwrap_or(defaults.volume_samples),
            };
            positive("epsilon", opts.epsilon)?;
            let seed = env_seed(a.seed)?;
            let mut reports = Vec::new();
            for name in &names {
                reports.push(workbench::run_validation(name, set.as_ref(), seed, &opts)?);
            }
            reports.sort_by(|x, y| x.suite.cmp(&y.suite));
            match a.format {
                Format::Json => emit(out, &reports)?,
                Format::Text => {
                    writeln!(out, "{:<12} {:>6} {:>10} {:>10} {:>8} {:>14}", "suite", "status", "checks", "violations", "skipped", "max_violation")?;
                    for r in &reports {
                        writeln!(
                            out,
                            "{:<12} {:>6} {:>10} {:>10} {:>8} {:>14.3e}",
                            r.suite,
                            if r.passed() { "pass" } else { "FAIL" },
                            r.checks,
                            r.violations,
                            r.skipped,
                            r.max_violation
                        )?;
                    }
                }
            }
            if reports.iter().any(|r| !r.passed()) {
                return Ok(1);
            }
        }
        Command::Bench(a) => {
            let spec = BenchSpec {
                sizes: a.sizes,
                dim: a.d,
                epsilons: a.epsilons,
                queries: a.queries,
                seed: env_seed(a.seed)?,
                min_gap: a.min_gap,
                root_samples: a.root_samples,
                node_samples: a.node_samples,
            };
            let report = workbench::run_bench(&spec)?;
            if let Some(p) = &a.csv {
                write_file(p, &report.to_csv())?;
            }
            match &a.output {
                Some(p) => write_file(p, &report.to_json())?,
                None => writeln!(out, "{}", report.to_json())?,
            }
            if report.instances.iter().any(|i| i.correct < i.queries) {
                return Ok(1);
            }
        }
        Command::Probe(a) => {
            let set = read_instance(&a.input)?;
            let x = parse_point(&a.point)?;
            crate::error::check_dims(set.dim, x.dim())?;
            let (nearest, dist) = set.nearest(&x);
            let lfs = if set.len() >= 2 { Some(local_feature_size(&x, &set)?) } else { None };
            let r = a.r.unwrap_or(lfs.map_or(dist, |l| l.value));
            positive("r", r)?;
            let mut per_segment = Vec::new();
            for s in &set.segments {
                let t = local_tensor(&x, s);
                per_segment.push(json!({
                    "segment": s.id,
                    "triple": distance_triple(&x, s),
                    "tensor": t.as_ref().ok().map(|t| t.matrix),
                    "eigen_small": t.as_ref().ok().map(|t| t.eigen_small),
                    "eigen_large": t.as_ref().ok().map(|t| t.eigen_large),
                }));
            }
            let capsule = build_capsule(&set, &x, r)?;
            let ellipsoid = inscribed_ellipsoid(&capsule, 1.0);
            emit(
                out,
                &json!({
                    "point": x,
                    "nearest": {"segment": nearest, "distance": dist},
                    "local_feature_size": lfs.map(|l| l.value),
                    "second": lfs.map(|l| l.second),
                    "segments": per_segment,
                    "blended_tensor": blended_tensor(&x, &set).ok(),
                    "capsule": capsule,
                    "inscribed_ellipsoid": {
                        "center": ellipsoid.center,
                        "shape": ellipsoid.shape,
                        "semi_axes": ellipsoid.semi_axes(),
                        "volume": ellipsoid.volume(),
                    },
                }),
            )?;
        }
        Command::Render(a) => {
            let dag = read_structure(&a.ds)?;
            let opts = RenderOptions {
                level: a.level,
                exponent: a.exponent,
                width: a.width,
                stroke_scale: a.stroke_scale,
                inner: a.inner,
            };
            let svg = render_svg(&dag, &opts)?;
            write_file(&a.output, &svg)?;
            let count = svg.matches("<ellipse").count();
            emit(out, &json!({"output": a.output, "ellipses": count, "segments": dag.segments.len()}))?;
        }
    }
    Ok(0)
}
