//! Batch planning front end: read one JSON configuration, then rank radios,
//! place or extend a deployment, score it, compare every strategy, or draw
//! a map — writing JSON/CSV/SVG artifacts under an output directory.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 runtime error
//! (non-convergence, infeasible topology, oversized instance), 4 I/O error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use fieldnet_core::config::ExperimentConfig;
use fieldnet_core::gdl::Trace;
use fieldnet_core::metrics::{coverage_montecarlo, coverage_raster, deployment_cost};
use fieldnet_core::placement::{fibonacci_layout, uniform_layout, Deployment, NodeRole};
use fieldnet_core::plot::deployment_svg;
use fieldnet_core::report::{
    build_extras, build_hybrid, build_pso, fully_linked, run_compare_partial, score_power_delay,
    ComparisonReport, STRATEGIES,
};
use fieldnet_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fieldnet",
    version,
    about = "Plan, extend, score, and compare wireless sensor deployments on a grid-divided field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args)]
struct Common {
    /// JSON experiment configuration (built-in defaults when omitted).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration's output_dir).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Rank radio technologies with the fuzzy pairwise-comparison model.
    Rank {
        #[command(flatten)]
        common: Common,
    },
    /// Compute one placement and write deployment JSON/CSV/SVG (+ trace).
    Place {
        /// Placement strategy.
        #[arg(value_enum)]
        strategy: Strategy,
        /// Seed override for the stochastic strategies (hybrid, pso).
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Surround an existing backbone with short-range extra nodes.
    Extend {
        /// Backbone deployment JSON (for example a `place hybrid` output).
        #[arg(long, value_name = "FILE")]
        stations: PathBuf,
        /// Seed override for the force simulation.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Score a deployment file: coverage, power, delay, and cost.
    Score {
        /// Deployment JSON to score.
        #[arg(long, value_name = "FILE")]
        deployment: PathBuf,
        /// Sensing radius in meters (overrides metrics.r_sense).
        #[arg(long, value_name = "M")]
        r_sense: Option<f64>,
        /// Raster pitch in meters (overrides metrics.resolution).
        #[arg(long, value_name = "M")]
        resolution: Option<f64>,
        /// Monte-Carlo sample count (overrides metrics.samples).
        #[arg(long, value_name = "N")]
        samples: Option<u64>,
        /// Monte-Carlo seed (default: first configured seed).
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run every strategy across the configured seeds and tabulate results.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Draw a deployment file as an SVG map.
    Plot {
        /// Deployment JSON to draw.
        #[arg(long, value_name = "FILE")]
        deployment: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Uniform,
    Fibonacci,
    Hybrid,
    Pso,
}

impl Strategy {
    fn name(self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::Fibonacci => "fibonacci",
            Strategy::Hybrid => "hybrid",
            Strategy::Pso => "pso",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Stable mapping from error kind to process exit code.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Validation(_)
        | Error::Dimension { .. }
        | Error::Domain { .. }
        | Error::Lookup(_)
        | Error::OutOfBounds { .. } => 2,
        Error::Topology(_)
        | Error::Feasibility { .. }
        | Error::Scale { .. }
        | Error::Infeasible(_) => 3,
        Error::Io(_) => 4,
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Rank { common } => cmd_rank(&common),
        Command::Place {
            strategy,
            seed,
            common,
        } => cmd_place(strategy, seed, &common),
        Command::Extend {
            stations,
            seed,
            common,
        } => cmd_extend(&stations, seed, &common),
        Command::Score {
            deployment,
            r_sense,
            resolution,
            samples,
            seed,
            common,
        } => cmd_score(&deployment, r_sense, resolution, samples, seed, &common),
        Command::Compare { common } => cmd_compare(&common),
        Command::Plot { deployment, common } => cmd_plot(&deployment, &common),
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    match &common.config {
        None => Ok(ExperimentConfig::default()),
        Some(path) => ExperimentConfig::from_json(&read_text(path)?),
    }
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("read {}: {e}", path.display())))
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .map_err(|e| Error::Io(format!("create {}: {e}", dir.display())))?;
    }
    fs::write(path, content).map_err(|e| Error::Io(format!("write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn read_deployment(path: &Path) -> Result<Deployment> {
    Deployment::from_json(&read_text(path)?)
}

/// Per-role drawing radii: long-range roles get the sensing radius used for
/// scoring, extras their short radio range.
fn role_ranges(cfg: &ExperimentConfig) -> BTreeMap<NodeRole, f64> {
    BTreeMap::from([
        (NodeRole::Anchor, cfg.metrics.r_sense),
        (NodeRole::Station, cfg.metrics.r_sense),
        (NodeRole::Normal, cfg.metrics.r_sense),
        (NodeRole::Extra, cfg.extras.bt_range),
    ])
}

/// Write the shared artifact set for one deployment.
fn write_deployment_set(
    dir: &Path,
    dep: &Deployment,
    trace: Option<&Trace>,
    cfg: &ExperimentConfig,
) -> Result<()> {
    write_text(&dir.join("deployment.json"), &dep.to_json()?)?;
    write_text(&dir.join("deployment.csv"), &dep.to_csv())?;
    write_text(
        &dir.join("deployment.svg"),
        &deployment_svg(dep, &role_ranges(cfg)),
    )?;
    if let Some(t) = trace {
        write_text(&dir.join("trace.csv"), &t.to_csv())?;
    }
    Ok(())
}

fn cmd_rank(common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    let model = cfg.fahp.to_model()?;
    let (ranking, warnings) = model.rank()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    println!("{:<4} {:<12} {}", "rank", "technology", "score");
    let mut csv = String::from("rank,technology,score\n");
    for (i, e) in ranking.entries.iter().enumerate() {
        println!("{:<4} {:<12} {:.6}", i + 1, e.name, e.score);
        csv.push_str(&format!("{},{},{:.6}\n", i + 1, e.name, e.score));
    }
    let dir = out_dir(common, &cfg);
    write_text(&dir.join("ranking.csv"), &csv)?;
    let json =
        serde_json::to_string_pretty(&ranking).map_err(|e| Error::Io(e.to_string()))?;
    write_text(&dir.join("ranking.json"), &json)
}

fn cmd_place(strategy: Strategy, seed: Option<u64>, common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    if seed.is_some() && matches!(strategy, Strategy::Uniform | Strategy::Fibonacci) {
        eprintln!("note: --seed has no effect on the deterministic layouts");
    }
    let (dep, trace) = match strategy {
        Strategy::Uniform => (uniform_layout(&cfg.field)?, None),
        Strategy::Fibonacci => (fibonacci_layout(&cfg.field)?, None),
        Strategy::Hybrid => {
            let (d, t) = build_hybrid(&cfg, seed.unwrap_or(cfg.gdl.seed))?;
            (d, Some(t))
        }
        Strategy::Pso => {
            let (d, t) = build_pso(&cfg, seed.unwrap_or(cfg.pso.seed))?;
            (d, Some(t))
        }
    };
    let coverage = coverage_raster(&dep, cfg.metrics.r_sense, cfg.metrics.resolution)?.fraction;
    println!(
        "{}: {} nodes, coverage {:.4} at r_sense {} m",
        strategy.name(),
        dep.nodes.len(),
        coverage,
        cfg.metrics.r_sense
    );
    let dir = out_dir(common, &cfg).join(strategy.name());
    write_deployment_set(&dir, &dep, trace.as_ref(), &cfg)
}

fn cmd_extend(stations: &Path, seed: Option<u64>, common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    let backbone = read_deployment(stations)?;
    let (dep, trace) = build_extras(&cfg, &backbone, seed.unwrap_or(cfg.extras.seed))?;
    let coverage = coverage_raster(&dep, cfg.metrics.r_sense, cfg.metrics.resolution)?.fraction;
    println!(
        "extended {} backbone nodes with {} extras, coverage {:.4} at r_sense {} m",
        backbone.nodes.len(),
        dep.nodes.len() - backbone.nodes.len(),
        coverage,
        cfg.metrics.r_sense
    );
    let dir = out_dir(common, &cfg).join("extended");
    write_deployment_set(&dir, &dep, Some(&trace), &cfg)
}

fn cmd_score(
    path: &Path,
    r_sense: Option<f64>,
    resolution: Option<f64>,
    samples: Option<u64>,
    seed: Option<u64>,
    common: &Common,
) -> Result<()> {
    let cfg = load_config(common)?;
    let dep = read_deployment(path)?;
    let r = r_sense.unwrap_or(cfg.metrics.r_sense);
    let res = resolution.unwrap_or(cfg.metrics.resolution);
    let n = samples.unwrap_or(cfg.metrics.samples);
    let mc_seed = seed.unwrap_or_else(|| cfg.seeds.first().copied().unwrap_or(42));

    let raster = coverage_raster(&dep, r, res)?;
    let mc = coverage_montecarlo(&dep, r, n, mc_seed)?;
    let (power, delay) = score_power_delay(&dep, &cfg.radios)?;
    let cost = deployment_cost(&dep, &cfg.radios)?;
    let link_method = if fully_linked(&dep) { "tree" } else { "star" };

    let rows: Vec<(&str, String, String, String)> = vec![
        (
            "node_count",
            dep.nodes.len().to_string(),
            "count".into(),
            String::new(),
        ),
        (
            "coverage",
            format!("{:.6}", raster.fraction),
            "raster".into(),
            format!("r_sense={r};resolution={res}"),
        ),
        (
            "coverage",
            format!("{:.6}", mc.fraction),
            "montecarlo".into(),
            format!("r_sense={r};samples={n};seed={mc_seed}"),
        ),
        (
            "coverage_ci95",
            format!("{:.6}", mc.confidence_halfwidth.unwrap_or(0.0)),
            "montecarlo".into(),
            format!("r_sense={r};samples={n};seed={mc_seed}"),
        ),
        (
            "power_total",
            format!("{power:.6}"),
            link_method.into(),
            String::new(),
        ),
        (
            "delay_worst",
            format!("{delay:.6}"),
            link_method.into(),
            String::new(),
        ),
        ("cost_total", format!("{cost:.6}"), "sum".into(), String::new()),
    ];
    println!(
        "{:<14} {:>14}  {:<10} {}",
        "metric", "value", "method", "parameters"
    );
    let mut csv = String::from("metric,value,method,parameters\n");
    for (metric, value, method, params) in &rows {
        println!("{metric:<14} {value:>14}  {method:<10} {params}");
        csv.push_str(&format!("{metric},{value},{method},{params}\n"));
    }
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("deployment");
    let dir = out_dir(common, &cfg);
    write_text(&dir.join(format!("{stem}-score.csv")), &csv)
}

fn cmd_compare(common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    let dir = out_dir(common, &cfg);
    let (report, err) = run_compare_partial(&cfg);
    let mut files = Vec::new();
    write_compare_artifacts(&dir, &report, &cfg, &mut files)?;
    write_text(
        &dir.join("manifest.json"),
        &manifest_json(&cfg, &files, err.as_ref()),
    )?;
    match err {
        None => {
            println!(
                "compared {} strategies x {} seeds",
                STRATEGIES.len(),
                cfg.seeds.len()
            );
            Ok(())
        }
        Some(e) => {
            eprintln!("partial outputs retained in {}", dir.display());
            Err(e)
        }
    }
}

fn write_compare_artifacts(
    dir: &Path,
    report: &ComparisonReport,
    cfg: &ExperimentConfig,
    files: &mut Vec<String>,
) -> Result<()> {
    let mut push_write = |rel: String, content: &str| -> Result<()> {
        write_text(&dir.join(&rel), content)?;
        files.push(rel);
        Ok(())
    };
    push_write("comparison.csv".into(), &report.to_csv())?;
    push_write("summary.svg".into(), &report.summary_svg())?;
    let ranges = role_ranges(cfg);
    for a in &report.artifacts {
        let sub = format!("{}/seed-{}", a.strategy, a.seed);
        push_write(format!("{sub}/deployment.json"), &a.deployment.to_json()?)?;
        push_write(format!("{sub}/deployment.csv"), &a.deployment.to_csv())?;
        push_write(
            format!("{sub}/deployment.svg"),
            &deployment_svg(&a.deployment, &ranges),
        )?;
        if let Some(t) = &a.trace {
            push_write(format!("{sub}/trace.csv"), &t.to_csv())?;
        }
    }
    Ok(())
}

/// Run record for a compare invocation. The manifest is the one artifact
/// allowed to differ between reruns: it carries the wall-clock timestamp so
/// every other output can stay byte-identical.
fn manifest_json(cfg: &ExperimentConfig, files: &[String], err: Option<&Error>) -> String {
    let created_unix_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    let value = serde_json::json!({
        "status": if err.is_none() { "ok" } else { "failed" },
        "error": err.map(|e| e.to_string()),
        "created_unix_ms": created_unix_ms,
        "seeds": cfg.seeds,
        "strategies": STRATEGIES,
        "files": files,
    });
    serde_json::to_string_pretty(&value).unwrap_or_else(|_| "{}".into())
}

fn cmd_plot(path: &Path, common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    let dep = read_deployment(path)?;
    let svg = deployment_svg(&dep, &role_ranges(&cfg));
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("deployment");
    let dir = out_dir(common, &cfg);
    write_text(&dir.join(format!("{stem}.svg")), &svg)
}
