//! Comparison orchestration: run every placement strategy under identical
//! field, radio, and metric settings across a seed list, and collect one
//! scored row per (strategy, seed) plus the produced deployments and
//! traces for the caller to write out.
//!
//! Scoring conventions, applied identically to every strategy:
//!
//! * **coverage** — raster fraction with every node sensing at the shared
//!   `metrics.r_sense`, so strategies are compared on placement geometry
//!   alone (a separate heterogeneous check, with per-role radii, lives in
//!   the metrics module).
//! * **power / delay** — when the deployment records a complete link tree
//!   (an anchor plus a parent per other node), the strict tree metrics are
//!   used. Deployments without links (uniform, Fibonacci, swarm baseline)
//!   are scored as an idealized star: every node uplinks to a virtual sink
//!   at the field center under its own radio model, with no range gate —
//!   the denser layout then pays for its longer worst links instead of
//!   being unscorable.
//! * **cost** — summed per-node hardware cost.

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::extras::{optimize_extras, ExtraConfig};
use crate::gdl::{align_overlap, optimize, random_initial, GdlConfig, Trace};
use crate::metrics::{coverage_raster, deployment_cost, network_delay, total_power};
use crate::placement::{fibonacci_layout, uniform_layout, Deployment, NodeRole, STATION_TECH};
use crate::plot::bar_chart_svg;
use crate::pso::{pso_optimize, PsoConfig};
use crate::radio::{profile, RadioTech};

/// Adjacent-disc overlap band enforced on the ring after optimization.
pub const ALIGN_MIN_OVERLAP: f64 = 0.10;
pub const ALIGN_MAX_OVERLAP: f64 = 0.30;

/// Strategy names in the order they appear per seed.
pub const STRATEGIES: [&str; 5] = ["uniform", "fibonacci", "hybrid", "hybrid+extras", "pso"];

/// One scored (strategy, seed) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub strategy: String,
    pub seed: u64,
    pub node_count: usize,
    pub coverage: f64,
    pub power: f64,
    pub delay: f64,
    pub cost: f64,
}

/// A strategy's raw product for one seed, kept so callers can write the
/// deployment and trace files next to the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareArtifact {
    pub strategy: String,
    pub seed: u64,
    pub deployment: Deployment,
    pub trace: Option<Trace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<CompareRow>,
    pub artifacts: Vec<CompareArtifact>,
}

impl ComparisonReport {
    /// Stable CSV rendering of the comparison table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy,seed,node_count,coverage,power,delay,cost\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.6},{:.6}\n",
                r.strategy, r.seed, r.node_count, r.coverage, r.power, r.delay, r.cost
            ));
        }
        out
    }

    /// Bar chart of each strategy's mean coverage across seeds.
    pub fn summary_svg(&self) -> String {
        let rows: Vec<(String, f64)> = STRATEGIES
            .iter()
            .map(|&s| {
                let vals: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.strategy == s)
                    .map(|r| r.coverage)
                    .collect();
                let mean = if vals.is_empty() {
                    0.0
                } else {
                    vals.iter().sum::<f64>() / vals.len() as f64
                };
                (s.to_string(), mean)
            })
            .collect();
        bar_chart_svg("mean coverage by strategy", &rows)
    }
}

/// True when the deployment records an anchor plus a parent link for every
/// other node — the precondition for strict tree power/delay scoring.
pub fn fully_linked(dep: &Deployment) -> bool {
    let has_anchor = dep.nodes.iter().any(|n| n.role == NodeRole::Anchor);
    has_anchor
        && dep
            .nodes
            .iter()
            .filter(|n| n.role != NodeRole::Anchor)
            .all(|n| dep.links.contains_key(&n.id))
}

/// Power and delay for the comparison table: strict tree metrics when the
/// deployment records a complete link tree, otherwise the idealized
/// virtual-star convention described in the module docs.
pub fn score_power_delay(dep: &Deployment, radios: &[RadioTech]) -> Result<(f64, f64)> {
    if fully_linked(dep) {
        let power = total_power(dep, radios)?;
        let (worst, _mean) = network_delay(dep, radios)?;
        return Ok((power, worst));
    }
    let sink = dep.field.center();
    let mut power = 0.0;
    let mut delay = 0.0f64;
    for n in &dep.nodes {
        let r = profile(radios, &n.tech)?;
        let d = n.position.dist(&sink);
        power += r.kp * d.powf(r.alpha);
        delay = delay.max(r.kd + r.cd * d);
    }
    Ok((power, delay))
}

fn score(
    strategy: &str,
    seed: u64,
    dep: Deployment,
    trace: Option<Trace>,
    cfg: &ExperimentConfig,
) -> Result<(CompareRow, CompareArtifact)> {
    let coverage = coverage_raster(&dep, cfg.metrics.r_sense, cfg.metrics.resolution)?.fraction;
    let (power, delay) = score_power_delay(&dep, &cfg.radios)?;
    let cost = deployment_cost(&dep, &cfg.radios)?;
    let row = CompareRow {
        strategy: strategy.to_string(),
        seed,
        node_count: dep.nodes.len(),
        coverage,
        power,
        delay,
        cost,
    };
    let artifact = CompareArtifact {
        strategy: strategy.to_string(),
        seed,
        deployment: dep,
        trace,
    };
    Ok((row, artifact))
}

/// Golden-ratio ring pipeline for one seed: random start, constrained
/// descent, then overlap alignment at the shared sensing radius. Errors
/// if the descent does not converge within its iteration budget.
pub fn build_hybrid(cfg: &ExperimentConfig, seed: u64) -> Result<(Deployment, Trace)> {
    let station_radio = profile(&cfg.radios, STATION_TECH)?;
    let gdl_cfg = GdlConfig { seed, ..cfg.gdl.clone() };
    let initial = random_initial(&cfg.field, &gdl_cfg)?;
    let (ring, trace) = optimize(&initial, &gdl_cfg, station_radio)?;
    if !trace.converged {
        return Err(Error::Infeasible(format!(
            "ring optimization (seed {seed}) did not converge within {} iterations",
            gdl_cfg.max_iterations
        )));
    }
    let (hybrid, _) = align_overlap(
        &ring,
        ALIGN_MIN_OVERLAP,
        ALIGN_MAX_OVERLAP,
        cfg.metrics.r_sense,
    )?;
    Ok((hybrid, trace))
}

/// Short-range force-directed extension of an existing backbone.
pub fn build_extras(
    cfg: &ExperimentConfig,
    stations: &Deployment,
    seed: u64,
) -> Result<(Deployment, Trace)> {
    let extras_cfg = ExtraConfig { seed, ..cfg.extras.clone() };
    optimize_extras(stations, &extras_cfg)
}

/// Swarm-search placement baseline for one seed.
pub fn build_pso(cfg: &ExperimentConfig, seed: u64) -> Result<(Deployment, Trace)> {
    let pso_cfg = PsoConfig { seed, ..cfg.pso.clone() };
    pso_optimize(&pso_cfg, &cfg.field)
}

fn push_scored(
    report: &mut ComparisonReport,
    name: &str,
    seed: u64,
    dep: Deployment,
    trace: Option<Trace>,
    cfg: &ExperimentConfig,
) -> Result<()> {
    let (row, artifact) = score(name, seed, dep, trace, cfg)?;
    report.rows.push(row);
    report.artifacts.push(artifact);
    Ok(())
}

/// Like [`run_compare`], but on a sub-run failure returns every row and
/// artifact completed before the failure together with the error, so
/// callers can retain partial outputs.
pub fn run_compare_partial(cfg: &ExperimentConfig) -> (ComparisonReport, Option<Error>) {
    let mut report = ComparisonReport {
        rows: Vec::new(),
        artifacts: Vec::new(),
    };
    let outcome = (|| -> Result<()> {
        cfg.validate()?;
        for &seed in &cfg.seeds {
            let uniform = uniform_layout(&cfg.field)?;
            push_scored(&mut report, "uniform", seed, uniform, None, cfg)?;
            let fibonacci = fibonacci_layout(&cfg.field)?;
            push_scored(&mut report, "fibonacci", seed, fibonacci, None, cfg)?;
            let (hybrid, trace) = build_hybrid(cfg, seed)?;
            push_scored(&mut report, "hybrid", seed, hybrid.clone(), Some(trace), cfg)?;
            let (extended, extras_trace) = build_extras(cfg, &hybrid, seed)?;
            push_scored(
                &mut report,
                "hybrid+extras",
                seed,
                extended,
                Some(extras_trace),
                cfg,
            )?;
            let (swarm, pso_trace) = build_pso(cfg, seed)?;
            push_scored(&mut report, "pso", seed, swarm, Some(pso_trace), cfg)?;
        }
        Ok(())
    })();
    (report, outcome.err())
}

/// Run all five strategies across every configured seed.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    let (report, err) = run_compare_partial(cfg);
    match err {
        None => Ok(report),
        Some(e) => Err(e),
    }
}
