//! Deployment scoring: disc coverage (raster and Monte-Carlo), cell counts
//! touched by a sensing disc, pairwise disc overlap, power/delay/cost
//! totals, per-target supply checks, and a small-instance exact minimum
//! node-count solver.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Grid, Point2D, PowerMap, TargetSet};
use crate::placement::{Deployment, NodeRole, SensorNode};
use crate::radio::{link_delay, link_feasible, link_power, profile, RadioTech};

/// Largest grid (in cells) the exact minimum-node solver accepts.
pub const MAX_EXACT_CELLS: u32 = 16;

/// How a coverage fraction was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageMethod {
    Raster,
    Montecarlo,
}

/// Estimated fraction of the field within sensing range of at least one
/// node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub fraction: f64,
    pub method: CoverageMethod,
    /// Raster pitch in meters, or Monte-Carlo sample count.
    pub resolution_or_samples: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// 95% confidence halfwidth (Monte-Carlo only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence_halfwidth: Option<f64>,
}

/// Per-target supply check result plus the placement size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpReport {
    /// Total node count of the checked deployment.
    pub node_total: u32,
    /// One entry per target, in target order: does accumulated supply from
    /// covering nodes meet the threshold?
    pub per_target_ok: Vec<bool>,
    /// Whether derived per-cell node counts are non-negative integers
    /// (always true for explicit placements; reported for completeness).
    pub integral_ok: bool,
}

impl IlpReport {
    pub fn all_ok(&self) -> bool {
        self.integral_ok && self.per_target_ok.iter().all(|&b| b)
    }
}

/// Raster coverage of an explicit set of sensing discs (center, radius):
/// the fraction of pixel centers, at the given pitch, inside at least one
/// disc. The shared core of the per-deployment coverage functions.
pub fn coverage_raster_discs(
    field: &FieldSpec,
    discs: &[(Point2D, f64)],
    resolution: f64,
) -> Result<CoverageReport> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::Domain {
            what: "raster resolution",
            value: resolution,
        });
    }
    let nx = (field.width_m / resolution).round().max(1.0) as usize;
    let ny = (field.height_m / resolution).round().max(1.0) as usize;
    let mut covered = 0usize;
    for iy in 0..ny {
        let y = (iy as f64 + 0.5) * resolution;
        for ix in 0..nx {
            let x = (ix as f64 + 0.5) * resolution;
            for &(c, r) in discs {
                let dx = x - c.x_m;
                let dy = y - c.y_m;
                if dx * dx + dy * dy <= r * r {
                    covered += 1;
                    break;
                }
            }
        }
    }
    Ok(CoverageReport {
        fraction: covered as f64 / (nx * ny) as f64,
        method: CoverageMethod::Raster,
        resolution_or_samples: resolution,
        seed: None,
        confidence_halfwidth: None,
    })
}

/// Raster coverage of a deployment: every node senses with radius
/// `r_sense`. An empty deployment covers nothing.
pub fn coverage_raster(dep: &Deployment, r_sense: f64, resolution: f64) -> Result<CoverageReport> {
    let discs: Vec<(Point2D, f64)> = dep.nodes.iter().map(|n| (n.position, r_sense)).collect();
    coverage_raster_discs(&dep.field, &discs, resolution)
}

/// Monte-Carlo coverage: uniform random points over the field, reproducible
/// per seed, with a 95% binomial confidence halfwidth.
pub fn coverage_montecarlo(
    dep: &Deployment,
    r_sense: f64,
    samples: u64,
    seed: u64,
) -> Result<CoverageReport> {
    if samples < 1 {
        return Err(Error::Domain {
            what: "sample count",
            value: samples as f64,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = r_sense * r_sense;
    let mut covered = 0u64;
    for _ in 0..samples {
        let x: f64 = rng.random_range(0.0..dep.field.width_m);
        let y: f64 = rng.random_range(0.0..dep.field.height_m);
        if dep.nodes.iter().any(|n| {
            let dx = x - n.position.x_m;
            let dy = y - n.position.y_m;
            dx * dx + dy * dy <= r2
        }) {
            covered += 1;
        }
    }
    let p = covered as f64 / samples as f64;
    let halfwidth = 1.96 * (p * (1.0 - p) / samples as f64).sqrt();
    Ok(CoverageReport {
        fraction: p,
        method: CoverageMethod::Montecarlo,
        resolution_or_samples: samples as f64,
        seed: Some(seed),
        confidence_halfwidth: Some(halfwidth),
    })
}

/// Number of grid cells whose area intersects the node's sensing disc,
/// by the closest-point (disc vs. axis-aligned rectangle) test.
pub fn beta_cells(node: &SensorNode, r_sense: f64, grid: &Grid) -> Result<u32> {
    if !grid.spec.contains(&node.position) {
        return Err(Error::OutOfBounds {
            x_m: node.position.x_m,
            y_m: node.position.y_m,
        });
    }
    let e = grid.spec.cell_edge_m;
    let r2 = r_sense * r_sense;
    let mut count = 0;
    for gc in &grid.cells {
        let x0 = (gc.cell.col - 1) as f64 * e;
        let y0 = (gc.cell.row - 1) as f64 * e;
        let cx = node.position.x_m.clamp(x0, x0 + e);
        let cy = node.position.y_m.clamp(y0, y0 + e);
        let dx = node.position.x_m - cx;
        let dy = node.position.y_m - cy;
        if dx * dx + dy * dy <= r2 {
            count += 1;
        }
    }
    Ok(count)
}

/// Fraction of a single disc's area shared with an equal disc at the other
/// center: lens area over pi r^2 (0 when the discs are disjoint).
pub fn pairwise_overlap(a: Point2D, b: Point2D, r_sense: f64) -> Result<f64> {
    if !(r_sense > 0.0) || !r_sense.is_finite() {
        return Err(Error::Domain {
            what: "sensing radius",
            value: r_sense,
        });
    }
    let d = a.dist(&b);
    if d >= 2.0 * r_sense {
        return Ok(0.0);
    }
    let r = r_sense;
    let lens = 2.0 * r * r * (d / (2.0 * r)).acos() - (d / 2.0) * (4.0 * r * r - d * d).sqrt();
    Ok(lens / (std::f64::consts::PI * r * r))
}

/// Total transmit power over all links: each link is costed by the child
/// node's radio at the link length. Errors if any link exceeds the child
/// radio's range.
pub fn total_power(dep: &Deployment, radios: &[RadioTech]) -> Result<f64> {
    let mut total = 0.0;
    for (&child, &parent) in &dep.links {
        let c = dep
            .node(child)
            .ok_or_else(|| Error::Validation(format!("link from unknown node {child}")))?;
        let p = dep
            .node(parent)
            .ok_or_else(|| Error::Validation(format!("link to unknown node {parent}")))?;
        let tech = profile(radios, &c.tech)?;
        let d = c.position.dist(&p.position);
        if !link_feasible(tech, d) {
            return Err(Error::Feasibility {
                child,
                parent,
                distance_m: d,
                range_m: tech.range_m,
            });
        }
        total += link_power(tech, d)?;
    }
    Ok(total)
}

/// Worst and mean path delay from each non-anchor node to the anchor,
/// following parent links; each hop is costed by the hopping node's radio.
/// Errors if the link graph has a cycle or a node with no path to the
/// anchor.
pub fn network_delay(dep: &Deployment, radios: &[RadioTech]) -> Result<(f64, f64)> {
    let anchor = dep
        .nodes
        .iter()
        .find(|n| n.role == NodeRole::Anchor)
        .ok_or_else(|| Error::Topology("no anchor node to root the link graph".into()))?;
    let mut delays = Vec::new();
    for n in &dep.nodes {
        if n.id == anchor.id {
            continue;
        }
        let mut delay = 0.0;
        let mut current = n.id;
        let mut hops = 0usize;
        loop {
            let &parent = dep.links.get(&current).ok_or_else(|| {
                Error::Topology(format!("node {current} has no path to the anchor"))
            })?;
            let c = dep
                .node(current)
                .ok_or_else(|| Error::Validation(format!("link from unknown node {current}")))?;
            let p = dep
                .node(parent)
                .ok_or_else(|| Error::Validation(format!("link to unknown node {parent}")))?;
            let tech = profile(radios, &c.tech)?;
            delay += link_delay(tech, c.position.dist(&p.position))?;
            hops += 1;
            if hops > dep.nodes.len() {
                return Err(Error::Topology("cycle in link graph".into()));
            }
            if parent == anchor.id {
                break;
            }
            current = parent;
        }
        delays.push(delay);
    }
    if delays.is_empty() {
        return Ok((0.0, 0.0));
    }
    let worst = delays.iter().cloned().fold(f64::MIN, f64::max);
    let mean = delays.iter().sum::<f64>() / delays.len() as f64;
    Ok((worst, mean))
}

/// Total hardware cost: sum of each node's radio unit cost.
pub fn deployment_cost(dep: &Deployment, radios: &[RadioTech]) -> Result<f64> {
    let mut total = 0.0;
    for n in &dep.nodes {
        total += profile(radios, &n.tech)?.unit_cost;
    }
    Ok(total)
}

/// Per-target supply check: for each target, the sum of cell power rates
/// over nodes within `r_sense` of the target must reach `threshold`.
pub fn ilp_check(
    dep: &Deployment,
    power: &PowerMap,
    targets: &TargetSet,
    threshold: f64,
    r_sense: f64,
) -> Result<IlpReport> {
    let r2 = r_sense * r_sense;
    let mut node_cells = Vec::with_capacity(dep.nodes.len());
    for n in &dep.nodes {
        node_cells.push(crate::field::cell_of(&dep.field, &n.position)?);
    }
    let mut per_target_ok = Vec::with_capacity(targets.positions.len());
    for t in &targets.positions {
        let mut supply = 0.0;
        for (n, cell) in dep.nodes.iter().zip(&node_cells) {
            let dx = t.x_m - n.position.x_m;
            let dy = t.y_m - n.position.y_m;
            if dx * dx + dy * dy <= r2 {
                supply += power.rate(cell.index)?;
            }
        }
        per_target_ok.push(supply >= threshold);
    }
    Ok(IlpReport {
        node_total: dep.nodes.len() as u32,
        per_target_ok,
        integral_ok: true,
    })
}

/// Per-target cell-coverage bitmasks for the exact solver: bit c of entry t
/// is set when a node at cell center c would cover target t.
fn cover_masks(grid: &Grid, r_sense: f64, targets: &TargetSet) -> Result<Vec<u32>> {
    let r2 = r_sense * r_sense;
    let mut masks = Vec::with_capacity(targets.positions.len());
    for t in &targets.positions {
        let mut mask = 0u32;
        for (c, gc) in grid.cells.iter().enumerate() {
            let dx = t.x_m - gc.center.x_m;
            let dy = t.y_m - gc.center.y_m;
            if dx * dx + dy * dy <= r2 {
                mask |= 1 << c;
            }
        }
        if mask == 0 {
            return Err(Error::Infeasible(format!(
                "target at ({}, {}) is not coverable from any cell center",
                t.x_m, t.y_m
            )));
        }
        masks.push(mask);
    }
    masks.sort_unstable();
    masks.dedup();
    Ok(masks)
}

fn exact_guard(grid: &Grid) -> Result<()> {
    let cells = grid.spec.n_cells();
    if cells > MAX_EXACT_CELLS {
        return Err(Error::Scale {
            cells: cells as usize,
            max_cells: MAX_EXACT_CELLS as usize,
        });
    }
    Ok(())
}

fn mask_feasible(mask: u32, requirements: &[u32], threshold: u32) -> bool {
    requirements
        .iter()
        .all(|req| (mask & req).count_ones() >= threshold)
}

/// Minimum number of cell-center nodes so that every target is covered by
/// at least `threshold` of them (unit power rates), found by exhaustive
/// subset sweep. Oracle twin of [`min_nodes_exact`].
pub fn min_nodes_exhaustive(
    grid: &Grid,
    r_sense: f64,
    targets: &TargetSet,
    threshold: f64,
) -> Result<u32> {
    exact_guard(grid)?;
    let t = threshold.ceil().max(0.0) as u32;
    if t == 0 || targets.positions.is_empty() {
        return Ok(0);
    }
    let requirements = cover_masks(grid, r_sense, targets)?;
    let n = grid.spec.n_cells();
    let mut best: Option<u32> = None;
    for mask in 0..(1u32 << n) {
        let k = mask.count_ones();
        if best.is_some_and(|b| k >= b) {
            continue;
        }
        if mask_feasible(mask, &requirements, t) {
            best = Some(k);
        }
    }
    best.ok_or_else(|| Error::Infeasible("no cell subset satisfies every target".into()))
}

/// Minimum number of cell-center nodes covering every target at least
/// `threshold` times: branch-and-bound over the uncovered target with the
/// fewest remaining options, falling back to nothing — the bound alone
/// prunes the subset enumeration.
pub fn min_nodes_exact(
    grid: &Grid,
    r_sense: f64,
    targets: &TargetSet,
    threshold: f64,
) -> Result<u32> {
    exact_guard(grid)?;
    let t = threshold.ceil().max(0.0) as u32;
    if t == 0 || targets.positions.is_empty() {
        return Ok(0);
    }
    let requirements = cover_masks(grid, r_sense, targets)?;
    let n = grid.spec.n_cells();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    if !mask_feasible(full, &requirements, t) {
        return Err(Error::Infeasible(
            "no cell subset satisfies every target".into(),
        ));
    }

    fn dfs(chosen: u32, requirements: &[u32], threshold: u32, best: &mut u32, full: u32) {
        let count = chosen.count_ones();
        if count >= *best {
            return;
        }
        // Select the unmet requirement with the fewest remaining options.
        let mut pick: Option<(u32, u32)> = None; // (options mask, shortfall)
        for &req in requirements {
            let have = (chosen & req).count_ones();
            if have >= threshold {
                continue;
            }
            let options = req & !chosen;
            match pick {
                Some((o, _)) if o.count_ones() <= options.count_ones() => {}
                _ => pick = Some((options, threshold - have)),
            }
        }
        let Some((options, shortfall)) = pick else {
            *best = count;
            return;
        };
        // Even the cheapest completion needs `shortfall` more nodes.
        if count + shortfall >= *best {
            return;
        }
        let mut opts = options;
        while opts != 0 {
            let bit = opts & opts.wrapping_neg();
            dfs(chosen | bit, requirements, threshold, best, full);
            opts ^= bit;
        }
    }

    let mut best = full.count_ones() + 1;
    dfs(0, &requirements, t, &mut best, full);
    Ok(best)
}

/// Convenience: per-role sensing discs for a merged deployment, mapping
/// each node role to a radius (nodes with no entry are skipped).
pub fn role_discs(dep: &Deployment, radii: &BTreeMap<NodeRole, f64>) -> Vec<(Point2D, f64)> {
    dep.nodes
        .iter()
        .filter_map(|n| radii.get(&n.role).map(|&r| (n.position, r)))
        .collect()
}
