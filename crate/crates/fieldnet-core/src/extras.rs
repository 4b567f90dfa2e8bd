//! Force-directed placement of short-range extra sensor nodes around the
//! long-range backbone (anchor + stations).
//!
//! Each extra node feels four forces, summed then scaled by the learning
//! rate with the per-step displacement clamped to half the short radio
//! range:
//!
//! * **repulsion** from every other extra within `3 × bt_range`:
//!   inverse-square `repulsion · bt² / d²` with the distance floored at 1 m,
//! * **attraction** toward its assigned backbone node, a linear spring
//!   `attraction · d / bt`,
//! * **boundary push** within `bt_range` of a field edge: `(1 - δ/bt)²`
//!   inward along the offending axis,
//! * **connectivity penalty** `penalty · λ · û` toward the assigned node
//!   whenever the node sits beyond `bt_range`; its multiplier follows
//!   `λ ← max(0, λ + 0.1 · (d - bt_range))`, rising while disconnected and
//!   decaying back toward zero once inside range.
//!
//! Updates are synchronous (every force reads the previous step's
//! positions) and the whole run is deterministic per seed. Extras keep the
//! backbone node they were seeded around for the entire optimization; the
//! merged deployment reassigns each one to its nearest backbone node and
//! records direct or multi-hop connectivity.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Point2D};
use crate::gdl::{Trace, TraceRecord};
use crate::placement::{Deployment, NodeRole, SensorNode, EXTRA_TECH};

/// Step size of the connectivity-multiplier update.
const LAMBDA_RATE: f64 = 0.1;

/// Tuning for the extra-node force system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtraConfig {
    /// How many extra nodes to deploy.
    pub count: u32,
    pub learning_rate: f64,
    pub iterations: u32,
    /// Pairwise repulsion strength.
    pub repulsion: f64,
    /// Spring strength toward the assigned backbone node.
    pub attraction: f64,
    /// Connectivity-penalty strength.
    pub penalty: f64,
    /// Long-range radius, used when drawing station circles.
    pub wifi_range: f64,
    /// Short-range radius: connectivity threshold and force length scale.
    pub bt_range: f64,
    pub seed: u64,
}

impl Default for ExtraConfig {
    fn default() -> Self {
        ExtraConfig {
            count: 100,
            learning_rate: 0.5,
            iterations: 300,
            repulsion: 0.5,
            attraction: 0.8,
            penalty: 10.0,
            wifi_range: 70.0,
            bt_range: 15.0,
            seed: 42,
        }
    }
}

impl ExtraConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("repulsion", self.repulsion),
            ("attraction", self.attraction),
            ("penalty", self.penalty),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [("wifi_range", self.wifi_range), ("bt_range", self.bt_range)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Mutable state of the force system: extra positions, the backbone node
/// each one is tethered to, and the per-node connectivity multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraState {
    pub positions: Vec<Point2D>,
    /// Backbone node id each extra is attracted to.
    pub assignments: Vec<u32>,
    /// Connectivity multipliers, always ≥ 0.
    pub lambda_conn: Vec<f64>,
}

impl ExtraState {
    pub fn validate(&self, backbone: &Deployment) -> Result<()> {
        if self.assignments.len() != self.positions.len()
            || self.lambda_conn.len() != self.positions.len()
        {
            return Err(Error::Validation(format!(
                "state lists disagree: {} positions, {} assignments, {} multipliers",
                self.positions.len(),
                self.assignments.len(),
                self.lambda_conn.len()
            )));
        }
        for &id in &self.assignments {
            match backbone.node(id) {
                Some(n) if n.role == NodeRole::Anchor || n.role == NodeRole::Station => {}
                Some(_) => {
                    return Err(Error::Validation(format!(
                        "assignment target {id} is not a backbone node"
                    )))
                }
                None => {
                    return Err(Error::Validation(format!(
                        "assignment target {id} does not exist"
                    )))
                }
            }
        }
        for &l in &self.lambda_conn {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(Error::Validation(format!(
                    "connectivity multiplier must be non-negative, got {l}"
                )));
            }
        }
        Ok(())
    }
}

/// The deployment's backbone nodes (anchor or station) in id order.
fn backbone_nodes(dep: &Deployment) -> Vec<&SensorNode> {
    let mut nodes: Vec<&SensorNode> = dep
        .nodes
        .iter()
        .filter(|n| n.role == NodeRole::Anchor || n.role == NodeRole::Station)
        .collect();
    nodes.sort_by_key(|n| n.id);
    nodes
}

/// Nearest-backbone assignment plus connectivity flags for a set of extra
/// positions. An extra is connected when it sits within `bt_range` of any
/// backbone node, or within `bt_range` of an already-connected extra
/// (multi-hop). Unreachable extras keep their nearest assignment and are
/// flagged, never dropped.
pub fn assign_to_stations(
    extras: &[Point2D],
    stations: &Deployment,
    bt_range: f64,
) -> Result<(Vec<u32>, Vec<bool>)> {
    if !(bt_range > 0.0) {
        return Err(Error::Domain { what: "bt_range", value: bt_range });
    }
    let backbone = backbone_nodes(stations);
    if backbone.is_empty() {
        return Err(Error::Config(
            "deployment has no backbone nodes to connect to".into(),
        ));
    }
    let mut assignment = Vec::with_capacity(extras.len());
    let mut connected = Vec::with_capacity(extras.len());
    for p in extras {
        let mut best = (f64::INFINITY, 0u32);
        for b in &backbone {
            let d = p.dist(&b.position);
            if d < best.0 {
                best = (d, b.id);
            }
        }
        assignment.push(best.1);
        connected.push(best.0 <= bt_range);
    }
    // Multi-hop closure: keep absorbing extras that can reach the
    // connected set through another extra.
    let mut grew = true;
    while grew {
        grew = false;
        for i in 0..extras.len() {
            if connected[i] {
                continue;
            }
            if (0..extras.len())
                .any(|j| connected[j] && extras[i].dist(&extras[j]) <= bt_range)
            {
                connected[i] = true;
                grew = true;
            }
        }
    }
    Ok((assignment, connected))
}

/// One synchronous force update: every force reads `state`, all positions
/// move together, then the multipliers react to the new distances.
pub fn force_step(
    state: &ExtraState,
    cfg: &ExtraConfig,
    field: &FieldSpec,
    stations: &Deployment,
) -> Result<ExtraState> {
    cfg.validate()?;
    state.validate(stations)?;
    let bt = cfg.bt_range;
    let cutoff = 3.0 * bt;
    let step_max = bt / 2.0;
    let n = state.positions.len();
    let anchors: Vec<Point2D> = state
        .assignments
        .iter()
        .map(|&id| stations.node(id).expect("validated above").position)
        .collect();

    let mut next = ExtraState {
        positions: Vec::with_capacity(n),
        assignments: state.assignments.clone(),
        lambda_conn: Vec::with_capacity(n),
    };
    for i in 0..n {
        let p = state.positions[i];
        let mut fx = 0.0;
        let mut fy = 0.0;
        // Pairwise repulsion, inverse-square with a 1 m floor and a cutoff.
        for j in 0..n {
            if j == i {
                continue;
            }
            let q = state.positions[j];
            let d = p.dist(&q);
            if d > cutoff {
                continue;
            }
            let dfl = d.max(1.0);
            let push = cfg.repulsion * (bt * bt) / (dfl * dfl);
            fx += push * (p.x_m - q.x_m) / dfl;
            fy += push * (p.y_m - q.y_m) / dfl;
        }
        // Spring toward the assigned backbone node.
        let a = anchors[i];
        let dst = p.dist(&a);
        let dsafe = dst.max(1e-9);
        let pull = cfg.attraction * (dst / bt);
        fx += pull * (a.x_m - p.x_m) / dsafe;
        fy += pull * (a.y_m - p.y_m) / dsafe;
        // Boundary push, per axis, inside a bt-wide margin band.
        if p.x_m < bt {
            fx += (1.0 - p.x_m / bt) * (1.0 - p.x_m / bt);
        }
        if p.x_m > field.width_m - bt {
            let s = 1.0 - (field.width_m - p.x_m) / bt;
            fx -= s * s;
        }
        if p.y_m < bt {
            fy += (1.0 - p.y_m / bt) * (1.0 - p.y_m / bt);
        }
        if p.y_m > field.height_m - bt {
            let s = 1.0 - (field.height_m - p.y_m) / bt;
            fy -= s * s;
        }
        // Connectivity penalty while beyond short range.
        if dst > bt {
            let pen = cfg.penalty * state.lambda_conn[i];
            fx += pen * (a.x_m - p.x_m) / dsafe;
            fy += pen * (a.y_m - p.y_m) / dsafe;
        }

        let mut sx = cfg.learning_rate * fx;
        let mut sy = cfg.learning_rate * fy;
        let norm = sx.hypot(sy);
        if norm > step_max {
            sx *= step_max / norm;
            sy *= step_max / norm;
        }
        let moved = Point2D::new(
            (p.x_m + sx).clamp(0.0, field.width_m),
            (p.y_m + sy).clamp(0.0, field.height_m),
        );
        next.positions.push(moved);
    }
    for i in 0..n {
        let dst = next.positions[i].dist(&anchors[i]);
        next.lambda_conn
            .push((state.lambda_conn[i] + LAMBDA_RATE * (dst - bt)).max(0.0));
    }
    Ok(next)
}

/// Seed `cfg.count` extras round-robin over the backbone nodes, each
/// uniform inside its node's `bt_range` disc, run the force system for
/// `cfg.iterations` steps, and merge the result into the input deployment.
/// Extras get fresh ids after the existing maximum, role `extra`, tech
/// Bluetooth, and a link to their nearest backbone node (direct) or to the
/// relay extra that connects them (multi-hop); unreachable extras carry no
/// link. The trace records, per iteration, the negated mean
/// distance-to-assigned-node as the objective, the largest position move,
/// and the multiplier norm.
pub fn optimize_extras(
    stations: &Deployment,
    cfg: &ExtraConfig,
) -> Result<(Deployment, Trace)> {
    cfg.validate()?;
    let field = stations.field;
    let backbone = backbone_nodes(stations);
    if backbone.is_empty() {
        return Err(Error::Config(
            "cannot place extras: the deployment has no backbone nodes".into(),
        ));
    }
    if stations.nodes.iter().any(|n| n.role == NodeRole::Extra) {
        return Err(Error::Config(
            "the deployment already contains extra nodes".into(),
        ));
    }
    if cfg.count == 0 {
        return Ok((
            stations.clone(),
            Trace { records: Vec::new(), converged: true },
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = ExtraState {
        positions: Vec::with_capacity(cfg.count as usize),
        assignments: Vec::with_capacity(cfg.count as usize),
        lambda_conn: vec![0.0; cfg.count as usize],
    };
    for i in 0..cfg.count as usize {
        let home = backbone[i % backbone.len()];
        let r = cfg.bt_range * rng.random_range(0.0..1.0_f64).sqrt();
        let th = 2.0 * std::f64::consts::PI * rng.random_range(0.0..1.0_f64);
        let p = Point2D::new(
            (home.position.x_m + r * th.cos()).clamp(0.0, field.width_m),
            (home.position.y_m + r * th.sin()).clamp(0.0, field.height_m),
        );
        state.positions.push(p);
        state.assignments.push(home.id);
    }

    let mut records = Vec::with_capacity(cfg.iterations as usize);
    for it in 0..cfg.iterations {
        let next = force_step(&state, cfg, &field, stations)?;
        let max_delta = state
            .positions
            .iter()
            .zip(&next.positions)
            .map(|(a, b)| a.dist(b))
            .fold(0.0f64, f64::max);
        let mean_dst = next
            .positions
            .iter()
            .zip(&next.assignments)
            .map(|(p, &id)| p.dist(&stations.node(id).unwrap().position))
            .sum::<f64>()
            / next.positions.len() as f64;
        let lambda_norm = next
            .lambda_conn
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        records.push(TraceRecord {
            iteration: it + 1,
            objective: -mean_dst,
            max_delta,
            lambda_norm,
            mu_norm: 0.0,
        });
        state = next;
    }

    // Final pass: reassign to the nearest backbone node and build the
    // connectivity forest (direct link, or link to the nearest relay that
    // joined the connected set in an earlier wave).
    let (assignment, _) = assign_to_stations(&state.positions, stations, cfg.bt_range)?;
    let next_id = stations.nodes.iter().map(|n| n.id).max().unwrap_or(0) + 1;
    let extra_ids: Vec<u32> = (0..cfg.count).map(|k| next_id + k).collect();

    let n = state.positions.len();
    let mut parent: Vec<Option<u32>> = vec![None; n];
    let mut connected = vec![false; n];
    for i in 0..n {
        let station = stations.node(assignment[i]).unwrap();
        if state.positions[i].dist(&station.position) <= cfg.bt_range {
            parent[i] = Some(station.id);
            connected[i] = true;
        }
    }
    loop {
        let snapshot = connected.clone();
        let mut grew = false;
        for i in 0..n {
            if connected[i] {
                continue;
            }
            let mut best: Option<(f64, u32)> = None;
            for j in 0..n {
                if !snapshot[j] || j == i {
                    continue;
                }
                let d = state.positions[i].dist(&state.positions[j]);
                if d <= cfg.bt_range && best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, extra_ids[j]));
                }
            }
            if let Some((_, relay)) = best {
                parent[i] = Some(relay);
                connected[i] = true;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }

    let mut merged = stations.clone();
    for i in 0..n {
        merged.nodes.push(SensorNode {
            id: extra_ids[i],
            position: state.positions[i],
            role: NodeRole::Extra,
            tech: EXTRA_TECH.to_string(),
        });
        if let Some(pid) = parent[i] {
            merged.links.insert(extra_ids[i], pid);
        }
    }
    merged.meta.algorithm = format!("{}+extras", stations.meta.algorithm);
    merged.meta.seed = cfg.seed;
    merged.meta.iterations = cfg.iterations;
    Ok((
        merged,
        Trace { records, converged: true },
    ))
}
