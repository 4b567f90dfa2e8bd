//! Hybrid ring optimizer: projected gradient ascent on a smooth placement
//! objective with Lagrange multipliers tracked on the box/radius
//! constraints, followed by radial overlap alignment.
//!
//! Objective (functional form frozen here and exercised by gradient checks):
//!
//! ```text
//! J = w_c * [ -Σ_i (d_i - r_ring)^2
//!             - S * Σ_{i<j} exp(K * (cos(θ_i - θ_j) - 1)) ]
//!     - w_p * Σ_i kp * d_i^α
//!     - w_d * Σ_i (kd + cd * d_i)
//! ```
//!
//! where `d_i`, `θ_i` are each station's polar coordinates about the anchor,
//! `r_ring` is the golden-ratio ring radius (spacing ratio × cell edge), and
//! S, K are the angular-spread constants below. The quadratic ring term pulls
//! every station toward a common radius, the angular kernel spreads stations
//! apart, and the power/delay sums price the uplink.
//!
//! Position updates ascend J in polar-preconditioned form: the step is
//! `lr * (∂J/∂d · û_r + ∂J/∂θ · û_t)` — the tangential component applies the
//! angular derivative directly rather than dividing by the radius, which
//! keeps radial and angular convergence time-scales decoupled. Steps are
//! projected into the field box (edge margin) and the anchor-radius ball.
//! Multipliers follow `λ ← max(0, λ - lr_multiplier · slack)` and are
//! reported in the trace; the equality multiplier on the node-count budget
//! is structurally zero (the budget is enforced by construction) and stays
//! an empty list.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Point2D};
use crate::placement::{Deployment, DeploymentMeta, NodeRole, SensorNode, GOLDEN_RATIO, STATION_TECH};
use crate::radio::{link_delay, link_power, RadioTech};

/// Weight of the pairwise angular-spread kernel inside the coverage proxy.
pub const SPREAD_WEIGHT: f64 = 16.0;

/// Sharpness of the angular-spread kernel.
pub const SPREAD_SHARPNESS: f64 = 4.0;

/// Constraint-violation ceiling accepted at convergence.
const VIOLATION_TOL: f64 = 0.01;

/// Tuning for the ring optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GdlConfig {
    /// Number of stations to arrange (the reduced cell budget).
    pub n_stations: u32,
    /// Coverage-proxy weight.
    pub w_c: f64,
    /// Power-penalty weight.
    pub w_p: f64,
    /// Delay-penalty weight.
    pub w_d: f64,
    /// Hard cap on anchor distance.
    pub d_max: f64,
    /// Position step size.
    pub lr_position: f64,
    /// Multiplier step size.
    pub lr_multiplier: f64,
    pub max_iterations: u32,
    /// Convergence threshold on the max position delta (meters).
    pub tol: f64,
    /// Margin kept from every field edge.
    pub min_edge_distance: f64,
    pub seed: u64,
}

impl Default for GdlConfig {
    fn default() -> Self {
        GdlConfig {
            n_stations: 8,
            w_c: 40.0,
            w_p: 25.0,
            w_d: 1.0,
            d_max: 150.0,
            lr_position: 0.01,
            lr_multiplier: 0.005,
            max_iterations: 100,
            tol: 0.01,
            min_edge_distance: 5.0,
            seed: 42,
        }
    }
}

impl GdlConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_stations < 1 {
            return Err(Error::Config("n_stations must be at least 1".into()));
        }
        for (name, v) in [
            ("w_c", self.w_c),
            ("w_p", self.w_p),
            ("w_d", self.w_d),
            ("d_max", self.d_max),
            ("lr_position", self.lr_position),
            ("lr_multiplier", self.lr_multiplier),
            ("tol", self.tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.min_edge_distance >= 0.0) || !self.min_edge_distance.is_finite() {
            return Err(Error::Config(format!(
                "min_edge_distance must be non-negative, got {}",
                self.min_edge_distance
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Dual variables: one `lambda` per inequality slack (non-negative), one
/// `mu` per equality residual (none — the node budget is structural).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

impl Multipliers {
    /// Zero multipliers sized for `n` stations (six slacks each).
    pub fn zeros(n: usize) -> Self {
        Multipliers {
            lambda: vec![0.0; 6 * n],
            mu: Vec::new(),
        }
    }

    pub fn lambda_norm(&self) -> f64 {
        self.lambda.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn mu_norm(&self) -> f64 {
        self.mu.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// One optimizer iteration snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: u32,
    pub objective: f64,
    pub max_delta: f64,
    pub lambda_norm: f64,
    pub mu_norm: f64,
}

/// Full optimization history plus the convergence verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub converged: bool,
}

impl Trace {
    pub fn iterations(&self) -> u32 {
        self.records.len() as u32
    }

    /// CSV rendering: iteration, objective, max position delta.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,objective,max_delta\n");
        for r in &self.records {
            out.push_str(&format!("{},{:.6},{:.6}\n", r.iteration, r.objective, r.max_delta));
        }
        out
    }
}

/// Ring radius targeted by the coverage proxy: spacing ratio × cell edge.
pub fn ring_radius(field: &FieldSpec) -> f64 {
    GOLDEN_RATIO * field.cell_edge_m
}

fn polar(p: Point2D, anchor: Point2D) -> (f64, f64) {
    let dx = p.x_m - anchor.x_m;
    let dy = p.y_m - anchor.y_m;
    (dx.hypot(dy), dy.atan2(dx))
}

/// Raw objective terms about an explicit anchor: (coverage proxy, total
/// link power, total link delay). No bounds checks — callers own them.
fn terms_at(
    positions: &[Point2D],
    anchor: Point2D,
    r_ring: f64,
    radio: &RadioTech,
) -> Result<(f64, f64, f64)> {
    let n = positions.len();
    let polars: Vec<(f64, f64)> = positions.iter().map(|&p| polar(p, anchor)).collect();
    let mut ring = 0.0;
    let mut power = 0.0;
    let mut delay = 0.0;
    for &(d, _) in &polars {
        ring += (d - r_ring) * (d - r_ring);
        power += link_power(radio, d)?;
        delay += link_delay(radio, d)?;
    }
    let mut spread = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dth = polars[i].1 - polars[j].1;
            spread += (SPREAD_SHARPNESS * (dth.cos() - 1.0)).exp();
        }
    }
    Ok((-ring - SPREAD_WEIGHT * spread, power, delay))
}

/// The objective's three raw terms for stations about the field center:
/// (coverage proxy, summed link power, summed link delay).
pub fn objective_terms(
    positions: &[Point2D],
    field: &FieldSpec,
    radio: &RadioTech,
) -> Result<(f64, f64, f64)> {
    for p in positions {
        if !field.contains(p) {
            return Err(Error::OutOfBounds { x_m: p.x_m, y_m: p.y_m });
        }
    }
    terms_at(positions, field.center(), ring_radius(field), radio)
}

/// The placement objective J for stations about the field center.
pub fn objective(
    positions: &[Point2D],
    cfg: &GdlConfig,
    field: &FieldSpec,
    radio: &RadioTech,
) -> Result<f64> {
    let (cov, power, delay) = objective_terms(positions, field, radio)?;
    Ok(cfg.w_c * cov - cfg.w_p * power - cfg.w_d * delay)
}

/// Inequality slacks for every station, grouped by constraint kind:
/// the four edge margins (x lower, x upper, y lower, y upper), then the
/// anchor distance above zero, then the headroom below d_max. All slacks
/// are ≥ 0 exactly when the layout is feasible.
pub fn slack_vector(
    positions: &[Point2D],
    anchor: Point2D,
    field: &FieldSpec,
    cfg: &GdlConfig,
) -> Vec<f64> {
    let e = cfg.min_edge_distance;
    let mut slacks = Vec::with_capacity(6 * positions.len());
    slacks.extend(positions.iter().map(|p| p.x_m - e));
    slacks.extend(positions.iter().map(|p| field.width_m - e - p.x_m));
    slacks.extend(positions.iter().map(|p| p.y_m - e));
    slacks.extend(positions.iter().map(|p| field.height_m - e - p.y_m));
    slacks.extend(positions.iter().map(|p| polar(*p, anchor).0));
    slacks.extend(positions.iter().map(|p| cfg.d_max - polar(*p, anchor).0));
    slacks
}

fn lagrangian_unchecked(
    positions: &[Point2D],
    multipliers: &Multipliers,
    cfg: &GdlConfig,
    field: &FieldSpec,
    radio: &RadioTech,
) -> Result<f64> {
    let anchor = field.center();
    let (cov, power, delay) = terms_at(positions, anchor, ring_radius(field), radio)?;
    let j = cfg.w_c * cov - cfg.w_p * power - cfg.w_d * delay;
    let slacks = slack_vector(positions, anchor, field, cfg);
    let penalty: f64 = multipliers
        .lambda
        .iter()
        .zip(&slacks)
        .map(|(l, s)| l * s)
        .sum();
    // Equality residuals (node-count budget) are structurally zero, so the
    // mu terms vanish; they are kept in the signature for completeness.
    Ok(j - penalty)
}

/// The dual function D = J − Σ λ·slack − Σ μ·residual, with stations about
/// the field center. `lambda` must hold six entries per station; the
/// equality residual list must match `mu` (both are empty here).
pub fn lagrangian(
    positions: &[Point2D],
    multipliers: &Multipliers,
    cfg: &GdlConfig,
    field: &FieldSpec,
    radio: &RadioTech,
) -> Result<f64> {
    if multipliers.lambda.len() != 6 * positions.len() {
        return Err(Error::Validation(format!(
            "expected {} lambda entries for {} stations, got {}",
            6 * positions.len(),
            positions.len(),
            multipliers.lambda.len()
        )));
    }
    if !multipliers.mu.is_empty() {
        return Err(Error::Validation(format!(
            "expected 0 mu entries (the node budget is structural), got {}",
            multipliers.mu.len()
        )));
    }
    for p in positions {
        if !field.contains(p) {
            return Err(Error::OutOfBounds { x_m: p.x_m, y_m: p.y_m });
        }
    }
    lagrangian_unchecked(positions, multipliers, cfg, field, radio)
}

/// Central finite difference of a scalar function of one variable.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central-difference gradient of the dual function, one vector per
/// station. The independent oracle for [`analytic_gradient`].
pub fn numerical_gradient(
    positions: &[Point2D],
    multipliers: &Multipliers,
    cfg: &GdlConfig,
    field: &FieldSpec,
    radio: &RadioTech,
    h: f64,
) -> Result<Vec<Point2D>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain { what: "difference step", value: h });
    }
    let mut grads = Vec::with_capacity(positions.len());
    let mut work = positions.to_vec();
    for i in 0..positions.len() {
        let base = work[i];
        let mut eval = |p: Point2D| -> Result<f64> {
            work[i] = p;
            let v = lagrangian_unchecked(&work, multipliers, cfg, field, radio);
            work[i] = base;
            v
        };
        let gx = (eval(Point2D::new(base.x_m + h, base.y_m))?
            - eval(Point2D::new(base.x_m - h, base.y_m))?)
            / (2.0 * h);
        let gy = (eval(Point2D::new(base.x_m, base.y_m + h))?
            - eval(Point2D::new(base.x_m, base.y_m - h))?)
            / (2.0 * h);
        grads.push(Point2D::new(gx, gy));
    }
    Ok(grads)
}

/// Closed-form Cartesian gradient of the dual function (multiplier terms
/// included), one vector per station.
pub fn analytic_gradient(
    positions: &[Point2D],
    multipliers: &Multipliers,
    cfg: &GdlConfig,
    field: &FieldSpec,
    radio: &RadioTech,
) -> Result<Vec<Point2D>> {
    if multipliers.lambda.len() != 6 * positions.len() {
        return Err(Error::Validation(format!(
            "expected {} lambda entries for {} stations, got {}",
            6 * positions.len(),
            positions.len(),
            multipliers.lambda.len()
        )));
    }
    let anchor = field.center();
    let r_ring = ring_radius(field);
    let n = positions.len();
    let polars: Vec<(f64, f64)> = positions.iter().map(|&p| polar(p, anchor)).collect();
    let mut grads = Vec::with_capacity(n);
    for i in 0..n {
        let (d, th) = polars[i];
        let d_safe = d.max(1e-9);
        // Radial derivative of J.
        let g_d = -2.0 * cfg.w_c * (d - r_ring)
            - cfg.w_p * radio.kp * radio.alpha * d_safe.powf(radio.alpha - 1.0)
            - cfg.w_d * radio.cd;
        // Angular derivative of J.
        let mut g_th = 0.0;
        for (j, &(_, thj)) in polars.iter().enumerate() {
            if j == i {
                continue;
            }
            let dth = th - thj;
            g_th += dth.sin() * (SPREAD_SHARPNESS * (dth.cos() - 1.0)).exp();
        }
        g_th *= cfg.w_c * SPREAD_WEIGHT * SPREAD_SHARPNESS;
        let ur = Point2D::new(
            (positions[i].x_m - anchor.x_m) / d_safe,
            (positions[i].y_m - anchor.y_m) / d_safe,
        );
        let ut = Point2D::new(-th.sin(), th.cos());
        // True Cartesian gradient: the tangential component carries 1/d.
        let mut gx = g_d * ur.x_m + (g_th / d_safe) * ut.x_m;
        let mut gy = g_d * ur.y_m + (g_th / d_safe) * ut.y_m;
        // Multiplier terms: D subtracts λ·slack, so each active λ pushes
        // against its slack's growth direction.
        let l = &multipliers.lambda;
        gx -= l[i]; // slack x - e grows with x
        gx += l[n + i]; // slack W - e - x shrinks with x
        gy -= l[2 * n + i];
        gy += l[3 * n + i];
        gx -= l[4 * n + i] * ur.x_m; // slack d
        gy -= l[4 * n + i] * ur.y_m;
        gx += l[5 * n + i] * ur.x_m; // slack d_max - d
        gy += l[5 * n + i] * ur.y_m;
        grads.push(Point2D::new(gx, gy));
    }
    Ok(grads)
}

/// A random feasible starting deployment: anchor at the field center,
/// stations uniform over the field then clamped to the edge margin.
/// Reproducible per `cfg.seed`.
pub fn random_initial(spec: &FieldSpec, cfg: &GdlConfig) -> Result<Deployment> {
    spec.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut nodes = vec![SensorNode {
        id: 0,
        position: spec.center(),
        role: NodeRole::Anchor,
        tech: STATION_TECH.to_string(),
    }];
    for i in 0..cfg.n_stations {
        let raw = Point2D::new(
            rng.random_range(0.0..spec.width_m),
            rng.random_range(0.0..spec.height_m),
        );
        nodes.push(SensorNode {
            id: i + 1,
            position: spec.clamp_with_margin(raw, cfg.min_edge_distance),
            role: NodeRole::Station,
            tech: STATION_TECH.to_string(),
        });
    }
    Ok(Deployment {
        field: *spec,
        nodes,
        links: std::collections::BTreeMap::new(),
        meta: DeploymentMeta {
            algorithm: "hybrid-init".into(),
            seed: cfg.seed,
            iterations: 0,
        },
    })
}

/// Run the projected ascent to a fixed ring. The initial deployment must
/// hold exactly one anchor and `cfg.n_stations` stations; the anchor stays
/// fixed. Returns the optimized deployment (stations star-linked to the
/// anchor) and the full iteration trace; `trace.converged` is false when
/// `max_iterations` ran out, in which case the best-so-far layout is
/// returned.
pub fn optimize(
    initial: &Deployment,
    cfg: &GdlConfig,
    radio: &RadioTech,
) -> Result<(Deployment, Trace)> {
    cfg.validate()?;
    let field = &initial.field;
    let anchor_node = initial
        .nodes
        .iter()
        .find(|n| n.role == NodeRole::Anchor)
        .ok_or_else(|| Error::Validation("initial deployment needs an anchor".into()))?;
    let stations: Vec<&SensorNode> = initial
        .nodes
        .iter()
        .filter(|n| n.role == NodeRole::Station)
        .collect();
    if stations.len() as u32 != cfg.n_stations {
        return Err(Error::Validation(format!(
            "initial deployment has {} stations, config wants {}",
            stations.len(),
            cfg.n_stations
        )));
    }
    for n in &initial.nodes {
        if !field.contains(&n.position) {
            return Err(Error::OutOfBounds {
                x_m: n.position.x_m,
                y_m: n.position.y_m,
            });
        }
    }

    let anchor = anchor_node.position;
    let r_ring = ring_radius(field);
    let e = cfg.min_edge_distance;
    let n = stations.len();
    let mut pos: Vec<Point2D> = stations.iter().map(|s| s.position).collect();
    let mut lambda = vec![0.0f64; 6 * n];
    let mut records = Vec::new();
    let mut converged = false;

    // Track the best layout seen in case the loop runs out of iterations.
    let mut best_pos = pos.clone();
    let mut best_j = f64::NEG_INFINITY;

    for it in 0..cfg.max_iterations {
        let polars: Vec<(f64, f64)> = pos.iter().map(|&p| polar(p, anchor)).collect();
        // Ascent step in polar-preconditioned form (see module docs).
        let mut next = Vec::with_capacity(n);
        let mut max_delta = 0.0f64;
        for i in 0..n {
            let (d, th) = polars[i];
            let d_safe = d.max(1e-9);
            let g_d = -2.0 * cfg.w_c * (d - r_ring)
                - cfg.w_p * radio.kp * radio.alpha * d_safe.powf(radio.alpha - 1.0)
                - cfg.w_d * radio.cd;
            let mut g_th = 0.0;
            for (j, &(_, thj)) in polars.iter().enumerate() {
                if j == i {
                    continue;
                }
                let dth = th - thj;
                g_th += dth.sin() * (SPREAD_SHARPNESS * (dth.cos() - 1.0)).exp();
            }
            g_th *= cfg.w_c * SPREAD_WEIGHT * SPREAD_SHARPNESS;
            let ux = (pos[i].x_m - anchor.x_m) / d_safe;
            let uy = (pos[i].y_m - anchor.y_m) / d_safe;
            let step_x = cfg.lr_position * (g_d * ux + g_th * -th.sin());
            let step_y = cfg.lr_position * (g_d * uy + g_th * th.cos());
            // Project into the margin box, then onto the d_max ball.
            let mut p = field.clamp_with_margin(
                Point2D::new(pos[i].x_m + step_x, pos[i].y_m + step_y),
                e,
            );
            let (nd, _) = polar(p, anchor);
            if nd > cfg.d_max {
                let scale = cfg.d_max / nd;
                p = Point2D::new(
                    anchor.x_m + (p.x_m - anchor.x_m) * scale,
                    anchor.y_m + (p.y_m - anchor.y_m) * scale,
                );
            }
            max_delta = max_delta.max(p.dist(&pos[i]));
            next.push(p);
        }
        pos = next;

        // Multiplier descent on the post-projection slacks.
        let slacks = slack_vector(&pos, anchor, field, cfg);
        for (l, s) in lambda.iter_mut().zip(&slacks) {
            *l = (*l - cfg.lr_multiplier * s).max(0.0);
        }
        debug_assert!(lambda.iter().all(|&l| l >= 0.0));

        let (cov, power, delay) = terms_at(&pos, anchor, r_ring, radio)?;
        let j = cfg.w_c * cov - cfg.w_p * power - cfg.w_d * delay;
        if j > best_j {
            best_j = j;
            best_pos.clone_from(&pos);
        }
        let lambda_norm = lambda.iter().map(|x| x * x).sum::<f64>().sqrt();
        records.push(TraceRecord {
            iteration: it + 1,
            objective: j,
            max_delta,
            lambda_norm,
            mu_norm: 0.0,
        });

        let violation = slacks.iter().cloned().fold(0.0f64, |acc, s| acc.max(-s));
        if max_delta < cfg.tol && violation < VIOLATION_TOL {
            converged = true;
            break;
        }
    }

    let final_pos = if converged { pos } else { best_pos };
    let mut nodes = vec![SensorNode {
        id: anchor_node.id,
        position: anchor,
        role: NodeRole::Anchor,
        tech: anchor_node.tech.clone(),
    }];
    let mut links = std::collections::BTreeMap::new();
    for (s, &p) in stations.iter().zip(&final_pos) {
        nodes.push(SensorNode {
            id: s.id,
            position: p,
            role: NodeRole::Station,
            tech: s.tech.clone(),
        });
        links.insert(s.id, anchor_node.id);
    }
    let dep = Deployment {
        field: *field,
        nodes,
        links,
        meta: DeploymentMeta {
            algorithm: "hybrid".into(),
            seed: cfg.seed,
            iterations: records.len() as u32,
        },
    };
    Ok((
        dep,
        Trace {
            records,
            converged,
        },
    ))
}

/// Outcome of [`align_overlap`]: how many sweeps ran, whether anything
/// moved, and which adjacent pairs could not be brought into the band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignReport {
    pub rounds: u32,
    pub changed: bool,
    pub infeasible_pairs: Vec<(u32, u32)>,
}

const ALIGN_MAX_ROUNDS: u32 = 500;
const ALIGN_STEP_M: f64 = 0.25;

/// Longest in-field radius from `origin` along direction `theta`.
fn max_ray_radius(field: &FieldSpec, origin: Point2D, theta: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    let mut t = f64::INFINITY;
    if c > 1e-12 {
        t = t.min((field.width_m - origin.x_m) / c);
    } else if c < -1e-12 {
        t = t.min(-origin.x_m / c);
    }
    if s > 1e-12 {
        t = t.min((field.height_m - origin.y_m) / s);
    } else if s < -1e-12 {
        t = t.min(-origin.y_m / s);
    }
    t.max(0.0)
}

/// Nudge stations along their anchor rays until every adjacent-pair disc
/// overlap lies in [min_ov, max_ov] where achievable. Adjacency is fixed by
/// the initial angular order around the anchor (field center when the
/// deployment has no anchor); each sweep moves the offending pair's outer
/// station (ties to the higher id) a quarter-meter outward when overlap is
/// above the band, inward when below. A compliant deployment is returned
/// unchanged; pairs still out of band after the sweep limit are reported.
pub fn align_overlap(
    dep: &Deployment,
    min_ov: f64,
    max_ov: f64,
    r_sense: f64,
) -> Result<(Deployment, AlignReport)> {
    if !(0.0..=1.0).contains(&min_ov) || !(0.0..=1.0).contains(&max_ov) || min_ov >= max_ov {
        return Err(Error::Config(format!(
            "overlap band must satisfy 0 <= min < max <= 1, got [{min_ov}, {max_ov}]"
        )));
    }
    if !(r_sense > 0.0) {
        return Err(Error::Domain { what: "sensing radius", value: r_sense });
    }
    let origin = dep
        .nodes
        .iter()
        .find(|n| n.role == NodeRole::Anchor)
        .map(|n| n.position)
        .unwrap_or_else(|| dep.field.center());

    // Station indices in fixed angular order (radial moves preserve it).
    let mut order: Vec<usize> = dep
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.role == NodeRole::Station)
        .map(|(i, _)| i)
        .collect();
    order.sort_by(|&a, &b| {
        let ta = polar(dep.nodes[a].position, origin).1;
        let tb = polar(dep.nodes[b].position, origin).1;
        ta.partial_cmp(&tb)
            .unwrap()
            .then(dep.nodes[a].id.cmp(&dep.nodes[b].id))
    });
    let pairs: Vec<(usize, usize)> = match order.len() {
        0 | 1 => Vec::new(),
        2 => vec![(order[0], order[1])],
        n => (0..n).map(|k| (order[k], order[(k + 1) % n])).collect(),
    };
    if pairs.is_empty() {
        return Ok((
            dep.clone(),
            AlignReport { rounds: 0, changed: false, infeasible_pairs: vec![] },
        ));
    }

    let mut out = dep.clone();
    let mut changed = false;
    let mut rounds = 0;
    for _ in 0..ALIGN_MAX_ROUNDS {
        let mut moved = false;
        let mut all_ok = true;
        for &(a, b) in &pairs {
            let pa = out.nodes[a].position;
            let pb = out.nodes[b].position;
            let ov = crate::metrics::pairwise_overlap(pa, pb, r_sense)?;
            if ov >= min_ov && ov <= max_ov {
                continue;
            }
            all_ok = false;
            // The outer station moves; ties go to the higher id.
            let (da, _) = polar(pa, origin);
            let (db, _) = polar(pb, origin);
            let mover = if (da - db).abs() > 1e-12 {
                if da > db { a } else { b }
            } else if out.nodes[a].id > out.nodes[b].id {
                a
            } else {
                b
            };
            let (d, th) = polar(out.nodes[mover].position, origin);
            // A station sitting on the anchor has no ray; send it east.
            let th = if d < 1e-12 { 0.0 } else { th };
            let new_d = if ov > max_ov {
                let cap = max_ray_radius(&out.field, origin, th);
                (d + ALIGN_STEP_M).min(cap)
            } else {
                (d - ALIGN_STEP_M).max(0.0)
            };
            if (new_d - d).abs() > 1e-12 {
                out.nodes[mover].position = Point2D::new(
                    origin.x_m + new_d * th.cos(),
                    origin.y_m + new_d * th.sin(),
                );
                moved = true;
                changed = true;
            }
        }
        if all_ok {
            break;
        }
        rounds += 1;
        if !moved {
            break; // every offender is pinned against a bound
        }
    }

    let mut infeasible_pairs = Vec::new();
    for &(a, b) in &pairs {
        let ov =
            crate::metrics::pairwise_overlap(out.nodes[a].position, out.nodes[b].position, r_sense)?;
        if !(min_ov..=max_ov).contains(&ov) {
            infeasible_pairs.push((out.nodes[a].id, out.nodes[b].id));
        }
    }
    if changed {
        out.meta.algorithm = format!("{}+aligned", dep.meta.algorithm);
    }
    Ok((
        out,
        AlignReport { rounds, changed, infeasible_pairs },
    ))
}
