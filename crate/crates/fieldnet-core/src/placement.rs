//! Deterministic deployment generators: uniform grid, Fibonacci cell
//! selection, radial (circular) layout, geometric spacing sequences, and the
//! distance helpers shared by the optimizers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{build_grid, FieldSpec, Point2D};
use crate::radio::{link_feasible, RadioTech};

/// Spacing ratio used by the hybrid layout (three-decimal design value of
/// the golden ratio; the ring radius is this times the cell edge).
pub const GOLDEN_RATIO: f64 = 1.618;

/// Radio assigned to grid/ring station nodes.
pub const STATION_TECH: &str = "WiFi";

/// Radio assigned to force-placed extension nodes.
pub const EXTRA_TECH: &str = "Bluetooth";

/// What a node does in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    /// Cluster head collecting from stations; at most one per deployment.
    Anchor,
    /// Long-range sensing node.
    Station,
    /// Plain sensing node with no special role.
    Normal,
    /// Short-range extension node.
    Extra,
}

impl NodeRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeRole::Anchor => "anchor",
            NodeRole::Station => "station",
            NodeRole::Normal => "normal",
            NodeRole::Extra => "extra",
        }
    }
}

/// One placed node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorNode {
    pub id: u32,
    pub position: Point2D,
    pub role: NodeRole,
    /// Name of the node's radio profile.
    pub tech: String,
}

/// Provenance of a deployment: which generator produced it and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentMeta {
    pub algorithm: String,
    pub seed: u64,
    pub iterations: u32,
}

/// A complete placement: field, nodes, and parent links (child id → parent
/// id) forming the uplink topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub field: FieldSpec,
    pub nodes: Vec<SensorNode>,
    pub links: BTreeMap<u32, u32>,
    pub meta: DeploymentMeta,
}

impl Deployment {
    pub fn node(&self, id: u32) -> Option<&SensorNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Check the structural invariants: unique ids, at most one anchor,
    /// every node inside the field, and every link feasible for the child
    /// node's radio.
    pub fn validate(&self, radios: &[RadioTech]) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        let mut anchors = 0;
        for n in &self.nodes {
            if !seen.insert(n.id) {
                return Err(Error::Validation(format!("duplicate node id {}", n.id)));
            }
            if n.role == NodeRole::Anchor {
                anchors += 1;
            }
            if !self.field.contains(&n.position) {
                return Err(Error::OutOfBounds {
                    x_m: n.position.x_m,
                    y_m: n.position.y_m,
                });
            }
        }
        if anchors > 1 {
            return Err(Error::Validation(format!(
                "{anchors} anchor nodes; at most one allowed"
            )));
        }
        for (&child, &parent) in &self.links {
            let c = self
                .node(child)
                .ok_or_else(|| Error::Validation(format!("link from unknown node {child}")))?;
            let p = self
                .node(parent)
                .ok_or_else(|| Error::Validation(format!("link to unknown node {parent}")))?;
            let tech = crate::radio::profile(radios, &c.tech)?;
            let d = c.position.dist(&p.position);
            if !link_feasible(tech, d) {
                return Err(Error::Feasibility {
                    child,
                    parent,
                    distance_m: d,
                    range_m: tech.range_m,
                });
            }
        }
        Ok(())
    }

    /// Deterministic CSV rendering: one row per node, fixed 6-decimal
    /// coordinates, empty parent column for unlinked nodes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,x_m,y_m,role,tech,parent\n");
        for n in &self.nodes {
            let parent = self
                .links
                .get(&n.id)
                .map(|p| p.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{:.6},{:.6},{},{},{}\n",
                n.id, n.position.x_m, n.position.y_m,
                n.role.as_str(),
                n.tech,
                parent
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Io(format!("serializing deployment: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s)
            .map_err(|e| Error::Validation(format!("parsing deployment JSON: {e}")))
    }
}

/// One station at every cell center.
pub fn uniform_layout(spec: &FieldSpec) -> Result<Deployment> {
    let grid = build_grid(spec)?;
    let nodes = grid
        .cells
        .iter()
        .map(|gc| SensorNode {
            id: gc.cell.index,
            position: gc.center,
            role: NodeRole::Station,
            tech: STATION_TECH.to_string(),
        })
        .collect();
    Ok(Deployment {
        field: spec.clone(),
        nodes,
        links: BTreeMap::new(),
        meta: DeploymentMeta {
            algorithm: "uniform".into(),
            seed: 0,
            iterations: 0,
        },
    })
}

/// Distinct Fibonacci values not exceeding `n_cells`, with the duplicate
/// leading 1 collapsed: 1, 2, 3, 5, 8, ...
pub fn fibonacci_cells(n_cells: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut a, mut b) = (1u32, 2u32);
    while a <= n_cells {
        out.push(a);
        let next = a + b;
        a = b;
        b = next;
    }
    out
}

/// One station at the center of each Fibonacci-indexed cell (row-major).
pub fn fibonacci_layout(spec: &FieldSpec) -> Result<Deployment> {
    let grid = build_grid(spec)?;
    let picks = fibonacci_cells(spec.n_cells());
    let nodes = picks
        .iter()
        .map(|&idx| {
            let gc = &grid.cells[(idx - 1) as usize];
            SensorNode {
                id: idx,
                position: gc.center,
                role: NodeRole::Station,
                tech: STATION_TECH.to_string(),
            }
        })
        .collect();
    Ok(Deployment {
        field: spec.clone(),
        nodes,
        links: BTreeMap::new(),
        meta: DeploymentMeta {
            algorithm: "fibonacci".into(),
            seed: 0,
            iterations: 0,
        },
    })
}

/// One anchor at `anchor` plus `n` stations equally spaced on the circle of
/// the given radius, the first at angle `phase` (radians, counterclockwise
/// from east). Stations are linked to the anchor in a star.
pub fn radial_layout(
    spec: &FieldSpec,
    anchor: Point2D,
    n: u32,
    distance: f64,
    phase: f64,
) -> Result<Deployment> {
    if n < 1 {
        return Err(Error::Domain {
            what: "radial node count",
            value: n as f64,
        });
    }
    if !(distance >= 0.0) || !distance.is_finite() {
        return Err(Error::Domain {
            what: "radial distance",
            value: distance,
        });
    }
    spec.validate()?;
    if !spec.contains(&anchor) {
        return Err(Error::OutOfBounds {
            x_m: anchor.x_m,
            y_m: anchor.y_m,
        });
    }
    let mut nodes = vec![SensorNode {
        id: 0,
        position: anchor,
        role: NodeRole::Anchor,
        tech: STATION_TECH.to_string(),
    }];
    let mut links = BTreeMap::new();
    for k in 0..n {
        let theta = phase + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let p = Point2D::new(
            anchor.x_m + distance * theta.cos(),
            anchor.y_m + distance * theta.sin(),
        );
        if !spec.contains(&p) {
            return Err(Error::OutOfBounds { x_m: p.x_m, y_m: p.y_m });
        }
        let id = k + 1;
        nodes.push(SensorNode {
            id,
            position: p,
            role: NodeRole::Station,
            tech: STATION_TECH.to_string(),
        });
        links.insert(id, 0);
    }
    Ok(Deployment {
        field: spec.clone(),
        nodes,
        links,
        meta: DeploymentMeta {
            algorithm: "radial".into(),
            seed: 0,
            iterations: 0,
        },
    })
}

/// Geometric spacing sequence d0, d0·q, d0·q², ... of length `n`.
pub fn sequential_spacing(q: f64, d0: f64, n: u32) -> Result<Vec<f64>> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain { what: "spacing ratio", value: q });
    }
    if !(d0 > 0.0) || !d0.is_finite() {
        return Err(Error::Domain { what: "initial spacing", value: d0 });
    }
    let mut out = Vec::with_capacity(n as usize);
    let mut d = d0;
    for _ in 0..n {
        out.push(d);
        d *= q;
    }
    Ok(out)
}

/// Euclidean distance from a node position to its anchor.
pub fn anchor_distance(node: Point2D, anchor: Point2D) -> f64 {
    node.dist(&anchor)
}

/// Horizontal projection of a slant distance measured at elevation angle
/// `psi` (radians in [-pi/2, pi/2]).
pub fn inclined_projection(d: f64, psi: f64) -> Result<f64> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::Domain { what: "slant distance", value: d });
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    if !(-half_pi..=half_pi).contains(&psi) || !psi.is_finite() {
        return Err(Error::Domain { what: "elevation angle", value: psi });
    }
    Ok(d * psi.cos())
}
