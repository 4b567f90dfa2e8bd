//! Deterministic SVG rendering: deployment maps (field boundary, grid,
//! role-colored nodes with sensing circles, link lines) and small bar
//! charts for comparison summaries. Output depends only on the input —
//! fixed element order, fixed 3-decimal coordinate formatting, no
//! timestamps — so identical inputs produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::field::FieldSpec;
use crate::placement::{Deployment, NodeRole};

/// Pixels of padding around the drawn field.
const MARGIN_PX: f64 = 24.0;

fn role_color(role: NodeRole) -> &'static str {
    match role {
        NodeRole::Anchor => "#d62728",
        NodeRole::Station => "#1f77b4",
        NodeRole::Normal => "#2ca02c",
        NodeRole::Extra => "#9467bd",
    }
}

fn marker_radius(role: NodeRole) -> f64 {
    match role {
        NodeRole::Anchor => 5.0,
        NodeRole::Station => 4.0,
        NodeRole::Normal | NodeRole::Extra => 2.5,
    }
}

struct Mapper {
    height_m: f64,
}

impl Mapper {
    fn x(&self, x_m: f64) -> f64 {
        MARGIN_PX + x_m
    }
    // SVG y grows downward; field y grows upward.
    fn y(&self, y_m: f64) -> f64 {
        MARGIN_PX + (self.height_m - y_m)
    }
}

fn push_grid(out: &mut String, field: &FieldSpec, map: &Mapper) {
    let _ = write!(
        out,
        r##"<rect class="field" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#444444" stroke-width="1.5"/>"##,
        map.x(0.0),
        map.y(field.height_m),
        field.width_m,
        field.height_m
    );
    out.push('\n');
    let mut col = 1u32;
    while (col as f64) * field.cell_edge_m < field.width_m {
        let x = map.x(col as f64 * field.cell_edge_m);
        let _ = write!(
            out,
            r##"<line class="grid" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#cccccc" stroke-width="0.5"/>"##,
            x,
            map.y(field.height_m),
            x,
            map.y(0.0)
        );
        out.push('\n');
        col += 1;
    }
    let mut row = 1u32;
    while (row as f64) * field.cell_edge_m < field.height_m {
        let y = map.y(row as f64 * field.cell_edge_m);
        let _ = write!(
            out,
            r##"<line class="grid" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#cccccc" stroke-width="0.5"/>"##,
            map.x(0.0),
            y,
            map.x(field.width_m),
            y
        );
        out.push('\n');
    row += 1;
    }
}

/// Render a deployment map. `ranges` gives the sensing-circle radius drawn
/// around each role; roles absent from the map get a marker only.
pub fn deployment_svg(dep: &Deployment, ranges: &BTreeMap<NodeRole, f64>) -> String {
    let field = &dep.field;
    let map = Mapper { height_m: field.height_m };
    let width = field.width_m + 2.0 * MARGIN_PX;
    let height = field.height_m + 2.0 * MARGIN_PX;
    let mut out = String::new();
    let _ = write!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.3} {height:.3}" width="{width:.3}" height="{height:.3}">"##
    );
    out.push('\n');
    let _ = write!(
        out,
        r##"<rect x="0" y="0" width="{width:.3}" height="{height:.3}" fill="#ffffff"/>"##
    );
    out.push('\n');
    push_grid(&mut out, field, &map);

    let mut nodes: Vec<_> = dep.nodes.iter().collect();
    nodes.sort_by_key(|n| n.id);

    // Sensing circles first, then links, then markers on top.
    for n in &nodes {
        if let Some(&r) = ranges.get(&n.role) {
            let _ = write!(
                out,
                r##"<circle class="range {}" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="{}" fill-opacity="0.08" stroke="{}" stroke-width="0.6" stroke-opacity="0.5"/>"##,
                n.role.as_str(),
                map.x(n.position.x_m),
                map.y(n.position.y_m),
                r,
                role_color(n.role),
                role_color(n.role)
            );
            out.push('\n');
        }
    }
    for (child, parent) in &dep.links {
        if let (Some(c), Some(p)) = (dep.node(*child), dep.node(*parent)) {
            let _ = write!(
                out,
                r##"<line class="link" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#888888" stroke-width="0.7"/>"##,
                map.x(c.position.x_m),
                map.y(c.position.y_m),
                map.x(p.position.x_m),
                map.y(p.position.y_m)
            );
            out.push('\n');
        }
    }
    for n in &nodes {
        let _ = write!(
            out,
            r##"<circle class="node {}" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="{}"><title>{} {} ({:.3}, {:.3})</title></circle>"##,
            n.role.as_str(),
            map.x(n.position.x_m),
            map.y(n.position.y_m),
            marker_radius(n.role),
            role_color(n.role),
            n.role.as_str(),
            n.id,
            n.position.x_m,
            n.position.y_m
        );
        out.push('\n');
    }

    // Legend: one entry per role present, in role order.
    let mut present: Vec<NodeRole> = Vec::new();
    for n in &nodes {
        if !present.contains(&n.role) {
            present.push(n.role);
        }
    }
    present.sort();
    for (k, role) in present.iter().enumerate() {
        let y = MARGIN_PX + 14.0 * k as f64;
        let _ = write!(
            out,
            r##"<circle cx="{:.3}" cy="{:.3}" r="4" fill="{}"/><text x="{:.3}" y="{:.3}" font-family="monospace" font-size="10">{}</text>"##,
            width - 70.0,
            y,
            role_color(*role),
            width - 62.0,
            y + 3.5,
            role.as_str()
        );
        out.push('\n');
    }
    out.push_str("</svg>\n");
    out
}

/// Render a labeled bar chart (used for comparison summaries). Bars are
/// drawn in input order with 3-decimal value labels.
pub fn bar_chart_svg(title: &str, rows: &[(String, f64)]) -> String {
    let bar_w = 46.0;
    let gap = 18.0;
    let chart_h = 160.0;
    let base_y = 40.0 + chart_h;
    let width = (rows.len() as f64) * (bar_w + gap) + gap + 40.0;
    let height = base_y + 50.0;
    let max = rows
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::EPSILON, f64::max);

    let mut out = String::new();
    let _ = write!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.3} {height:.3}" width="{width:.3}" height="{height:.3}">"##
    );
    out.push('\n');
    let _ = write!(
        out,
        r##"<rect x="0" y="0" width="{width:.3}" height="{height:.3}" fill="#ffffff"/>"##
    );
    out.push('\n');
    let _ = write!(
        out,
        r##"<text x="{:.3}" y="22" font-family="monospace" font-size="13" text-anchor="middle">{title}</text>"##,
        width / 2.0
    );
    out.push('\n');
    let _ = write!(
        out,
        r##"<line x1="30" y1="{base_y:.3}" x2="{:.3}" y2="{base_y:.3}" stroke="#444444" stroke-width="1"/>"##,
        width - 10.0
    );
    out.push('\n');
    for (k, (label, value)) in rows.iter().enumerate() {
        let x = 40.0 + k as f64 * (bar_w + gap);
        let h = if max > 0.0 { (value / max) * chart_h } else { 0.0 };
        let _ = write!(
            out,
            r##"<rect class="bar" x="{x:.3}" y="{:.3}" width="{bar_w:.3}" height="{h:.3}" fill="#1f77b4"/>"##,
            base_y - h
        );
        out.push('\n');
        let _ = write!(
            out,
            r##"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="10" text-anchor="middle">{value:.3}</text>"##,
            x + bar_w / 2.0,
            base_y - h - 4.0
        );
        out.push('\n');
        let _ = write!(
            out,
            r##"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="10" text-anchor="middle">{label}</text>"##,
            x + bar_w / 2.0,
            base_y + 14.0
        );
        out.push('\n');
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::gdl::{optimize, random_initial, GdlConfig};
    use crate::placement::DeploymentMeta;
    use crate::radio::default_profiles;

    fn count(haystack: &str, needle: &str) -> usize {
        haystack.matches(needle).count()
    }

    #[test]
    fn empty_deployment_draws_boundary_and_grid_only() {
        let field = FieldSpec::default();
        let dep = Deployment {
            field,
            nodes: vec![],
            links: Default::default(),
            meta: DeploymentMeta { algorithm: "empty".into(), seed: 0, iterations: 0 },
        };
        let svg = deployment_svg(&dep, &BTreeMap::new());
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(count(&svg, r##"class="field""##), 1);
        // 300 m field with 50 m cells: five interior lines each way.
        assert_eq!(count(&svg, r##"class="grid""##), 10);
        assert_eq!(count(&svg, r##"class="node"##), 0);
        assert_eq!(count(&svg, r##"class="link""##), 0);
    }

    #[test]
    fn hybrid_ring_draws_markers_links_and_circles() {
        let field = FieldSpec::default();
        let cfg = GdlConfig::default();
        let radio = default_profiles()
            .into_iter()
            .find(|r| r.name == "WiFi")
            .unwrap();
        let initial = random_initial(&field, &cfg).unwrap();
        let (dep, _) = optimize(&initial, &cfg, &radio).unwrap();
        let mut ranges = BTreeMap::new();
        ranges.insert(NodeRole::Anchor, 40.0);
        ranges.insert(NodeRole::Station, 40.0);
        let svg = deployment_svg(&dep, &ranges);
        assert_eq!(count(&svg, r##"class="node anchor""##), 1);
        assert_eq!(count(&svg, r##"class="node station""##), 8);
        assert_eq!(count(&svg, r##"class="link""##), 8);
        assert_eq!(count(&svg, r##"class="range"##), 9);
    }

    #[test]
    fn byte_identical_for_identical_input() {
        let field = FieldSpec::default();
        let cfg = GdlConfig::default();
        let radio = default_profiles()
            .into_iter()
            .find(|r| r.name == "WiFi")
            .unwrap();
        let initial = random_initial(&field, &cfg).unwrap();
        let (dep, _) = optimize(&initial, &cfg, &radio).unwrap();
        let mut ranges = BTreeMap::new();
        ranges.insert(NodeRole::Station, 40.0);
        let a = deployment_svg(&dep, &ranges);
        let b = deployment_svg(&dep, &ranges);
        assert_eq!(a.into_bytes(), b.into_bytes());
    }

    #[test]
    fn bar_chart_renders_all_rows() {
        let rows = vec![
            ("uniform".to_string(), 1.0),
            ("fibonacci".to_string(), 0.349),
            ("hybrid".to_string(), 0.52),
        ];
        let svg = bar_chart_svg("coverage by strategy", &rows);
        assert_eq!(count(&svg, r##"class="bar""##), 3);
        assert!(svg.contains(">uniform<"));
        assert!(svg.contains(">0.349<"));
        assert_eq!(bar_chart_svg("coverage by strategy", &rows), svg);
    }
}
