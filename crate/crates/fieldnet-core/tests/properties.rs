//! Randomized property tests for the documented invariants of the geometry,
//! scoring, ranking, and optimization APIs.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use proptest::prelude::*;

use fieldnet_core::config::ExperimentConfig;
use fieldnet_core::extras::{assign_to_stations, force_step, ExtraConfig, ExtraState};
use fieldnet_core::fahp::{fuzzy_weights, FuzzyMatrix};
use fieldnet_core::field::{build_grid, FieldSpec, Point2D, TargetSet};
use fieldnet_core::gdl::{slack_vector, GdlConfig};
use fieldnet_core::metrics::{
    coverage_raster_discs, min_nodes_exact, min_nodes_exhaustive, pairwise_overlap,
};
use fieldnet_core::placement::{fibonacci_cells, fibonacci_layout, uniform_layout, Deployment};
use fieldnet_core::radio::{default_profiles, link_delay, link_power};
use fieldnet_core::report::build_hybrid;

/// Small valid fields: 1..=6 cells per side, a few cell sizes.
fn field_strategy() -> impl Strategy<Value = FieldSpec> {
    (
        1u32..=6,
        1u32..=6,
        prop_oneof![Just(10.0f64), Just(25.0), Just(50.0)],
    )
        .prop_map(|(cols, rows, edge)| FieldSpec {
            width_m: cols as f64 * edge,
            height_m: rows as f64 * edge,
            cell_edge_m: edge,
            target_spacing_m: edge / 2.0,
        })
}

fn point_in(field: FieldSpec) -> impl Strategy<Value = Point2D> {
    (0.0..=field.width_m, 0.0..=field.height_m).prop_map(|(x, y)| Point2D::new(x, y))
}

fn field_and_points(
    max_points: usize,
) -> impl Strategy<Value = (FieldSpec, Vec<Point2D>, Point2D)> {
    field_strategy().prop_flat_map(move |f| {
        (
            Just(f),
            prop::collection::vec(point_in(f), 0..max_points),
            point_in(f),
        )
    })
}

proptest! {
    // Adding a sensing disc never decreases raster coverage.
    #[test]
    fn coverage_monotone_under_node_addition(
        (field, pts, extra) in field_and_points(6),
        r in 5.0f64..=80.0,
    ) {
        let discs: Vec<_> = pts.iter().map(|&p| (p, r)).collect();
        let base = coverage_raster_discs(&field, &discs, 5.0).unwrap().fraction;
        let mut more = discs.clone();
        more.push((extra, r));
        let grown = coverage_raster_discs(&field, &more, 5.0).unwrap().fraction;
        prop_assert!(grown >= base);
    }

    // Zero radius covers nothing; a radius spanning the whole diagonal
    // covers everything.
    #[test]
    fn coverage_extremes(
        (field, mut pts, extra) in field_and_points(4),
    ) {
        // Re-snap to integer coordinates so r = 0 cannot hit pixel centers.
        pts.push(extra);
        let pts: Vec<Point2D> = pts
            .iter()
            .map(|p| Point2D::new(p.x_m.floor(), p.y_m.floor()))
            .collect();
        let zero: Vec<_> = pts.iter().map(|&p| (p, 0.0)).collect();
        prop_assert_eq!(coverage_raster_discs(&field, &zero, 1.0).unwrap().fraction, 0.0);
        let diag = (field.width_m.powi(2) + field.height_m.powi(2)).sqrt();
        let all: Vec<_> = pts.iter().map(|&p| (p, diag)).collect();
        prop_assert_eq!(coverage_raster_discs(&field, &all, 1.0).unwrap().fraction, 1.0);
    }

    // Disc overlap is symmetric in its endpoints and non-increasing in the
    // separation distance; touching or separated discs share nothing.
    #[test]
    fn overlap_symmetric_and_monotone(
        ax in -100.0f64..100.0,
        ay in -100.0f64..100.0,
        bx in -100.0f64..100.0,
        by in -100.0f64..100.0,
        d1 in 0.0f64..=200.0,
        d2 in 0.0f64..=200.0,
        r in 1.0f64..=60.0,
    ) {
        let a = Point2D::new(ax, ay);
        let b = Point2D::new(bx, by);
        let ab = pairwise_overlap(a, b, r).unwrap();
        let ba = pairwise_overlap(b, a, r).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);

        let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let o = Point2D::new(0.0, 0.0);
        let on = pairwise_overlap(o, Point2D::new(near, 0.0), r).unwrap();
        let of = pairwise_overlap(o, Point2D::new(far, 0.0), r).unwrap();
        prop_assert!(on + 1e-12 >= of);
        // Coincident discs: 1.0 up to the acos/sqrt rounding of the closed form.
        prop_assert!((pairwise_overlap(o, o, r).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(pairwise_overlap(o, Point2D::new(2.0 * r, 0.0), r).unwrap(), 0.0);
    }

    // The cell subset is exactly the Fibonacci numbers that fit: strictly
    // increasing, deduplicated, bounded by the cell count, and maximal.
    #[test]
    fn fibonacci_cells_members_and_maximality(n in 1u32..=10_000) {
        let cells = fibonacci_cells(n);
        let mut fibs = vec![1u32, 2];
        while *fibs.last().unwrap() <= n {
            let k = fibs.len();
            fibs.push(fibs[k - 1] + fibs[k - 2]);
        }
        prop_assert!(cells.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(cells.iter().all(|c| *c <= n && fibs.contains(c)));
        for f in fibs.iter().filter(|&&f| f <= n) {
            prop_assert!(cells.contains(f), "missing Fibonacci cell {f} for n {n}");
        }
    }

    // The uniform layout fills every cell center exactly once; the Fibonacci
    // layout is the uniform layout restricted to the Fibonacci cell subset.
    #[test]
    fn layouts_sit_on_distinct_cell_centers(field in field_strategy()) {
        let uni = uniform_layout(&field).unwrap();
        prop_assert_eq!(uni.nodes.len() as u32, field.n_cells());
        let mut seen = std::collections::BTreeSet::new();
        for node in &uni.nodes {
            prop_assert!(field.contains(&node.position));
            for c in [node.position.x_m, node.position.y_m] {
                let offset = c / field.cell_edge_m - 0.5;
                prop_assert!((offset - offset.round()).abs() < 1e-9, "off-center at {c}");
            }
            seen.insert((node.position.x_m.to_bits(), node.position.y_m.to_bits()));
        }
        prop_assert_eq!(seen.len(), uni.nodes.len());

        let fib = fibonacci_layout(&field).unwrap();
        prop_assert_eq!(fib.nodes.len(), fibonacci_cells(field.n_cells()).len());
        for node in &fib.nodes {
            prop_assert!(
                uni.nodes.iter().any(|u| u.position == node.position),
                "fibonacci node off the uniform lattice"
            );
        }
    }

    // Weights from a ratio-consistent judgment matrix are positive, sum to
    // one, and reproduce the judgment ratios.
    #[test]
    fn consistent_matrix_weights_reproduce_ratios(
        v in prop::collection::vec(0.1f64..10.0, 2..=6),
        spread in 1.0f64..=2.0,
    ) {
        let m = FuzzyMatrix::from_priority_vector(&v, spread).unwrap();
        let w = fuzzy_weights(&m).unwrap();
        prop_assert!(w.iter().all(|&x| x > 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for i in 0..v.len() {
            for j in 0..v.len() {
                let expect = v[i] / v[j];
                let got = w[i] / w[j];
                prop_assert!(
                    (got - expect).abs() <= 1e-6 * expect.max(1.0),
                    "ratio {i}/{j}: got {got}, judgment {expect}"
                );
            }
        }
    }

    // Identity judgments of any size give exactly uniform weights.
    #[test]
    fn identity_judgments_weigh_uniformly(n in 1usize..=8) {
        let w = fuzzy_weights(&FuzzyMatrix::identity(n)).unwrap();
        prop_assert!(w.iter().all(|&x| x == 1.0 / n as f64));
    }

    // Link cost models are monotone in distance for every shipped radio.
    #[test]
    fn link_models_monotone_in_distance(d1 in 0.0f64..500.0, d2 in 0.0f64..500.0) {
        let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        for tech in &default_profiles() {
            prop_assert!(link_power(tech, near).unwrap() <= link_power(tech, far).unwrap());
            prop_assert!(link_delay(tech, near).unwrap() <= link_delay(tech, far).unwrap());
        }
    }

    // Clamping pulls any point into the field, margin included.
    #[test]
    fn clamp_with_margin_lands_inside(
        field in field_strategy(),
        x in -1000.0f64..1000.0,
        y in -1000.0f64..1000.0,
        margin in 0.0f64..=4.0,
    ) {
        let p = field.clamp_with_margin(Point2D::new(x, y), margin);
        prop_assert!(field.contains(&p));
        prop_assert!(p.x_m >= margin && p.x_m <= field.width_m - margin);
        prop_assert!(p.y_m >= margin && p.y_m <= field.height_m - margin);
    }

    // Deployments survive a JSON round trip bit-for-bit.
    #[test]
    fn deployment_json_roundtrip(field in field_strategy()) {
        for dep in [uniform_layout(&field).unwrap(), fibonacci_layout(&field).unwrap()] {
            let back = Deployment::from_json(&dep.to_json().unwrap()).unwrap();
            prop_assert_eq!(back, dep);
        }
    }

    // Experiment configs survive a JSON round trip with float-exact fields.
    #[test]
    fn config_json_roundtrip(
        r_sense in 10.0f64..=80.0,
        resolution in prop_oneof![Just(0.5f64), Just(1.0), Just(2.0)],
        seeds in prop::collection::vec(0u64..1_000_000, 1..=5),
    ) {
        let mut cfg = ExperimentConfig::default();
        cfg.metrics.r_sense = r_sense;
        cfg.metrics.resolution = resolution;
        cfg.seeds = seeds;
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    // The pruned exact solver agrees with the exhaustive sweep on every
    // grid up to 3x3, across random target sets, radii, and thresholds.
    #[test]
    fn exact_solver_matches_exhaustive(
        cols in 1u32..=3,
        rows in 1u32..=3,
        raw_targets in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..6),
        r_mult in 0.6f64..=3.0,
        threshold in 1u32..=2,
    ) {
        let edge = 50.0;
        let field = FieldSpec {
            width_m: cols as f64 * edge,
            height_m: rows as f64 * edge,
            cell_edge_m: edge,
            target_spacing_m: 10.0,
        };
        let grid = build_grid(&field).unwrap();
        let targets = TargetSet {
            positions: raw_targets
                .iter()
                .map(|(fx, fy)| Point2D::new(fx * field.width_m, fy * field.height_m))
                .collect(),
            per_cell_counts: BTreeMap::new(),
        };
        let r = r_mult * edge;
        let pruned = min_nodes_exact(&grid, r, &targets, threshold as f64);
        let swept = min_nodes_exhaustive(&grid, r, &targets, threshold as f64);
        match (pruned, swept) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "solver disagreement: {a:?} vs {b:?}"),
        }
    }

    // Constraint slacks come in six blocks of one entry per station.
    #[test]
    fn slack_vector_has_six_blocks((field, pts, _) in field_and_points(6)) {
        let cfg = GdlConfig::default();
        let slacks = slack_vector(&pts, field.center(), &field, &cfg);
        prop_assert_eq!(slacks.len(), 6 * pts.len());
    }

    // One force step from any start keeps extras inside the field and the
    // connectivity multipliers non-negative.
    #[test]
    fn force_step_stays_in_field_and_nonnegative(
        raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..12),
        lambda0 in 0.0f64..=5.0,
    ) {
        let backbone = default_backbone();
        let field = backbone.field;
        let cfg = ExtraConfig::default();
        let positions: Vec<Point2D> = raw
            .iter()
            .map(|(fx, fy)| Point2D::new(fx * field.width_m, fy * field.height_m))
            .collect();
        let (assignments, _) = assign_to_stations(&positions, backbone, cfg.bt_range).unwrap();
        let state = ExtraState {
            lambda_conn: vec![lambda0; positions.len()],
            positions,
            assignments,
        };
        let next = force_step(&state, &cfg, &field, backbone).unwrap();
        for p in &next.positions {
            prop_assert!(field.contains(p));
        }
        prop_assert!(next.lambda_conn.iter().all(|&l| l >= 0.0));
    }
}

/// Shared converged backbone so the force-step property does not rerun the
/// ring optimizer per case.
fn default_backbone() -> &'static Deployment {
    static DEP: OnceLock<Deployment> = OnceLock::new();
    DEP.get_or_init(|| {
        build_hybrid(&ExperimentConfig::default(), GdlConfig::default().seed)
            .unwrap()
            .0
    })
}
