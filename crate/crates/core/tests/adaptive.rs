use lsq_obstacle::problems::{example_lshape_bartels, example_pyramid};
use lsq_obstacle::*;

/// Largest diameter among elements touching the re-entrant corner at the
/// origin, and the global largest diameter.
fn corner_and_global_diameter(mesh: &Mesh) -> (f64, f64) {
    let mut corner = 0.0f64;
    for t in 0..mesh.n_elements() {
        let g = mesh.element_geometry(t);
        if g.corners.iter().any(|p| p[0].hypot(p[1]) < 1e-14) {
            corner = corner.max(g.diameter);
        }
    }
    (corner, mesh.max_diameter())
}

#[test]
fn adaptive_meshes_grade_towards_the_corner() {
    for problem in [example_lshape_bartels(), example_pyramid()] {
        let config = AdaptiveConfig { max_dofs: Some(6000), ..AdaptiveConfig::default() };
        let mut sizes = Vec::new();
        run_adaptive_with(&problem, &config, |state| {
            sizes.push(corner_and_global_diameter(state.mesh));
            Ok(())
        })
        .unwrap();
        let (c0, g0) = sizes[0];
        let (c1, g1) = *sizes.last().unwrap();
        // the corner shrinks by a larger factor than the coarsest element
        assert!(c1 / c0 < g1 / g0, "{}: corner {c0} -> {c1}, global {g0} -> {g1}", problem.name);
        assert!(c1 / g1 < 0.1, "{}: corner/global {}", problem.name, c1 / g1);
    }
}

#[test]
fn records_are_consistent() {
    let problem = example_pyramid();
    let config = AdaptiveConfig { max_dofs: Some(3000), ..AdaptiveConfig::default() };
    let records = run_adaptive(&problem, &config).unwrap();
    assert!(records.len() > 3);
    for w in records.windows(2) {
        assert!(w[1].n_elements > w[0].n_elements);
    }
    for r in &records {
        let split = r.eta * r.eta + r.est_contact * r.est_contact + r.osc_f * r.osc_f;
        assert!((r.est * r.est - split).abs() <= 1e-12 * r.est * r.est);
        assert!(r.kkt_residual <= r.kkt_tolerance);
    }
}

#[test]
fn identical_runs_are_reproducible() {
    let problem = example_lshape_bartels();
    let config = AdaptiveConfig { max_levels: Some(6), ..AdaptiveConfig::default() };
    let a = run_adaptive(&problem, &config).unwrap();
    let b = run_adaptive(&problem, &config).unwrap();
    assert_eq!(a, b);
}
