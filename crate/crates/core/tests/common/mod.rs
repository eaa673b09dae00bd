#![allow(dead_code)]

use std::sync::Arc;

use lsq_obstacle::mesh::Domain;
use lsq_obstacle::problems::{example_lshape_bartels, example_pyramid, example_smooth, ObstacleTraits};
use lsq_obstacle::*;
use nalgebra::{DMatrix, DVector};

/// Solution of the complementarity problem by trying every active set.
pub struct Enumerated {
    pub x: Vec<f64>,
    /// Number of active sets passing the KKT check.
    pub feasible: usize,
}

/// Exhaustive active-set enumeration with dense LU solves. Returns the
/// KKT-feasible candidate; panics if there is none or if two feasible
/// candidates disagree.
pub fn enumerate_active_sets(a: &SparseOperator, f: &[f64], c: &ConstraintSet) -> Enumerated {
    let n = a.dim();
    let m = c.len();
    assert!(m <= 16, "too many constraints for enumeration");
    let dense = a.to_dense();
    let scale = 1.0 + f.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let tol = 1e-11 * scale;
    let mut best: Option<Vec<f64>> = None;
    let mut feasible = 0;
    for mask in 0u32..(1 << m) {
        let mut fixed = vec![None; n];
        for k in 0..m {
            if mask & (1 << k) != 0 {
                fixed[c.dofs[k]] = Some(c.bounds[k]);
            }
        }
        let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
        let mut x: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        let sub = DMatrix::from_fn(free.len(), free.len(), |i, j| dense[free[i]][free[j]]);
        let rhs = DVector::from_fn(free.len(), |i, _| {
            let r = free[i];
            f[r] - (0..n).filter(|&j| fixed[j].is_some()).map(|j| dense[r][j] * x[j]).sum::<f64>()
        });
        let Some(sol) = sub.lu().solve(&rhs) else { continue };
        for (k, &i) in free.iter().enumerate() {
            x[i] = sol[k];
        }
        let ax = a.matvec(&x);
        let ok = (0..m).all(|k| {
            let d = c.dofs[k];
            if mask & (1 << k) != 0 {
                ax[d] - f[d] >= -tol
            } else {
                x[d] - c.bounds[k] >= -tol
            }
        });
        if ok {
            feasible += 1;
            if let Some(b) = &best {
                let diff = b.iter().zip(&x).fold(0.0f64, |s, (p, q)| s.max((p - q).abs()));
                assert!(diff < 1e-9, "two feasible active sets with different solutions ({diff:e})");
            } else {
                best = Some(x);
            }
        }
    }
    Enumerated { x: best.expect("no KKT-feasible active set"), feasible }
}

pub const ADMISSIBLE: [(FormKind, SetKind); 5] = [
    (FormKind::A, SetKind::Ks),
    (FormKind::B, SetKind::K0),
    (FormKind::B, SetKind::Ks),
    (FormKind::C, SetKind::K1),
    (FormKind::C, SetKind::Ks),
];

/// Smooth example with the obstacle lowered by `0.05`, so it is negative on
/// the boundary. Only admissible with form `B`.
pub fn lowered_obstacle() -> ProblemSpec {
    let mut p = example_smooth();
    let g = p.g.clone();
    p.g = Arc::new(move |x| g(x) - 0.05);
    p.exact = None;
    p.name = "lowered".into();
    p.obstacle = ObstacleTraits { continuous: true, vanishes_on_boundary: false, nonpositive_on_boundary: true };
    p
}

/// Small meshes for the enumeration oracle, paired with problem data.
pub fn oracle_cases() -> Vec<(String, ProblemSpec, Mesh)> {
    let mut out = Vec::new();
    let mut push = |label: &str, p: ProblemSpec, m: Mesh| out.push((label.to_string(), p, m));
    let sq1 = Mesh::create_structured(Domain::UnitSquare, 1).unwrap();
    let sq2 = Mesh::create_structured(Domain::UnitSquare, 2).unwrap();
    let sq3 = Mesh::create_structured(Domain::UnitSquare, 3).unwrap();
    push("unit square n=1", example_smooth(), sq1.clone());
    push("unit square n=1 + bisection", example_smooth(), sq1.refine_nvb(&[0]));
    push("unit square n=2", example_smooth(), sq2.clone());
    push("unit square n=2 + bisection", example_smooth(), sq2.refine_nvb(&[3]));
    push("unit square n=3", example_smooth(), sq3.clone());
    push("unit square n=2 lowered", lowered_obstacle(), sq2.clone());
    push("unit square n=3 lowered", lowered_obstacle(), sq3);
    push("small L n=1", example_pyramid(), Mesh::create_structured(Domain::LShapeSmall, 1).unwrap());
    push(
        "small L n=1 + bisection",
        example_pyramid(),
        Mesh::create_structured(Domain::LShapeSmall, 1).unwrap().refine_nvb(&[2]),
    );
    push("small L n=2", example_pyramid(), Mesh::create_structured(Domain::LShapeSmall, 2).unwrap());
    push("large L n=1", example_lshape_bartels(), Mesh::create_structured(Domain::LShapeBartels, 1).unwrap());
    push("large L n=2", example_lshape_bartels(), Mesh::create_structured(Domain::LShapeBartels, 2).unwrap());
    out
}

/// Outcome of one oracle comparison.
pub struct OracleCheck {
    pub label: String,
    pub constraints: usize,
    pub difference: f64,
    pub kkt_ok: bool,
}

/// Compares the active-set solver with enumeration on every case and
/// admissible pair with at most 12 constraints.
pub fn run_oracle() -> Vec<OracleCheck> {
    let mut checks = Vec::new();
    for (label, problem, mesh) in oracle_cases() {
        let mesh = Arc::new(mesh);
        for (form, set) in ADMISSIBLE {
            if validate_config(form, set, problem.obstacle).is_err() {
                continue;
            }
            let dofs = DofMap::new(&mesh);
            let n_constraints = match set {
                SetKind::Ks => dofs.n_u() + dofs.n_lambda(),
                SetKind::K0 => dofs.n_u(),
                SetKind::K1 => dofs.n_lambda(),
            };
            if n_constraints == 0 || n_constraints > 12 {
                continue;
            }
            let config = FormConfig::new(form, problem.default_beta());
            let s = solve_problem(mesh.clone(), &problem, config, set, &SolverOptions::default())
                .unwrap_or_else(|e| panic!("{label} {form}/{set}: {e}"));
            let reference = enumerate_active_sets(&s.operator, &s.load, &s.constraints);
            let difference = reference
                .x
                .iter()
                .zip(&s.report.coefficients)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            checks.push(OracleCheck {
                label: format!("{label} {form}/{set}"),
                constraints: n_constraints,
                difference,
                kkt_ok: s.report.kkt_residual <= s.report.kkt_tolerance,
            });
        }
    }
    checks
}

/// Least-squares rate over the last `tail` entries.
pub fn tail_rate(n: &[f64], v: &[f64], tail: usize) -> f64 {
    let k = n.len();
    lsq_obstacle::report::fit_rate(&n[k - tail..], &v[k - tail..]).unwrap()
}

/// Linear interpolation of `ln v` in `ln n`.
pub fn loglog_interpolate(n: &[f64], v: &[f64], at: f64) -> Option<f64> {
    let i = n.windows(2).position(|w| w[0] <= at && at <= w[1])?;
    let t = (at.ln() - n[i].ln()) / (n[i + 1].ln() - n[i].ln());
    Some((v[i].ln() * (1.0 - t) + v[i + 1].ln() * t).exp())
}
