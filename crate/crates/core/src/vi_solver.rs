//! Discrete variational inequalities over the convex sets `Ks`, `K0`, `K1`
//! solved by a primal-dual active-set iteration.
//!
//! The constraints are simple lower bounds `x_j >= c_j` on a subset of the
//! dofs. The complementarity system reads
//!
//! ```text
//! A x - F = B^T mu,   mu >= 0,   B x - c >= 0,   mu . (B x - c) = 0
//! ```
//!
//! where `B` selects the constrained dofs.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::assembly::{assemble_form, assemble_load, FormConfig, FormKind};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::problems::{ObstacleTraits, ProblemSpec};
use crate::spaces::{DofMap, FirstOrderSolution};
use crate::sparse::SparseOperator;

/// Which discrete convex set is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetKind {
    /// `u_h >= g` at interior vertices and `lambda_h >= 0`.
    Ks,
    /// `u_h >= g` at interior vertices only.
    K0,
    /// `lambda_h >= 0` only.
    K1,
}

impl SetKind {
    pub const ALL: [SetKind; 3] = [SetKind::Ks, SetKind::K0, SetKind::K1];

    fn bounds_u(self) -> bool {
        matches!(self, SetKind::Ks | SetKind::K0)
    }

    fn bounds_lambda(self) -> bool {
        matches!(self, SetKind::Ks | SetKind::K1)
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetKind::Ks => "Ks",
            SetKind::K0 => "K0",
            SetKind::K1 => "K1",
        })
    }
}

impl FromStr for SetKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "Ks" | "ks" | "KS" => Ok(SetKind::Ks),
            "K0" | "k0" => Ok(SetKind::K0),
            "K1" | "k1" => Ok(SetKind::K1),
            _ => Err(format!("unknown convex set `{s}` (expected Ks, K0 or K1)")),
        }
    }
}

/// Why a (form, set, obstacle) combination is not admissible.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error(
        "form {form} cannot be combined with {set}; admissible pairs are \
         (A, Ks), (B, K0), (B, Ks), (C, K1), (C, Ks)"
    )]
    UnsupportedPair { form: FormKind, set: SetKind },

    #[error("form {form} with {set} needs a continuous obstacle (nodal constraints)")]
    DiscontinuousObstacle { form: FormKind, set: SetKind },

    #[error("form {form} with {set} needs an obstacle vanishing on the boundary")]
    ObstacleNotVanishing { form: FormKind, set: SetKind },

    #[error("form {form} with {set} needs an obstacle that is nonpositive on the boundary")]
    ObstaclePositiveOnBoundary { form: FormKind, set: SetKind },
}

/// Accepts exactly the admissible combinations:
///
/// | form | set     | obstacle                          |
/// |------|---------|-----------------------------------|
/// | A    | Ks      | continuous, zero on the boundary  |
/// | B    | K0, Ks  | continuous, `<= 0` on the boundary |
/// | C    | K1      | zero on the boundary              |
/// | C    | Ks      | continuous, zero on the boundary  |
pub fn validate_config(
    form: FormKind,
    set: SetKind,
    obstacle: ObstacleTraits,
) -> std::result::Result<(), Rejection> {
    use FormKind::*;
    use SetKind::*;
    let (needs_continuous, needs_vanishing, needs_nonpositive) = match (form, set) {
        (A, Ks) | (C, Ks) => (true, true, false),
        (B, K0) | (B, Ks) => (true, false, true),
        (C, K1) => (false, true, false),
        _ => return Err(Rejection::UnsupportedPair { form, set }),
    };
    if needs_continuous && !obstacle.continuous {
        return Err(Rejection::DiscontinuousObstacle { form, set });
    }
    if needs_vanishing && !obstacle.vanishes_on_boundary {
        return Err(Rejection::ObstacleNotVanishing { form, set });
    }
    if needs_nonpositive && !(obstacle.nonpositive_on_boundary || obstacle.vanishes_on_boundary) {
        return Err(Rejection::ObstaclePositiveOnBoundary { form, set });
    }
    Ok(())
}

/// Lower bounds `x[dofs[k]] >= bounds[k]`, sorted by dof.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub kind: SetKind,
    pub dofs: Vec<usize>,
    pub bounds: Vec<f64>,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    /// Bounds on an explicit list of dofs.
    pub fn from_pairs(kind: SetKind, mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        pairs.dedup_by_key(|p| p.0);
        let (dofs, bounds) = pairs.into_iter().unzip();
        Self { kind, dofs, bounds }
    }
}

/// Obstacle values at interior vertices and/or zero bounds on the
/// multiplier. Boundary vertices carry no `u` dof, so their constraints are
/// dropped.
pub fn build_constraints(
    mesh: &Mesh,
    dofs: &DofMap,
    kind: SetKind,
    g: impl Fn(Point) -> f64,
) -> ConstraintSet {
    let mut out = ConstraintSet { kind, dofs: Vec::new(), bounds: Vec::new() };
    if kind.bounds_u() {
        for d in 0..dofs.n_u() {
            out.dofs.push(d);
            out.bounds.push(g(mesh.vertices()[dofs.u_vertex(d)]));
        }
    }
    if kind.bounds_lambda() {
        for t in 0..dofs.n_lambda() {
            out.dofs.push(dofs.lambda_dof(t));
            out.bounds.push(0.0);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Relative KKT tolerance; the absolute one is `tol * (1 + |F|_inf)`.
    pub tol: f64,
    pub c_pdas: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: 100, tol: 1e-9, c_pdas: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VISolveReport {
    pub coefficients: Vec<f64>,
    /// One multiplier per constraint, in constraint order.
    pub multipliers: Vec<f64>,
    pub iterations: usize,
    pub active_set_size: usize,
    pub kkt_residual: f64,
    /// `tol * (1 + |F|_inf)`.
    pub kkt_tolerance: f64,
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `max(|A x - F - B^T mu|_inf, |min(mu, B x - c)|_inf)`
pub fn kkt_residual(
    operator: &SparseOperator,
    load: &[f64],
    constraints: &ConstraintSet,
    x: &[f64],
    multipliers: &[f64],
) -> f64 {
    let mut r: Vec<f64> = operator.matvec(x).iter().zip(load).map(|(a, f)| a - f).collect();
    let mut comp = 0.0f64;
    for (k, &d) in constraints.dofs.iter().enumerate() {
        r[d] -= multipliers[k];
        comp = comp.max(multipliers[k].min(x[d] - constraints.bounds[k]).abs());
    }
    max_abs(r).max(comp)
}

/// Primal-dual active-set iteration started from the empty active set.
///
/// Each step fixes the active dofs at their bounds, solves the remaining
/// equations by sparse LU, reads the multipliers off the residual and
/// updates the active set by `mu + c (c - x) > 0`, with a dead band of the
/// KKT tolerance around zero. A repeated active set is reported as
/// non-convergence.
pub fn solve_vi(
    operator: &SparseOperator,
    load: &[f64],
    constraints: &ConstraintSet,
    opts: &SolverOptions,
) -> Result<VISolveReport> {
    let n = operator.dim();
    if load.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: load.len() });
    }
    if constraints.dofs.iter().any(|&d| d >= n) {
        return Err(Error::DimensionMismatch { expected: n, actual: constraints.dofs.len() });
    }
    let m = constraints.len();
    let tolerance = opts.tol * (1.0 + max_abs(load.iter().copied()));
    let mut active = vec![false; m];
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut constraint_of = vec![usize::MAX; n];
    for (k, &d) in constraints.dofs.iter().enumerate() {
        constraint_of[d] = k;
    }

    for iteration in 1..=opts.max_iterations {
        let mut x = vec![0.0; n];
        for k in (0..m).filter(|&k| active[k]) {
            x[constraints.dofs[k]] = constraints.bounds[k];
        }
        let free: Vec<usize> =
            (0..n).filter(|&i| constraint_of[i] == usize::MAX || !active[constraint_of[i]]).collect();
        let rhs: Vec<f64> = free
            .iter()
            .map(|&i| load[i] - operator.row(i).map(|(j, v)| v * x[j]).sum::<f64>())
            .collect();
        for (&i, v) in free.iter().zip(operator.solve_principal(&free, &rhs)?) {
            x[i] = v;
        }

        let ax = operator.matvec(&x);
        let multipliers: Vec<f64> = (0..m)
            .map(|k| if active[k] { ax[constraints.dofs[k]] - load[constraints.dofs[k]] } else { 0.0 })
            .collect();
        // Indices change status only on violations above the tolerance, so
        // degenerate constraints (multiplier and slack both at rounding
        // level) do not flip back and forth.
        let next: Vec<bool> = (0..m)
            .map(|k| {
                let p = multipliers[k] + opts.c_pdas * (constraints.bounds[k] - x[constraints.dofs[k]]);
                if active[k] { p >= -tolerance } else { p > tolerance }
            })
            .collect();
        let kkt = kkt_residual(operator, load, constraints, &x, &multipliers);
        if next == active && kkt <= tolerance {
            return Ok(VISolveReport {
                coefficients: x,
                multipliers,
                iterations: iteration,
                active_set_size: active.iter().filter(|&&a| a).count(),
                kkt_residual: kkt,
                kkt_tolerance: tolerance,
            });
        }
        seen.insert(active);
        if seen.contains(&next) {
            return Err(Error::NonConvergence {
                iterations: iteration,
                reason: format!("active set repeated (kkt residual {kkt:e}, tolerance {tolerance:e})"),
            });
        }
        active = next;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        reason: "iteration limit reached".into(),
    })
}

/// Discrete solution of a problem on one mesh.
#[derive(Clone, Debug)]
pub struct DiscreteSolve {
    pub solution: FirstOrderSolution,
    pub report: VISolveReport,
    pub operator: SparseOperator,
    pub load: Vec<f64>,
    pub constraints: ConstraintSet,
}

/// Validates the configuration, assembles the pair (form, functional) and
/// runs the active-set solver.
pub fn solve_problem(
    mesh: Arc<Mesh>,
    problem: &ProblemSpec,
    config: FormConfig,
    set: SetKind,
    opts: &SolverOptions,
) -> Result<DiscreteSolve> {
    validate_config(config.form, set, problem.obstacle)?;
    let dofs = Arc::new(DofMap::new(&mesh));
    let operator = assemble_form(&mesh, &dofs, config)?;
    let load = assemble_load(&mesh, &dofs, config.beta, problem, config.form.functional())?;
    let constraints = build_constraints(&mesh, &dofs, set, |x| (problem.g)(x));
    let report = solve_vi(&operator, &load, &constraints, opts)?;
    let solution = FirstOrderSolution::new(mesh, dofs, report.coefficients.clone())?;
    Ok(DiscreteSolve { solution, report, operator, load, constraints })
}
