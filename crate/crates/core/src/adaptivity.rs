//! Bulk marking and the solve / estimate / mark / refine loop.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::assembly::{evaluate_J, FormConfig, FormKind};
use crate::error::{Error, Result};
use crate::estimator::{error_report, local_estimates, summarize, ErrorReport};
use crate::mesh::Mesh;
use crate::problems::ProblemSpec;
use crate::spaces::FirstOrderSolution;
use crate::vi_solver::{solve_problem, validate_config, SetKind, SolverOptions};

/// Smallest set of elements carrying at least `theta` of the total squared
/// estimate. Elements are taken in order of decreasing contribution, ties
/// by increasing id. The result is sorted by id.
pub fn doerfler_mark(est2: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidTheta(theta));
    }
    let mut order: Vec<usize> = (0..est2.len()).collect();
    order.sort_by(|&a, &b| est2[b].total_cmp(&est2[a]).then(a.cmp(&b)));
    let total: f64 = order.iter().map(|&t| est2[t]).sum();
    let goal = theta * total;
    let mut marked = Vec::new();
    let mut acc = 0.0;
    for t in order {
        if acc >= goal {
            break;
        }
        acc += est2[t];
        marked.push(t);
    }
    marked.sort_unstable();
    Ok(marked)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefinementMode {
    Uniform,
    Adaptive,
}

impl fmt::Display for RefinementMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RefinementMode::Uniform => "uniform",
            RefinementMode::Adaptive => "adaptive",
        })
    }
}

impl FromStr for RefinementMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(RefinementMode::Uniform),
            "adaptive" => Ok(RefinementMode::Adaptive),
            _ => Err(format!("unknown mode `{s}` (expected uniform or adaptive)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveConfig {
    pub form: FormKind,
    pub set: SetKind,
    /// Defaults to the problem's recommended weight.
    pub beta: Option<f64>,
    pub theta: f64,
    pub mode: RefinementMode,
    /// No further level is solved once the dof count exceeds this.
    pub max_dofs: Option<usize>,
    pub max_levels: Option<usize>,
    /// Cells per block side of the initial structured mesh.
    pub initial_n: usize,
    /// Also evaluate the least-squares functional (needs `g = 0` on the
    /// boundary).
    pub with_functional: bool,
    pub solver: SolverOptions,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            form: FormKind::A,
            set: SetKind::Ks,
            beta: None,
            theta: 0.25,
            mode: RefinementMode::Adaptive,
            max_dofs: Some(200_000),
            max_levels: None,
            initial_n: 2,
            with_functional: false,
            solver: SolverOptions::default(),
        }
    }
}

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub n_elements: usize,
    pub n_dofs: usize,
    pub est: f64,
    pub eta: f64,
    pub est_contact: f64,
    pub osc_f: f64,
    pub errors: Option<ErrorReport>,
    pub functional: Option<f64>,
    pub iterations: usize,
    pub active_set_size: usize,
    pub kkt_residual: f64,
    pub kkt_tolerance: f64,
}

/// Everything available after one level, for callers that want to inspect
/// or dump intermediate states.
pub struct LevelState<'a> {
    pub record: &'a LevelRecord,
    pub mesh: &'a Mesh,
    pub solution: &'a FirstOrderSolution,
    pub est2: &'a [f64],
}

/// Run aborted after some levels completed.
#[derive(Debug)]
pub struct PartialRun {
    pub records: Vec<LevelRecord>,
    pub error: Error,
}

impl fmt::Display for PartialRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} completed levels)", self.error, self.records.len())
    }
}

impl std::error::Error for PartialRun {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub fn run_adaptive(problem: &ProblemSpec, config: &AdaptiveConfig) -> std::result::Result<Vec<LevelRecord>, PartialRun> {
    run_adaptive_with(problem, config, |_| Ok(()))
}

/// SOLVE, ESTIMATE, MARK, REFINE until the dof budget or level limit is
/// reached. Uniform mode marks every element. `inspect` sees each level.
pub fn run_adaptive_with(
    problem: &ProblemSpec,
    config: &AdaptiveConfig,
    mut inspect: impl FnMut(LevelState<'_>) -> Result<()>,
) -> std::result::Result<Vec<LevelRecord>, PartialRun> {
    let mut records = Vec::new();
    match drive(problem, config, &mut records, &mut inspect) {
        Ok(()) => Ok(records),
        Err(error) => Err(PartialRun { records, error }),
    }
}

fn drive(
    problem: &ProblemSpec,
    config: &AdaptiveConfig,
    records: &mut Vec<LevelRecord>,
    inspect: &mut impl FnMut(LevelState<'_>) -> Result<()>,
) -> Result<()> {
    validate_config(config.form, config.set, problem.obstacle)?;
    if !(config.theta > 0.0 && config.theta <= 1.0) {
        return Err(Error::InvalidTheta(config.theta));
    }
    let form = FormConfig::new(config.form, config.beta.unwrap_or_else(|| problem.default_beta()));
    let mut mesh = Arc::new(Mesh::create_structured(problem.domain, config.initial_n)?);
    for level in 0.. {
        let n_dofs = mesh.n_vertices() - mesh.boundary_vertices().iter().filter(|&&b| b).count()
            + mesh.n_edges()
            + mesh.n_elements();
        if level > 0 && config.max_dofs.is_some_and(|m| n_dofs > m) {
            break;
        }
        let solved = solve_problem(mesh.clone(), problem, form, config.set, &config.solver)?;
        let local = local_estimates(&solved.solution, problem);
        let summary = summarize(&local);
        let errors = match problem.exact {
            Some(_) => Some(error_report(&solved.solution, problem)?),
            None => None,
        };
        let functional =
            if config.with_functional { Some(evaluate_J(&solved.solution, problem)?.value) } else { None };
        let r = &solved.report;
        records.push(LevelRecord {
            level,
            n_elements: mesh.n_elements(),
            n_dofs,
            est: summary.est,
            eta: summary.eta,
            est_contact: summary.rho,
            osc_f: summary.osc,
            errors,
            functional,
            iterations: r.iterations,
            active_set_size: r.active_set_size,
            kkt_residual: r.kkt_residual,
            kkt_tolerance: r.kkt_tolerance,
        });
        log::info!(
            "level {level}: {} elements, {n_dofs} dofs, est {:e}, {} active-set iterations",
            mesh.n_elements(),
            summary.est,
            r.iterations
        );
        let est2: Vec<f64> = local.iter().map(|l| l.total()).collect();
        inspect(LevelState { record: records.last().unwrap(), mesh: &mesh, solution: &solved.solution, est2: &est2 })?;

        if config.max_levels.is_some_and(|m| level + 1 >= m) {
            break;
        }
        mesh = Arc::new(match config.mode {
            RefinementMode::Uniform => mesh.refine_uniform(),
            RefinementMode::Adaptive => {
                let marked = doerfler_mark(&est2, config.theta)?;
                if marked.is_empty() {
                    break;
                }
                mesh.refine_nvb(&marked)
            }
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{example_pyramid, example_smooth};
    use proptest::prelude::*;

    #[test]
    fn marking_examples() {
        assert_eq!(doerfler_mark(&[4.0, 3.0, 2.0, 1.0], 0.5).unwrap(), vec![0, 1]);
        assert_eq!(doerfler_mark(&[0.0, 5.0, 0.0, 0.0], 0.25).unwrap(), vec![1]);
        assert_eq!(doerfler_mark(&[1.0, 0.0, 2.0, 3.0], 1.0).unwrap(), vec![0, 2, 3]);
        assert_eq!(doerfler_mark(&[1.0, 1.0, 1.0, 1.0], 0.5).unwrap(), vec![0, 1]);
        assert!(doerfler_mark(&[0.0, 0.0], 0.5).unwrap().is_empty());
        assert!(doerfler_mark(&[], 0.5).unwrap().is_empty());
        for theta in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(doerfler_mark(&[1.0], theta), Err(Error::InvalidTheta(_))));
        }
    }

    proptest! {
        #[test]
        fn marked_set_is_minimal_bulk(
            est in prop::collection::vec(0.0f64..10.0, 1..60),
            theta in 0.01f64..=1.0,
        ) {
            let marked = doerfler_mark(&est, theta).unwrap();
            let total: f64 = est.iter().sum();
            let sum: f64 = marked.iter().map(|&t| est[t]).sum();
            prop_assert!(sum >= theta * total * (1.0 - 1e-12));
            if let Some(&smallest) = marked.iter().min_by(|&&a, &&b| est[a].total_cmp(&est[b]).then(b.cmp(&a))) {
                prop_assert!(sum - est[smallest] < theta * total * (1.0 + 1e-12));
            }
            // every unmarked element carries at most the smallest marked one
            let min_marked = marked.iter().map(|&t| est[t]).fold(f64::INFINITY, f64::min);
            for t in 0..est.len() {
                if !marked.contains(&t) {
                    prop_assert!(est[t] <= min_marked);
                }
            }
        }
    }

    #[test]
    fn uniform_run_quadruples_elements() {
        let config = AdaptiveConfig {
            mode: RefinementMode::Uniform,
            max_levels: Some(3),
            max_dofs: None,
            ..Default::default()
        };
        let r = run_adaptive(&example_smooth(), &config).unwrap();
        assert_eq!(r.iter().map(|r| r.n_elements).collect::<Vec<_>>(), vec![8, 32, 128]);
        assert!(r.iter().all(|r| r.errors.is_some() && r.kkt_residual <= r.kkt_tolerance));
        assert!(r.windows(2).all(|w| w[1].errors.unwrap().err_norm_u < w[0].errors.unwrap().err_norm_u));
    }

    #[test]
    fn adaptive_run_respects_budget() {
        let config = AdaptiveConfig { max_dofs: Some(2000), ..Default::default() };
        let mut seen = 0;
        let r = run_adaptive_with(&example_pyramid(), &config, |s| {
            assert_eq!(s.est2.len(), s.mesh.n_elements());
            seen += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, r.len());
        assert!(r.len() >= 3);
        assert!(r.windows(2).all(|w| w[1].n_elements > w[0].n_elements));
        assert!(r.iter().skip(1).all(|r| r.n_dofs <= 2000));
        assert!(r.iter().all(|r| r.errors.is_none() && r.osc_f == 0.0));
        for r in &r {
            let s = (r.eta.powi(2) + r.est_contact.powi(2) + r.osc_f.powi(2)).sqrt();
            assert!((s - r.est).abs() <= 1e-12 * r.est);
        }
    }

    #[test]
    fn failures_keep_completed_levels() {
        let config = AdaptiveConfig { max_levels: Some(4), ..Default::default() };
        let mut calls = 0;
        let err = run_adaptive_with(&example_smooth(), &config, |_| {
            calls += 1;
            if calls == 2 {
                Err(Error::Malformed("stop".into()))
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        assert_eq!(err.records.len(), 2);

        let bad = AdaptiveConfig { set: SetKind::K1, ..Default::default() };
        let err = run_adaptive(&example_smooth(), &bad).unwrap_err();
        assert!(err.records.is_empty());
        assert!(matches!(err.error, Error::Rejected(_)));
    }
}
