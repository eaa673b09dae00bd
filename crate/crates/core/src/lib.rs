//! First-order least-squares finite elements for the obstacle problem.
//!
//! The displacement `u`, its gradient `sigma` and the contact force
//! `lambda` are approximated in `S^1_0 x RT^0 x P^0` on conforming
//! triangulations. Three least-squares variational inequalities (forms
//! `A`, `B`, `C`) are solved over nodal and/or multiplier sign constraints
//! by a primal-dual active-set method, and an a posteriori estimator drives
//! adaptive newest-vertex bisection.

pub mod adaptivity;
pub mod assembly;
pub mod error;
pub mod estimator;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod report;
pub mod spaces;
pub mod sparse;
pub mod vi_solver;

pub use adaptivity::{
    doerfler_mark, run_adaptive, run_adaptive_with, AdaptiveConfig, LevelRecord, LevelState, PartialRun,
    RefinementMode,
};
pub use assembly::{
    assemble_form, assemble_load, assemble_u_gram, evaluate_J, FormConfig, FormKind, Functional, JValue,
};
pub use error::{Error, Result};
pub use estimator::{
    discrete_h_minus1_norm, error_report, local_estimates, summarize, ErrorReport, EstimateSummary, LocalEstimate,
};
pub use mesh::{Domain, Mesh, Point};
pub use problems::{ObstacleTraits, ProblemSpec};
pub use spaces::{DofMap, FirstOrderSolution};
pub use sparse::SparseOperator;
pub use vi_solver::{
    build_constraints, solve_problem, solve_vi, validate_config, ConstraintSet, Rejection, SetKind, SolverOptions,
    VISolveReport,
};
