//! Python bindings: meshes, the discrete solve, estimates and convergence
//! runs. Errors map to `ValueError` (bad configuration or input) and
//! `RuntimeError` (solver failures).

use std::sync::Arc;

use lsq_obstacle as core;
use lsq_obstacle::{AdaptiveConfig, FormConfig, FormKind, RefinementMode, SetKind, SolverOptions};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: core::Error) -> PyErr {
    use core::Error::*;
    match e {
        NonConvergence { .. } | SingularSubsystem(_) | Io(_) | Csv(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

/// Conforming triangulation with newest-vertex bisection.
#[pyclass(frozen, skip_from_py_object, name = "Mesh")]
#[derive(Clone)]
struct PyMesh {
    inner: Arc<core::Mesh>,
}

#[pymethods]
impl PyMesh {
    /// Structured mesh of a named domain: unit_square, square2,
    /// lshape_bartels or lshape_small.
    #[staticmethod]
    fn structured(domain: &str, n: usize) -> PyResult<Self> {
        let d: core::Domain = domain.parse().map_err(to_py)?;
        let m = core::Mesh::create_structured(d, n).map_err(to_py)?;
        Ok(Self { inner: Arc::new(m) })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(core::Mesh::from_text(text).map_err(to_py)?) })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    /// Bisects the marked elements and whatever closure requires.
    fn refine(&self, marked: Vec<usize>) -> PyResult<Self> {
        let n = self.inner.n_elements();
        if let Some(&bad) = marked.iter().find(|&&t| t >= n) {
            return Err(to_py(core::Error::InvalidElement(bad)));
        }
        Ok(Self { inner: Arc::new(self.inner.refine_nvb(&marked)) })
    }

    fn refine_uniform(&self) -> Self {
        Self { inner: Arc::new(self.inner.refine_uniform()) }
    }

    #[getter]
    fn n_elements(&self) -> usize {
        self.inner.n_elements()
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.n_edges()
    }

    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices().iter().map(|p| (p[0], p[1])).collect()
    }

    fn triangles(&self) -> Vec<(usize, usize, usize)> {
        self.inner.triangles().iter().map(|t| (t[0], t[1], t[2])).collect()
    }

    fn total_area(&self) -> f64 {
        self.inner.total_area()
    }

    fn is_conforming(&self) -> bool {
        self.inner.check_conformity().is_ok()
    }

    fn __repr__(&self) -> String {
        format!("Mesh({} elements, {} vertices)", self.inner.n_elements(), self.inner.n_vertices())
    }
}

/// Discrete solution with solver diagnostics and element estimates.
#[pyclass(frozen, name = "Solution")]
struct PySolution {
    solve: core::vi_solver::DiscreteSolve,
    problem: core::ProblemSpec,
}

#[pymethods]
impl PySolution {
    /// Nodal values of `u_h` on interior vertices.
    #[getter]
    fn u(&self) -> Vec<f64> {
        self.solve.solution.u().to_vec()
    }

    /// Edge coefficients of `sigma_h`.
    #[getter]
    fn sigma(&self) -> Vec<f64> {
        self.solve.solution.sigma().to_vec()
    }

    /// Element values of `lambda_h`.
    #[getter]
    fn lambda_(&self) -> Vec<f64> {
        self.solve.solution.lambda().to_vec()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.solve.report.iterations
    }

    #[getter]
    fn active_set_size(&self) -> usize {
        self.solve.report.active_set_size
    }

    #[getter]
    fn kkt_residual(&self) -> f64 {
        self.solve.report.kkt_residual
    }

    /// `u_h(x)` inside element `t` at barycentric coordinates `bary`.
    fn u_at(&self, t: usize, bary: (f64, f64, f64)) -> PyResult<f64> {
        let v = self.solve.solution.evaluate(t, [bary.0, bary.1, bary.2]).map_err(to_py)?;
        Ok(v.u)
    }

    /// Squared element indicators.
    fn local_estimates(&self) -> Vec<f64> {
        core::local_estimates(&self.solve.solution, &self.problem).iter().map(|l| l.total()).collect()
    }

    /// `(est, eta, rho, osc)`.
    fn estimate(&self) -> (f64, f64, f64, f64) {
        let s = core::summarize(&core::local_estimates(&self.solve.solution, &self.problem));
        (s.est, s.eta, s.rho, s.osc)
    }

    /// `(err_norm_u, err_norm_v)` against the exact solution.
    fn errors(&self) -> PyResult<(f64, f64)> {
        let r = core::error_report(&self.solve.solution, &self.problem).map_err(to_py)?;
        Ok((r.err_norm_u, r.err_norm_v))
    }

    /// Least-squares functional of the discrete solution.
    fn functional(&self) -> PyResult<f64> {
        Ok(core::evaluate_J(&self.solve.solution, &self.problem).map_err(to_py)?.value)
    }
}

/// Solves one discrete variational inequality.
#[pyfunction]
#[pyo3(signature = (example, mesh, form = "A", set = "Ks", beta = None))]
fn solve(example: &str, mesh: &PyMesh, form: &str, set: &str, beta: Option<f64>) -> PyResult<PySolution> {
    let problem = core::ProblemSpec::by_name(example).map_err(to_py)?;
    let form: FormKind = parse(form)?;
    let set: SetKind = parse(set)?;
    let config = FormConfig::new(form, beta.unwrap_or_else(|| problem.default_beta()));
    let solve = core::solve_problem(mesh.inner.clone(), &problem, config, set, &SolverOptions::default())
        .map_err(to_py)?;
    Ok(PySolution { solve, problem })
}

/// One row of a convergence table.
#[pyclass(frozen, get_all, name = "Level")]
struct PyLevel {
    level: usize,
    n_elements: usize,
    n_dofs: usize,
    est: f64,
    eta: f64,
    est_contact: f64,
    osc_f: f64,
    err_norm_u: Option<f64>,
    err_norm_v: Option<f64>,
    iterations: usize,
}

impl From<&core::LevelRecord> for PyLevel {
    fn from(r: &core::LevelRecord) -> Self {
        Self {
            level: r.level,
            n_elements: r.n_elements,
            n_dofs: r.n_dofs,
            est: r.est,
            eta: r.eta,
            est_contact: r.est_contact,
            osc_f: r.osc_f,
            err_norm_u: r.errors.map(|e| e.err_norm_u),
            err_norm_v: r.errors.map(|e| e.err_norm_v),
            iterations: r.iterations,
        }
    }
}

/// Uniform or adaptive convergence study; returns one `Level` per mesh.
#[pyfunction]
#[pyo3(signature = (example, form = "A", set = "Ks", mode = "adaptive", theta = 0.25, beta = None,
                    max_dofs = 200_000, max_levels = None, initial_n = 2))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    example: &str,
    form: &str,
    set: &str,
    mode: &str,
    theta: f64,
    beta: Option<f64>,
    max_dofs: usize,
    max_levels: Option<usize>,
    initial_n: usize,
) -> PyResult<Vec<PyLevel>> {
    let problem = core::ProblemSpec::by_name(example).map_err(to_py)?;
    let config = AdaptiveConfig {
        form: parse(form)?,
        set: parse(set)?,
        mode: parse::<RefinementMode>(mode)?,
        theta,
        beta,
        max_dofs: Some(max_dofs),
        max_levels,
        initial_n,
        ..AdaptiveConfig::default()
    };
    let records = py.detach(|| core::run_adaptive(&problem, &config)).map_err(|p| to_py(p.error))?;
    Ok(records.iter().map(PyLevel::from).collect())
}

/// Checks a (form, set) pair against an example's obstacle.
#[pyfunction]
fn validate(example: &str, form: &str, set: &str) -> PyResult<()> {
    let problem = core::ProblemSpec::by_name(example).map_err(to_py)?;
    core::validate_config(parse(form)?, parse(set)?, problem.obstacle).map_err(|r| to_py(r.into()))
}

/// Minimal set of elements carrying `theta` of the total estimate.
#[pyfunction]
fn doerfler_mark(est2: Vec<f64>, theta: f64) -> PyResult<Vec<usize>> {
    core::doerfler_mark(&est2, theta).map_err(to_py)
}

/// Empirical convergence rate of `values` against element counts.
#[pyfunction]
fn fit_rate(n: Vec<f64>, values: Vec<f64>) -> PyResult<f64> {
    core::report::fit_rate(&n, &values).map_err(to_py)
}

#[pymodule(name = "lsq_obstacle")]
fn bindings(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyLevel>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(doerfler_mark, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    m.add("EXAMPLES", core::ProblemSpec::NAMES.to_vec())?;
    Ok(())
}
