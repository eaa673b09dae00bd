//! Galerkin matrices and load vectors of the three least-squares
//! formulations on `S^1_0 x RT^0 x P^0`.
//!
//! All three forms share
//!
//! ```text
//! beta <div sigma + lambda, div tau + mu> + <grad u - sigma, grad v - tau>
//! ```
//!
//! and differ in the coupling of the multiplier with the displacement:
//! `A` adds `(<mu, u> + <lambda, v>) / 2`, `B` adds `<lambda, v>` and `C`
//! adds `<mu, u>`. Rows are test functions, columns trial functions.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{ElementGeometry, Mesh};
use crate::problems::ProblemSpec;
use crate::quadrature::{TRI_DEGREE2, TRI_DEGREE5};
use crate::spaces::{rt_basis, rt_divergence, DofMap, FirstOrderSolution};
use crate::sparse::{SparseOperator, TripletBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormKind {
    A,
    B,
    C,
}

impl FormKind {
    pub const ALL: [FormKind; 3] = [FormKind::A, FormKind::B, FormKind::C];

    /// Load functional paired with the form.
    pub fn functional(self) -> Functional {
        match self {
            FormKind::A => Functional::F,
            FormKind::B => Functional::G,
            FormKind::C => Functional::H,
        }
    }
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormKind::A => "A",
            FormKind::B => "B",
            FormKind::C => "C",
        })
    }
}

impl FromStr for FormKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "A" | "a" => Ok(FormKind::A),
            "B" | "b" => Ok(FormKind::B),
            "C" | "c" => Ok(FormKind::C),
            _ => Err(format!("unknown form `{s}` (expected A, B or C)")),
        }
    }
}

/// Right-hand sides. All contain `-beta <f, div tau + mu>`; `F` adds
/// `<mu, g> / 2`, `H` adds `<mu, g>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Functional {
    F,
    G,
    H,
}

impl Functional {
    fn obstacle_weight(self) -> f64 {
        match self {
            Functional::F => 0.5,
            Functional::G => 0.0,
            Functional::H => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormConfig {
    pub form: FormKind,
    pub beta: f64,
}

impl FormConfig {
    pub fn new(form: FormKind, beta: f64) -> Self {
        Self { form, beta }
    }

    /// Uses the problem's recommended weight.
    pub fn for_problem(form: FormKind, problem: &ProblemSpec) -> Self {
        Self { form, beta: problem.default_beta() }
    }
}

/// Local ordering: three `u` dofs, three `sigma` dofs, one `lambda` dof.
type Local = [[f64; 7]; 7];

fn local_dofs(mesh: &Mesh, dofs: &DofMap, t: usize) -> [Option<usize>; 7] {
    let l = dofs.local(mesh, t);
    [l.u[0], l.u[1], l.u[2], Some(l.sigma[0]), Some(l.sigma[1]), Some(l.sigma[2]), Some(l.lambda)]
}

/// `int_T psi_k` and `int_T psi_k . psi_l`.
fn rt_moments(g: &ElementGeometry) -> ([[f64; 2]; 3], [[f64; 3]; 3]) {
    let c = g.point([1.0 / 3.0; 3]);
    let mean = std::array::from_fn(|k| {
        let s = g.edge_signs[k] * g.edge_lengths[k] / 2.0;
        [s * (c[0] - g.corners[k][0]), s * (c[1] - g.corners[k][1])]
    });
    let mut mass = [[0.0; 3]; 3];
    for q in &TRI_DEGREE2 {
        let x = g.point(q.bary);
        let psi: [[f64; 2]; 3] = std::array::from_fn(|k| rt_basis(g, k, x));
        for k in 0..3 {
            for l in 0..3 {
                mass[k][l] += g.area * q.weight * (psi[k][0] * psi[l][0] + psi[k][1] * psi[l][1]);
            }
        }
    }
    (mean, mass)
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn element_matrix(g: &ElementGeometry, config: FormConfig) -> Local {
    let beta = config.beta;
    let grads = g.barycentric_gradients;
    let div: [f64; 3] = std::array::from_fn(|k| rt_divergence(g, k));
    let (mean, mass) = rt_moments(g);
    let mut m = [[0.0; 7]; 7];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = g.area * dot(grads[i], grads[j]);
        }
        for k in 0..3 {
            let c = -dot(grads[i], mean[k]);
            m[i][3 + k] = c;
            m[3 + k][i] = c;
        }
    }
    for k in 0..3 {
        for l in 0..3 {
            m[3 + k][3 + l] = mass[k][l] + beta * g.area * div[k] * div[l];
        }
        m[3 + k][6] = beta * g.area * div[k];
        m[6][3 + k] = beta * g.area * div[k];
    }
    m[6][6] = beta * g.area;
    let c = g.area / 3.0;
    let (test_side, trial_side) = match config.form {
        FormKind::A => (0.5 * c, 0.5 * c),
        FormKind::B => (c, 0.0),
        FormKind::C => (0.0, c),
    };
    for i in 0..3 {
        m[i][6] += test_side;
        m[6][i] += trial_side;
    }
    m
}

fn gram_matrix(g: &ElementGeometry) -> Local {
    let grads = g.barycentric_gradients;
    let div: [f64; 3] = std::array::from_fn(|k| rt_divergence(g, k));
    let (_, mass) = rt_moments(g);
    let mut m = [[0.0; 7]; 7];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = g.area * dot(grads[i], grads[j]);
        }
    }
    for k in 0..3 {
        for l in 0..3 {
            m[3 + k][3 + l] = mass[k][l] + g.area * div[k] * div[l];
        }
        m[3 + k][6] = g.area * div[k];
        m[6][3 + k] = g.area * div[k];
    }
    m[6][6] = g.area;
    m
}

fn scatter(mesh: &Mesh, dofs: &DofMap, local: Vec<Local>, symmetric: bool) -> SparseOperator {
    let mut b = TripletBuilder::with_capacity(dofs.n_total(), 49 * mesh.n_elements());
    for (t, m) in local.iter().enumerate() {
        let d = local_dofs(mesh, dofs, t);
        for i in 0..7 {
            let Some(di) = d[i] else { continue };
            for j in 0..7 {
                if let Some(dj) = d[j] {
                    if m[i][j] != 0.0 {
                        b.add(di, dj, m[i][j]);
                    }
                }
            }
        }
    }
    b.build(symmetric)
}

fn check(mesh: &Mesh, dofs: &DofMap) -> Result<()> {
    if dofs.matches(mesh) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: mesh.n_elements(), actual: dofs.n_lambda() })
    }
}

/// Galerkin matrix of the chosen form. Element matrices are computed in
/// parallel and merged in element order.
pub fn assemble_form(mesh: &Mesh, dofs: &DofMap, config: FormConfig) -> Result<SparseOperator> {
    check(mesh, dofs)?;
    let local: Vec<Local> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|t| element_matrix(&mesh.element_geometry(t), config))
        .collect();
    Ok(scatter(mesh, dofs, local, config.form == FormKind::A))
}

/// Gram matrix of `||grad u||^2 + ||sigma||^2 + ||div sigma + lambda||^2`.
pub fn assemble_u_gram(mesh: &Mesh, dofs: &DofMap) -> Result<SparseOperator> {
    check(mesh, dofs)?;
    let local: Vec<Local> =
        (0..mesh.n_elements()).into_par_iter().map(|t| gram_matrix(&mesh.element_geometry(t))).collect();
    Ok(scatter(mesh, dofs, local, true))
}

/// Load vector of `functional`. `F` and `H` need an obstacle vanishing on
/// the boundary.
pub fn assemble_load(
    mesh: &Mesh,
    dofs: &DofMap,
    beta: f64,
    problem: &ProblemSpec,
    functional: Functional,
) -> Result<Vec<f64>> {
    check(mesh, dofs)?;
    let w = functional.obstacle_weight();
    if w != 0.0 && !problem.obstacle.vanishes_on_boundary {
        return Err(Error::InvalidObstacle);
    }
    let local: Vec<[f64; 7]> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|t| {
            let g = mesh.element_geometry(t);
            let (mut int_f, mut int_g) = (0.0, 0.0);
            for q in &TRI_DEGREE5 {
                let x = g.point(q.bary);
                int_f += q.weight * (problem.f)(x);
                if w != 0.0 {
                    int_g += q.weight * (problem.g)(x);
                }
            }
            int_f *= g.area;
            int_g *= g.area;
            let mut l = [0.0; 7];
            for k in 0..3 {
                l[3 + k] = -beta * rt_divergence(&g, k) * int_f;
            }
            l[6] = -beta * int_f + w * int_g;
            l
        })
        .collect();
    let mut load = vec![0.0; dofs.n_total()];
    for (t, l) in local.iter().enumerate() {
        for (d, v) in local_dofs(mesh, dofs, t).iter().zip(l) {
            if let Some(d) = d {
                load[*d] += v;
            }
        }
    }
    Ok(load)
}

/// Least-squares functional split into its direct quadrature value and the
/// value obtained from the quadratic-form identity with unit weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JValue {
    pub value: f64,
    pub from_identity: f64,
    /// `||f||^2`, the scale of the cancellation in the identity.
    pub data_scale: f64,
}

impl JValue {
    /// `|value - from_identity|` relative to the largest term involved.
    pub fn identity_gap(&self) -> f64 {
        (self.value - self.from_identity).abs() / self.value.abs().max(self.data_scale).max(f64::MIN_POSITIVE)
    }
}

/// `||div sigma + lambda + f||^2 + ||grad u - sigma||^2 + <lambda, u - g>`.
#[allow(non_snake_case)]
pub fn evaluate_J(solution: &FirstOrderSolution, problem: &ProblemSpec) -> Result<JValue> {
    if !problem.obstacle.vanishes_on_boundary {
        return Err(Error::InvalidObstacle);
    }
    let mesh = solution.mesh();
    let terms: Vec<[f64; 2]> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|t| {
            let e = solution.element_fields(t);
            let g = &e.geom;
            let (mut direct, mut ff) = (0.0, 0.0);
            for q in &TRI_DEGREE5 {
                let x = g.point(q.bary);
                let f = (problem.f)(x);
                let s = e.sigma(x);
                let r = e.div_sigma + e.lambda + f;
                let d = [e.grad_u[0] - s[0], e.grad_u[1] - s[1]];
                let contact = e.lambda * (e.u(q.bary) - (problem.g)(x));
                direct += q.weight * (r * r + dot(d, d) + contact);
                ff += q.weight * f * f;
            }
            [g.area * direct, g.area * ff]
        })
        .collect();
    let value = terms.iter().map(|t| t[0]).sum();
    let data_scale: f64 = terms.iter().map(|t| t[1]).sum();

    let dofs = solution.dofs();
    let a = assemble_form(mesh, dofs, FormConfig::new(FormKind::A, 1.0))?;
    let load = assemble_load(mesh, dofs, 1.0, problem, Functional::F)?;
    let x = solution.coefficients();
    let fx: f64 = load.iter().zip(x).map(|(l, v)| l * v).sum();
    Ok(JValue { value, from_identity: a.quad_form(x) - 2.0 * fx + data_scale, data_scale })
}
