//! A posteriori error estimator, exact error norms and the discrete `H^{-1}`
//! norm used for the multiplier error.
//!
//! The sign-dependent integrands `(u_h - g)_+` and `grad (g - u_h)_+` are
//! integrated with the 7-point rule without resolving the free boundary
//! inside an element.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::problems::ProblemSpec;
use crate::quadrature::{TRI_DEGREE2, TRI_DEGREE5};
use crate::spaces::{hat_load, stiffness_matrix, DofMap, FirstOrderSolution};

/// Squared local contributions of one element.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalEstimate {
    /// `||div sigma_h + lambda_h + P0 f||_T^2`
    pub eta2_div: f64,
    /// `||grad u_h - sigma_h||_T^2`
    pub eta2_grad: f64,
    /// `<lambda_h, (u_h - g)_+>_T`
    pub rho2_contact: f64,
    /// `||grad (g - u_h)_+||_T^2`
    pub rho2_penetration: f64,
    /// `||f - P0 f||_T^2`
    pub osc2: f64,
}

impl LocalEstimate {
    pub fn total(&self) -> f64 {
        self.eta2_div + self.eta2_grad + self.rho2_contact + self.rho2_penetration + self.osc2
    }

    pub fn eta2(&self) -> f64 {
        self.eta2_div + self.eta2_grad
    }

    pub fn rho2(&self) -> f64 {
        self.rho2_contact + self.rho2_penetration
    }
}

/// Global estimator split into its parts (not squared).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EstimateSummary {
    pub est: f64,
    pub eta: f64,
    pub rho: f64,
    pub osc: f64,
}

pub fn summarize(local: &[LocalEstimate]) -> EstimateSummary {
    let (mut total, mut eta2, mut rho2, mut osc2) = (0.0, 0.0, 0.0, 0.0);
    for l in local {
        total += l.total();
        eta2 += l.eta2();
        rho2 += l.rho2();
        osc2 += l.osc2;
    }
    EstimateSummary { est: total.sqrt(), eta: eta2.sqrt(), rho: rho2.sqrt(), osc: osc2.sqrt() }
}

/// Per-element estimator contributions, in element order.
pub fn local_estimates(solution: &FirstOrderSolution, problem: &ProblemSpec) -> Vec<LocalEstimate> {
    let mesh = solution.mesh();
    (0..mesh.n_elements())
        .into_par_iter()
        .map(|t| {
            let e = solution.element_fields(t);
            let g = &e.geom;
            let fq: [f64; 7] = std::array::from_fn(|i| (problem.f)(g.point(TRI_DEGREE5[i].bary)));
            let mean_f: f64 = TRI_DEGREE5.iter().zip(&fq).map(|(q, f)| q.weight * f).sum();
            let r = e.div_sigma + e.lambda + mean_f;

            let mut eta2_grad = 0.0;
            for q in &TRI_DEGREE2 {
                let s = e.sigma(g.point(q.bary));
                let d = [e.grad_u[0] - s[0], e.grad_u[1] - s[1]];
                eta2_grad += q.weight * (d[0] * d[0] + d[1] * d[1]);
            }

            let (mut positive_part, mut penetration, mut osc) = (0.0, 0.0, 0.0);
            for (q, &f) in TRI_DEGREE5.iter().zip(&fq) {
                let x = g.point(q.bary);
                let gap = e.u(q.bary) - (problem.g)(x);
                if gap > 0.0 {
                    positive_part += q.weight * gap;
                } else if gap < 0.0 {
                    let gg = (problem.grad_g)(x);
                    let d = [gg[0] - e.grad_u[0], gg[1] - e.grad_u[1]];
                    penetration += q.weight * (d[0] * d[0] + d[1] * d[1]);
                }
                osc += q.weight * (f - mean_f) * (f - mean_f);
            }
            let mut rho2_contact = e.lambda * g.area * positive_part;
            if rho2_contact < 0.0 {
                log::warn!("negative multiplier {:e} on element {t}; contact term clamped to 0", e.lambda);
                rho2_contact = 0.0;
            }
            LocalEstimate {
                eta2_div: g.area * r * r,
                eta2_grad: g.area * eta2_grad,
                rho2_contact,
                rho2_penetration: g.area * penetration,
                osc2: g.area * osc,
            }
        })
        .collect()
}

/// `||div sigma_h + lambda_h + f||^2 + ||grad u_h - sigma_h||^2` evaluated
/// directly with the 7-point rule. Equals `eta^2 + osc^2`.
pub fn residual_norm_sq(solution: &FirstOrderSolution, problem: &ProblemSpec) -> f64 {
    let mesh = solution.mesh();
    let parts: Vec<f64> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|t| {
            let e = solution.element_fields(t);
            let g = &e.geom;
            let mut s = 0.0;
            for q in &TRI_DEGREE5 {
                let x = g.point(q.bary);
                let r = e.div_sigma + e.lambda + (problem.f)(x);
                let sig = e.sigma(x);
                let d = [e.grad_u[0] - sig[0], e.grad_u[1] - sig[1]];
                s += q.weight * (r * r + d[0] * d[0] + d[1] * d[1]);
            }
            g.area * s
        })
        .collect();
    parts.iter().sum()
}

/// Exact errors of a discrete solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    /// `||u - u_h||_U`
    pub err_norm_u: f64,
    /// `||grad (u - u_h)||`
    pub err_grad_u: f64,
    /// `||sigma - sigma_h||`
    pub err_sigma: f64,
    /// `||div sigma_h + lambda_h + f||`
    pub err_div_sigma_lambda: f64,
    /// `||lambda - lambda_h||_{-1,h}`
    pub err_lambda: f64,
    /// `sqrt(err_grad_u^2 + err_sigma^2 + err_lambda^2)`
    pub err_norm_v: f64,
}

/// Components of `||u - u_h||_U` by 7-point quadrature. Uses
/// `div sigma + lambda = -f` for the last component.
pub fn error_u_components(solution: &FirstOrderSolution, problem: &ProblemSpec) -> Result<[f64; 3]> {
    let exact = problem.exact.as_ref().ok_or(Error::MissingExactSolution)?;
    let mesh = solution.mesh();
    let parts: Vec<[f64; 3]> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|t| {
            let e = solution.element_fields(t);
            let g = &e.geom;
            let mut s = [0.0; 3];
            for q in &TRI_DEGREE5 {
                let x = g.point(q.bary);
                let du = (exact.grad_u)(x);
                let sig = e.sigma(x);
                let a = [du[0] - e.grad_u[0], du[1] - e.grad_u[1]];
                let b = [du[0] - sig[0], du[1] - sig[1]];
                let c = e.div_sigma + e.lambda + (problem.f)(x);
                s[0] += q.weight * (a[0] * a[0] + a[1] * a[1]);
                s[1] += q.weight * (b[0] * b[0] + b[1] * b[1]);
                s[2] += q.weight * c * c;
            }
            s.map(|v| g.area * v)
        })
        .collect();
    let mut total = [0.0; 3];
    for p in parts {
        for k in 0..3 {
            total[k] += p[k];
        }
    }
    Ok(total.map(f64::sqrt))
}

/// `sqrt(||h_T mu||^2 + ||grad z||^2)` where `z` in `S^1_0` solves
/// `<grad z, grad v> = <mu, v>` for all `v` and `h_T` is the element
/// diameter. `mu` may depend on the element.
pub fn discrete_h_minus1_norm(
    mesh: &Mesh,
    dofs: &DofMap,
    mu: impl Fn(usize, Point) -> f64 + Sync,
) -> Result<f64> {
    let local: f64 = (0..mesh.n_elements())
        .into_par_iter()
        .map(|t| {
            let g = mesh.element_geometry(t);
            let s: f64 = TRI_DEGREE5
                .iter()
                .map(|q| {
                    let v = mu(t, g.point(q.bary));
                    q.weight * v * v
                })
                .sum();
            g.diameter * g.diameter * g.area * s
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let b = hat_load(mesh, dofs, &mu);
    let lift = if dofs.n_u() == 0 {
        0.0
    } else {
        let z = stiffness_matrix(mesh, dofs).solve_spd(&b)?;
        z.iter().zip(&b).map(|(z, b)| z * b).sum::<f64>().max(0.0)
    };
    Ok((local + lift).sqrt())
}

/// All exact error quantities; needs the problem's exact solution.
pub fn error_report(solution: &FirstOrderSolution, problem: &ProblemSpec) -> Result<ErrorReport> {
    let [err_grad_u, err_sigma, err_div_sigma_lambda] = error_u_components(solution, problem)?;
    let exact = problem.exact.as_ref().ok_or(Error::MissingExactSolution)?;
    let lambda_h = solution.lambda();
    let err_lambda = discrete_h_minus1_norm(solution.mesh(), solution.dofs(), |t, x| {
        (exact.lambda)(x) - lambda_h[t]
    })?;
    Ok(ErrorReport {
        err_norm_u: (err_grad_u.powi(2) + err_sigma.powi(2) + err_div_sigma_lambda.powi(2)).sqrt(),
        err_grad_u,
        err_sigma,
        err_div_sigma_lambda,
        err_lambda,
        err_norm_v: (err_grad_u.powi(2) + err_sigma.powi(2) + err_lambda.powi(2)).sqrt(),
    })
}
