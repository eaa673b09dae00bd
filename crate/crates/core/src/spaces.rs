//! Lowest-order spaces `S^1_0 x RT^0 x P^0` and their interpolation and
//! projection operators.
//!
//! Combined coefficient vectors are laid out as `[u | sigma | lambda]`:
//! one `u` dof per interior vertex, one `sigma` dof per edge, one `lambda`
//! dof per element.
//!
//! The Raviart-Thomas basis function of edge `e` has unit normal component
//! (in the global normal direction) on `e` and zero normal component on all
//! other edges; on an element it reads `s |e| / (2|T|) (x - p)` with `p` the
//! vertex opposite `e` and `s` the orientation sign, so its divergence is
//! `s |e| / |T|`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{ElementGeometry, Mesh, Point};
use crate::quadrature::{EDGE_GAUSS3, TRI_DEGREE2, TRI_DEGREE5};
use crate::sparse::{SparseOperator, TripletBuilder};

const NO_DOF: usize = usize::MAX;

/// Global numbering of the discrete unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    vertex_to_u: Vec<usize>,
    u_to_vertex: Vec<usize>,
    n_sigma: usize,
    n_lambda: usize,
}

/// Global dof indices touching one element.
#[derive(Clone, Copy, Debug)]
pub struct LocalDofs {
    pub u: [Option<usize>; 3],
    pub sigma: [usize; 3],
    pub lambda: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let mut vertex_to_u = vec![NO_DOF; mesh.n_vertices()];
        let mut u_to_vertex = Vec::new();
        for (v, slot) in vertex_to_u.iter_mut().enumerate() {
            if !mesh.is_boundary_vertex(v) {
                *slot = u_to_vertex.len();
                u_to_vertex.push(v);
            }
        }
        Self { vertex_to_u, u_to_vertex, n_sigma: mesh.n_edges(), n_lambda: mesh.n_elements() }
    }

    pub fn n_u(&self) -> usize {
        self.u_to_vertex.len()
    }

    pub fn n_sigma(&self) -> usize {
        self.n_sigma
    }

    pub fn n_lambda(&self) -> usize {
        self.n_lambda
    }

    pub fn n_total(&self) -> usize {
        self.n_u() + self.n_sigma + self.n_lambda
    }

    pub fn sigma_offset(&self) -> usize {
        self.n_u()
    }

    pub fn lambda_offset(&self) -> usize {
        self.n_u() + self.n_sigma
    }

    /// `u` dof of a vertex; `None` on the boundary.
    pub fn u_dof(&self, vertex: usize) -> Option<usize> {
        match self.vertex_to_u[vertex] {
            NO_DOF => None,
            d => Some(d),
        }
    }

    pub fn u_vertex(&self, dof: usize) -> usize {
        self.u_to_vertex[dof]
    }

    pub fn sigma_dof(&self, edge: usize) -> usize {
        self.sigma_offset() + edge
    }

    pub fn lambda_dof(&self, element: usize) -> usize {
        self.lambda_offset() + element
    }

    pub fn local(&self, mesh: &Mesh, t: usize) -> LocalDofs {
        let tri = mesh.triangles()[t];
        let edges = mesh.element_edges()[t];
        LocalDofs {
            u: tri.map(|v| self.u_dof(v)),
            sigma: edges.map(|e| self.sigma_dof(e)),
            lambda: self.lambda_dof(t),
        }
    }

    /// Checks that the map was built for `mesh`.
    pub fn matches(&self, mesh: &Mesh) -> bool {
        self.vertex_to_u.len() == mesh.n_vertices()
            && self.n_sigma == mesh.n_edges()
            && self.n_lambda == mesh.n_elements()
    }
}

/// Raviart-Thomas basis function of local edge `k` at `x`.
#[inline]
pub fn rt_basis(geom: &ElementGeometry, k: usize, x: Point) -> [f64; 2] {
    let p = geom.corners[k];
    let s = geom.edge_signs[k] * geom.edge_lengths[k] / (2.0 * geom.area);
    [s * (x[0] - p[0]), s * (x[1] - p[1])]
}

#[inline]
pub fn rt_divergence(geom: &ElementGeometry, k: usize) -> f64 {
    geom.edge_signs[k] * geom.edge_lengths[k] / geom.area
}

/// Discrete triple `(u_h, sigma_h, lambda_h)`.
#[derive(Clone, Debug)]
pub struct FirstOrderSolution {
    mesh: Arc<Mesh>,
    dofs: Arc<DofMap>,
    coefficients: Vec<f64>,
}

/// Pointwise values of a discrete triple.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointValues {
    pub u: f64,
    pub grad_u: [f64; 2],
    pub sigma: [f64; 2],
    pub div_sigma: f64,
    pub lambda: f64,
}

/// Restriction of a discrete triple to one element.
#[derive(Clone, Copy, Debug)]
pub struct ElementFields {
    pub geom: ElementGeometry,
    pub u_vertex: [f64; 3],
    pub grad_u: [f64; 2],
    pub sigma_coef: [f64; 3],
    pub div_sigma: f64,
    pub lambda: f64,
}

impl ElementFields {
    pub fn u(&self, bary: [f64; 3]) -> f64 {
        bary[0] * self.u_vertex[0] + bary[1] * self.u_vertex[1] + bary[2] * self.u_vertex[2]
    }

    pub fn sigma(&self, x: Point) -> [f64; 2] {
        (0..3).fold([0.0, 0.0], |acc, k| {
            let psi = rt_basis(&self.geom, k, x);
            [acc[0] + self.sigma_coef[k] * psi[0], acc[1] + self.sigma_coef[k] * psi[1]]
        })
    }
}

impl FirstOrderSolution {
    pub fn new(mesh: Arc<Mesh>, dofs: Arc<DofMap>, coefficients: Vec<f64>) -> Result<Self> {
        if !dofs.matches(&mesh) {
            return Err(Error::DimensionMismatch { expected: mesh.n_elements(), actual: dofs.n_lambda() });
        }
        if coefficients.len() != dofs.n_total() {
            return Err(Error::DimensionMismatch { expected: dofs.n_total(), actual: coefficients.len() });
        }
        Ok(Self { mesh, dofs, coefficients })
    }

    pub fn zero(mesh: Arc<Mesh>) -> Self {
        let dofs = Arc::new(DofMap::new(&mesh));
        let coefficients = vec![0.0; dofs.n_total()];
        Self { mesh, dofs, coefficients }
    }

    /// Assembles a triple from its three blocks.
    pub fn from_parts(mesh: Arc<Mesh>, u: &[f64], sigma: &[f64], lambda: &[f64]) -> Result<Self> {
        let dofs = Arc::new(DofMap::new(&mesh));
        let mut c = Vec::with_capacity(dofs.n_total());
        c.extend_from_slice(u);
        c.extend_from_slice(sigma);
        c.extend_from_slice(lambda);
        for (expected, actual) in
            [(dofs.n_u(), u.len()), (dofs.n_sigma(), sigma.len()), (dofs.n_lambda(), lambda.len())]
        {
            if expected != actual {
                return Err(Error::DimensionMismatch { expected, actual });
            }
        }
        Self::new(mesh, dofs, c)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn dofs(&self) -> &Arc<DofMap> {
        &self.dofs
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn u(&self) -> &[f64] {
        &self.coefficients[..self.dofs.sigma_offset()]
    }

    pub fn sigma(&self) -> &[f64] {
        &self.coefficients[self.dofs.sigma_offset()..self.dofs.lambda_offset()]
    }

    pub fn lambda(&self) -> &[f64] {
        &self.coefficients[self.dofs.lambda_offset()..]
    }

    /// Value of `u_h` at a mesh vertex (zero on the boundary).
    pub fn u_at_vertex(&self, v: usize) -> f64 {
        self.dofs.u_dof(v).map_or(0.0, |d| self.coefficients[d])
    }

    pub fn element_fields(&self, t: usize) -> ElementFields {
        let geom = self.mesh.element_geometry(t);
        let local = self.dofs.local(&self.mesh, t);
        let u_vertex = local.u.map(|d| d.map_or(0.0, |d| self.coefficients[d]));
        let grad_u = (0..3).fold([0.0, 0.0], |acc, k| {
            let g = geom.barycentric_gradients[k];
            [acc[0] + u_vertex[k] * g[0], acc[1] + u_vertex[k] * g[1]]
        });
        let sigma_coef = local.sigma.map(|d| self.coefficients[d]);
        let div_sigma = (0..3).map(|k| sigma_coef[k] * rt_divergence(&geom, k)).sum();
        let lambda = self.coefficients[local.lambda];
        ElementFields { geom, u_vertex, grad_u, sigma_coef, div_sigma, lambda }
    }

    pub fn evaluate(&self, t: usize, bary: [f64; 3]) -> Result<PointValues> {
        if t >= self.mesh.n_elements() {
            return Err(Error::InvalidElement(t));
        }
        let f = self.element_fields(t);
        let x = f.geom.point(bary);
        Ok(PointValues {
            u: f.u(bary),
            grad_u: f.grad_u,
            sigma: f.sigma(x),
            div_sigma: f.div_sigma,
            lambda: f.lambda,
        })
    }
}

/// Nodal interpolant into `S^1_0`; boundary values are dropped.
pub fn nodal_interpolate(mesh: &Mesh, dofs: &DofMap, v: impl Fn(Point) -> f64) -> Vec<f64> {
    (0..dofs.n_u()).map(|d| v(mesh.vertices()[dofs.u_vertex(d)])).collect()
}

/// Raviart-Thomas interpolant: each coefficient is the mean normal component
/// of `tau` over its edge (3-point Gauss rule).
pub fn rt_interpolate(mesh: &Mesh, tau: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
    mesh.edges()
        .iter()
        .map(|&[a, b]| {
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            let t = [pb[0] - pa[0], pb[1] - pa[1]];
            let len = t[0].hypot(t[1]);
            let n = [t[1] / len, -t[0] / len];
            EDGE_GAUSS3
                .iter()
                .map(|&(s, w)| {
                    let v = tau([pa[0] + s * t[0], pa[1] + s * t[1]]);
                    w * (v[0] * n[0] + v[1] * n[1])
                })
                .sum()
        })
        .collect()
}

/// Elementwise integral of `mu` with the 7-point rule.
pub fn element_integral(geom: &ElementGeometry, mu: impl Fn(Point) -> f64) -> f64 {
    geom.area * TRI_DEGREE5.iter().map(|q| q.weight * mu(geom.point(q.bary))).sum::<f64>()
}

/// `L^2` projection onto `P^0`: elementwise means.
pub fn project_p0(mesh: &Mesh, mu: impl Fn(Point) -> f64) -> Vec<f64> {
    (0..mesh.n_elements())
        .map(|t| {
            let g = mesh.element_geometry(t);
            element_integral(&g, &mu) / g.area
        })
        .collect()
}

/// Mass matrix of `S^1_0`.
pub fn mass_matrix(mesh: &Mesh, dofs: &DofMap) -> SparseOperator {
    let mut b = TripletBuilder::with_capacity(dofs.n_u(), 9 * mesh.n_elements());
    for t in 0..mesh.n_elements() {
        let area = mesh.element_geometry(t).area;
        let u = dofs.local(mesh, t).u;
        for i in 0..3 {
            for j in 0..3 {
                if let (Some(di), Some(dj)) = (u[i], u[j]) {
                    let m = if i == j { area / 6.0 } else { area / 12.0 };
                    b.add(di, dj, m);
                }
            }
        }
    }
    b.build(true)
}

/// Stiffness matrix of `S^1_0`.
pub fn stiffness_matrix(mesh: &Mesh, dofs: &DofMap) -> SparseOperator {
    let mut b = TripletBuilder::with_capacity(dofs.n_u(), 9 * mesh.n_elements());
    for t in 0..mesh.n_elements() {
        let g = mesh.element_geometry(t);
        let u = dofs.local(mesh, t).u;
        for i in 0..3 {
            for j in 0..3 {
                if let (Some(di), Some(dj)) = (u[i], u[j]) {
                    let (gi, gj) = (g.barycentric_gradients[i], g.barycentric_gradients[j]);
                    b.add(di, dj, g.area * (gi[0] * gj[0] + gi[1] * gj[1]));
                }
            }
        }
    }
    b.build(true)
}

/// Load vector `(mu, phi_i)` for the `S^1_0` hat functions, where `mu` may
/// depend on the element (for piecewise data).
pub fn hat_load(mesh: &Mesh, dofs: &DofMap, mu: impl Fn(usize, Point) -> f64) -> Vec<f64> {
    let mut load = vec![0.0; dofs.n_u()];
    for t in 0..mesh.n_elements() {
        let g = mesh.element_geometry(t);
        let u = dofs.local(mesh, t).u;
        for q in &TRI_DEGREE5 {
            let val = g.area * q.weight * mu(t, g.point(q.bary));
            for k in 0..3 {
                if let Some(d) = u[k] {
                    load[d] += val * q.bary[k];
                }
            }
        }
    }
    load
}

/// `L^2` projection onto `S^1_0`.
pub fn q_h_project(mesh: &Mesh, dofs: &DofMap, mu: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    let load = hat_load(mesh, dofs, |_, x| mu(x));
    mass_matrix(mesh, dofs).solve_spd(&load)
}

/// `||v||^2` for `v` in `S^1_0` given by its coefficients (degree-2 rule).
pub fn l2_norm_sq_s1(mesh: &Mesh, dofs: &DofMap, coef: &[f64]) -> f64 {
    mass_matrix(mesh, dofs).quad_form(coef)
}

/// `||tau_h||^2` for an `RT^0` field (degree-2 rule, exact).
pub fn l2_norm_sq_rt(mesh: &Mesh, coef: &[f64]) -> f64 {
    let mut s = 0.0;
    for t in 0..mesh.n_elements() {
        let g = mesh.element_geometry(t);
        let c = mesh.element_edges()[t].map(|e| coef[e]);
        for q in &TRI_DEGREE2 {
            let x = g.point(q.bary);
            let v = (0..3).fold([0.0, 0.0], |acc, k| {
                let p = rt_basis(&g, k, x);
                [acc[0] + c[k] * p[0], acc[1] + c[k] * p[1]]
            });
            s += g.area * q.weight * (v[0] * v[0] + v[1] * v[1]);
        }
    }
    s
}
