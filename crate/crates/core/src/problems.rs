//! Benchmark obstacle problems and the data interface used by the solver.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{Domain, Point};

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

/// Regularity facts about an obstacle that decide which discrete convex sets
/// may be used with it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObstacleTraits {
    /// Point evaluation at mesh vertices is meaningful.
    pub continuous: bool,
    /// `g = 0` on the boundary.
    pub vanishes_on_boundary: bool,
    /// `g <= 0` on the boundary.
    pub nonpositive_on_boundary: bool,
}

impl ObstacleTraits {
    pub const CONTINUOUS_VANISHING: Self =
        Self { continuous: true, vanishes_on_boundary: true, nonpositive_on_boundary: true };
}

/// Exact solution of the first-order system; `sigma = grad u`.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarFn,
    pub grad_u: VectorFn,
    pub lambda: ScalarFn,
}

impl ExactSolution {
    pub fn sigma(&self, p: Point) -> [f64; 2] {
        (self.grad_u)(p)
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Domain,
    pub f: ScalarFn,
    pub g: ScalarFn,
    pub grad_g: VectorFn,
    pub exact: Option<ExactSolution>,
    pub obstacle: ObstacleTraits,
    /// Weight of the divergence residual used when none is given explicitly.
    pub beta: Option<f64>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("exact", &self.exact.is_some())
            .field("obstacle", &self.obstacle)
            .field("beta", &self.beta)
            .finish()
    }
}

impl ProblemSpec {
    pub const NAMES: [&'static str; 3] = ["smooth", "lshape", "pyramid"];

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "smooth" => Ok(example_smooth()),
            "lshape" | "lshape_bartels" => Ok(example_lshape_bartels()),
            "pyramid" => Ok(example_pyramid()),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }

    pub fn diameter(&self) -> f64 {
        self.domain.diameter()
    }

    /// `1 + diam(Omega)^2` unless the problem recommends otherwise.
    pub fn default_beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| 1.0 + self.diameter().powi(2))
    }
}

/// Cubic blend on `[1/2, 3/4]` from `1/4` down to `0` with vanishing slope
/// at both ends. Returns value and derivative.
pub fn smooth_blend(x: f64) -> (f64, f64) {
    let t = 4.0 * (x - 0.5);
    (0.25 * (1.0 - 3.0 * t * t + 2.0 * t * t * t), 6.0 * t * t - 6.0 * t)
}

/// Smooth solution on the unit square with contact for `x < 1/2`.
pub fn example_smooth() -> ProblemSpec {
    let bubble = |x: f64| (1.0 - x) * x;
    let neg_laplace = move |p: Point| 2.0 * (bubble(p[0]) + bubble(p[1]));
    let f = move |p: Point| if p[0] < 0.5 { 0.0 } else { neg_laplace(p) };
    let g = move |p: Point| {
        let (x, y) = (p[0], p[1]);
        if x <= 0.5 {
            bubble(x) * bubble(y)
        } else if x < 0.75 {
            smooth_blend(x).0 * bubble(y)
        } else {
            0.0
        }
    };
    let grad_g = move |p: Point| {
        let (x, y) = (p[0], p[1]);
        if x <= 0.5 {
            [(1.0 - 2.0 * x) * bubble(y), bubble(x) * (1.0 - 2.0 * y)]
        } else if x < 0.75 {
            let (v, d) = smooth_blend(x);
            [d * bubble(y), v * (1.0 - 2.0 * y)]
        } else {
            [0.0, 0.0]
        }
    };
    let exact = ExactSolution {
        u: Arc::new(move |p| bubble(p[0]) * bubble(p[1])),
        grad_u: Arc::new(move |p| {
            [(1.0 - 2.0 * p[0]) * bubble(p[1]), bubble(p[0]) * (1.0 - 2.0 * p[1])]
        }),
        lambda: Arc::new(move |p| if p[0] < 0.5 { neg_laplace(p) } else { 0.0 }),
    };
    ProblemSpec {
        name: "smooth".into(),
        domain: Domain::UnitSquare,
        f: Arc::new(f),
        g: Arc::new(g),
        grad_g: Arc::new(grad_g),
        exact: Some(exact),
        obstacle: ObstacleTraits::CONTINUOUS_VANISHING,
        beta: None,
    }
}

/// Radial cutoff: `1` for `r <= 1/4`, `0` for `r >= 3/4`, quintic in
/// between. Returns the value and first two radial derivatives.
pub fn cutoff(r: f64) -> (f64, f64, f64) {
    let s = 2.0 * (r - 0.25);
    if s < 0.0 {
        (1.0, 0.0, 0.0)
    } else if s < 1.0 {
        let s2 = s * s;
        let s3 = s2 * s;
        (
            -6.0 * s3 * s2 + 15.0 * s2 * s2 - 10.0 * s3 + 1.0,
            2.0 * (-30.0 * s2 * s2 + 60.0 * s3 - 30.0 * s2),
            4.0 * (-120.0 * s3 + 180.0 * s2 - 60.0 * s),
        )
    } else {
        (0.0, 0.0, 0.0)
    }
}

/// Unit load outside the disc of radius `5/4`; zero on the closed disc.
pub fn outer_load(r: f64) -> f64 {
    if r > 1.25 { 1.0 } else { 0.0 }
}

/// Polar radius and the angle measured clockwise from the positive x-axis,
/// in `[0, 2 pi)`. On the L-shape the angle runs over `(0, 3 pi / 2)`.
fn polar(p: Point) -> (f64, f64) {
    (p[0].hypot(p[1]), (-p[1].atan2(p[0])).rem_euclid(2.0 * PI))
}

/// Corner singularity times a radial cutoff on `(-2,2)^2 \ [0,2]^2`, with
/// zero obstacle.
pub fn example_lshape_bartels() -> ProblemSpec {
    let f = |p: Point| {
        let (r, phi) = polar(p);
        let (_, d1, d2) = cutoff(r);
        if r == 0.0 || d1 == 0.0 && d2 == 0.0 {
            return -outer_load(r);
        }
        let s = (2.0 / 3.0 * phi).sin();
        -r.powf(2.0 / 3.0) * s * (d1 / r + d2) - 4.0 / 3.0 * r.powf(-1.0 / 3.0) * d1 * s
            - outer_load(r)
    };
    let u = |p: Point| {
        let (r, phi) = polar(p);
        r.powf(2.0 / 3.0) * (2.0 / 3.0 * phi).sin() * cutoff(r).0
    };
    let grad_u = |p: Point| {
        let (r, phi) = polar(p);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let (c0, c1, _) = cutoff(r);
        let (s, c) = ((2.0 / 3.0 * phi).sin(), (2.0 / 3.0 * phi).cos());
        let u_r = 2.0 / 3.0 * r.powf(-1.0 / 3.0) * s * c0 + r.powf(2.0 / 3.0) * s * c1;
        let u_phi = 2.0 / 3.0 * r.powf(2.0 / 3.0) * c * c0;
        // the angle runs clockwise, so e_phi = (y, -x) / r
        [u_r * p[0] / r + u_phi * p[1] / (r * r), u_r * p[1] / r - u_phi * p[0] / (r * r)]
    };
    let exact = ExactSolution {
        u: Arc::new(u),
        grad_u: Arc::new(grad_u),
        lambda: Arc::new(|p: Point| outer_load(p[0].hypot(p[1]))),
    };
    ProblemSpec {
        name: "lshape".into(),
        domain: Domain::LShapeBartels,
        f: Arc::new(f),
        g: Arc::new(|_| 0.0),
        grad_g: Arc::new(|_| [0.0, 0.0]),
        exact: Some(exact),
        obstacle: ObstacleTraits::CONTINUOUS_VANISHING,
        beta: Some(3.0),
    }
}

/// Pyramid obstacle over the unit square inside `(-1,1)^2 \ [-1,0]^2`, unit
/// load, unknown solution.
///
/// `g(x) = max(0, dist(x, boundary of (0,1)^2) - 1/4)` inside the unit
/// square and `0` outside. On ridges the gradient of the first minimal
/// distance in the order `x, 1-x, y, 1-y` is used.
pub fn example_pyramid() -> ProblemSpec {
    let side = |p: Point| -> Option<(f64, [f64; 2])> {
        let (x, y) = (p[0], p[1]);
        if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
            return None;
        }
        [(x, [1.0, 0.0]), (1.0 - x, [-1.0, 0.0]), (y, [0.0, 1.0]), (1.0 - y, [0.0, -1.0])]
            .into_iter()
            .fold(None, |best: Option<(f64, [f64; 2])>, cand| match best {
                Some(b) if b.0 <= cand.0 => Some(b),
                _ => Some(cand),
            })
    };
    let g = move |p: Point| side(p).map_or(0.0, |(d, _)| (d - 0.25).max(0.0));
    let grad_g = move |p: Point| match side(p) {
        Some((d, grad)) if d > 0.25 => grad,
        _ => [0.0, 0.0],
    };
    ProblemSpec {
        name: "pyramid".into(),
        domain: Domain::LShapeSmall,
        f: Arc::new(|_| 1.0),
        g: Arc::new(g),
        grad_g: Arc::new(grad_g),
        exact: None,
        obstacle: ObstacleTraits::CONTINUOUS_VANISHING,
        beta: None,
    }
}
