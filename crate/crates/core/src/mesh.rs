//! Conforming triangulations with newest-vertex bisection.
//!
//! Local edge `k` of a triangle is the edge opposite its local vertex `k`.
//! Global edges are oriented from the lower to the higher vertex index; the
//! global unit normal of an edge is its tangent rotated clockwise.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Sentinel for the missing neighbour of a boundary edge.
pub const NO_ELEMENT: usize = usize::MAX;

/// Polygonal domains with a structured initial mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// `(0,1)^2`
    UnitSquare,
    /// `(-1,1)^2`
    Square2,
    /// `(-2,2)^2 \ [0,2]^2`
    LShapeBartels,
    /// `(-1,1)^2 \ [-1,0]^2`
    LShapeSmall,
}

impl Domain {
    pub const ALL: [Domain; 4] =
        [Domain::UnitSquare, Domain::Square2, Domain::LShapeBartels, Domain::LShapeSmall];

    pub fn name(self) -> &'static str {
        match self {
            Domain::UnitSquare => "unit_square",
            Domain::Square2 => "square2",
            Domain::LShapeBartels => "lshape_bartels",
            Domain::LShapeSmall => "lshape_small",
        }
    }

    /// Lower-left corner, side length of the bounding box, and how many
    /// structured blocks fit along one side.
    fn bounding_box(self) -> (Point, f64, usize) {
        match self {
            Domain::UnitSquare => ([0.0, 0.0], 1.0, 1),
            Domain::Square2 => ([-1.0, -1.0], 2.0, 1),
            Domain::LShapeBartels => ([-2.0, -2.0], 4.0, 2),
            Domain::LShapeSmall => ([-1.0, -1.0], 2.0, 2),
        }
    }

    pub fn diameter(self) -> f64 {
        let (_, side, _) = self.bounding_box();
        side * std::f64::consts::SQRT_2
    }

    pub fn area(self) -> f64 {
        match self {
            Domain::UnitSquare => 1.0,
            Domain::Square2 => 4.0,
            Domain::LShapeBartels => 12.0,
            Domain::LShapeSmall => 3.0,
        }
    }

    /// Open-set membership test.
    pub fn contains(self, p: Point) -> bool {
        let (lo, side, _) = self.bounding_box();
        let inside_box =
            p[0] > lo[0] && p[0] < lo[0] + side && p[1] > lo[1] && p[1] < lo[1] + side;
        inside_box
            && match self {
                Domain::UnitSquare | Domain::Square2 => true,
                Domain::LShapeBartels => !(p[0] >= 0.0 && p[1] >= 0.0),
                Domain::LShapeSmall => !(p[0] <= 0.0 && p[1] <= 0.0),
            }
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Domain::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownDomain(s.to_string()))
    }
}

/// Per-element geometric quantities of an affine triangle.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub corners: [Point; 3],
    pub area: f64,
    pub diameter: f64,
    pub barycentric_gradients: [[f64; 2]; 3],
    /// Length of local edge `k` (opposite vertex `k`).
    pub edge_lengths: [f64; 3],
    /// `+1` if the global normal of local edge `k` points out of the element.
    pub edge_signs: [f64; 3],
}

impl ElementGeometry {
    pub fn point(&self, bary: [f64; 3]) -> Point {
        crate::quadrature::bary_to_point(&self.corners, bary)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    refinement_edge: Vec<u8>,
    boundary_vertex: Vec<bool>,
    edges: Vec<[usize; 2]>,
    element_edges: Vec<[usize; 3]>,
    edge_elements: Vec<[usize; 2]>,
    parent: Vec<usize>,
    generation: Vec<u32>,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[inline]
fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b { (a, b) } else { (b, a) }
}

impl Mesh {
    /// Builds a mesh and assigns each triangle's longest edge as its
    /// refinement edge (ties go to the edge whose opposite vertex has the
    /// smallest global index).
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let refinement_edge = triangles
            .iter()
            .map(|t| {
                let len = |k: usize| dist(vertices[t[(k + 1) % 3]], vertices[t[(k + 2) % 3]]);
                let longest = (0..3).map(len).fold(0.0, f64::max);
                (0..3)
                    .filter(|&k| len(k) >= longest * (1.0 - 1e-12))
                    .min_by_key(|&k| t[k])
                    .unwrap() as u8
            })
            .collect();
        Self::with_refinement_edges(vertices, triangles, refinement_edge)
    }

    /// Builds a mesh with explicitly given refinement edges. Clockwise
    /// triangles are reoriented.
    pub fn with_refinement_edges(
        vertices: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        mut refinement_edge: Vec<u8>,
    ) -> Result<Self> {
        if refinement_edge.len() != triangles.len() {
            return Err(Error::DimensionMismatch {
                expected: triangles.len(),
                actual: refinement_edge.len(),
            });
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) || refinement_edge[t] > 2 {
                return Err(Error::InvalidElement(t));
            }
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a == 0.0 || !a.is_finite() {
                return Err(Error::InvalidElement(t));
            }
            if a < 0.0 {
                tri.swap(1, 2);
                refinement_edge[t] = match refinement_edge[t] {
                    1 => 2,
                    2 => 1,
                    k => k,
                };
            }
        }
        let n = triangles.len();
        Ok(Self::assemble(vertices, triangles, refinement_edge, (0..n).collect(), vec![0; n]))
    }

    fn assemble(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        refinement_edge: Vec<u8>,
        parent: Vec<usize>,
        generation: Vec<u32>,
    ) -> Self {
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges = Vec::with_capacity(triangles.len() * 3 / 2 + 8);
        let mut edge_elements: Vec<[usize; 2]> = Vec::with_capacity(edges.capacity());
        let mut element_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let key = edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_elements.push([NO_ELEMENT, NO_ELEMENT]);
                    edges.len() - 1
                });
                let adj = &mut edge_elements[e];
                if adj[0] == NO_ELEMENT {
                    adj[0] = t;
                } else {
                    adj[1] = t;
                }
                *slot = e;
            }
            element_edges.push(local);
        }
        let mut boundary_vertex = vec![false; vertices.len()];
        for (e, adj) in edge_elements.iter().enumerate() {
            if adj[1] == NO_ELEMENT {
                boundary_vertex[edges[e][0]] = true;
                boundary_vertex[edges[e][1]] = true;
            }
        }
        Mesh {
            vertices,
            triangles,
            refinement_edge,
            boundary_vertex,
            edges,
            element_edges,
            edge_elements,
            parent,
            generation,
        }
    }

    /// Structured triangulation: `n` square cells per block side, each cell
    /// split along its south-west/north-east diagonal.
    pub fn create_structured(domain: Domain, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySubdivision);
        }
        let (lo, side, blocks) = domain.bounding_box();
        let cells = n * blocks;
        let h = side / cells as f64;
        let coord = |i: usize, j: usize| [lo[0] + i as f64 * h, lo[1] + j as f64 * h];

        let mut id = vec![usize::MAX; (cells + 1) * (cells + 1)];
        let mut used_cells = Vec::new();
        for j in 0..cells {
            for i in 0..cells {
                let c = coord(i, j);
                if domain.contains([c[0] + 0.5 * h, c[1] + 0.5 * h]) {
                    used_cells.push((i, j));
                    for (di, dj) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
                        id[(j + dj) * (cells + 1) + i + di] = 0;
                    }
                }
            }
        }
        let mut vertices = Vec::new();
        for j in 0..=cells {
            for i in 0..=cells {
                let slot = &mut id[j * (cells + 1) + i];
                if *slot != usize::MAX {
                    *slot = vertices.len();
                    vertices.push(coord(i, j));
                }
            }
        }
        let v = |i: usize, j: usize| id[j * (cells + 1) + i];
        let mut triangles = Vec::with_capacity(2 * used_cells.len());
        for (i, j) in used_cells {
            let (p00, p10, p11, p01) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
        }
        Self::new(vertices, triangles)
    }

    /// Newest-vertex bisection of the marked elements plus the closure needed
    /// for conformity. Unrefined elements keep their vertex order.
    pub fn refine_nvb(&self, marked: &[usize]) -> Mesh {
        let mut edge_marked = vec![false; self.edges.len()];
        let mut queue = VecDeque::new();
        let mark_edge = |e: usize, edge_marked: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
            if !edge_marked[e] {
                edge_marked[e] = true;
                for &t in &self.edge_elements[e] {
                    if t != NO_ELEMENT {
                        queue.push_back(t);
                    }
                }
            }
        };
        for &t in marked {
            if t < self.triangles.len() {
                mark_edge(self.refinement_edge_id(t), &mut edge_marked, &mut queue);
            }
        }
        while let Some(t) = queue.pop_front() {
            let r = self.refinement_edge_id(t);
            if !edge_marked[r] && self.element_edges[t].iter().any(|&e| edge_marked[e]) {
                mark_edge(r, &mut edge_marked, &mut queue);
            }
        }

        let mut vertices = self.vertices.clone();
        let mut midpoint = HashMap::new();
        for (e, &m) in edge_marked.iter().enumerate() {
            if m {
                let [a, b] = self.edges[e];
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                midpoint.insert((a, b), vertices.len());
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            }
        }
        if midpoint.is_empty() {
            return self.clone();
        }

        let mut triangles = Vec::with_capacity(self.triangles.len() + 2 * midpoint.len());
        let mut refinement_edge = Vec::with_capacity(triangles.capacity());
        let mut parent = Vec::with_capacity(triangles.capacity());
        let mut generation = Vec::with_capacity(triangles.capacity());
        for (t, tri) in self.triangles.iter().enumerate() {
            let k = self.refinement_edge[t] as usize;
            if !edge_marked[self.element_edges[t][k]] {
                triangles.push(*tri);
                refinement_edge.push(self.refinement_edge[t]);
                parent.push(t);
                generation.push(self.generation[t]);
                continue;
            }
            let rotated = [tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]];
            let mut leaves = Vec::with_capacity(4);
            bisect(rotated, self.generation[t], &midpoint, &mut leaves);
            for (child, gen) in leaves {
                triangles.push(child);
                refinement_edge.push(0);
                parent.push(t);
                generation.push(gen);
            }
        }
        Self::assemble(vertices, triangles, refinement_edge, parent, generation)
    }

    /// Two mark-all bisection passes: every element is split into four.
    pub fn refine_uniform(&self) -> Mesh {
        let all: Vec<usize> = (0..self.n_elements()).collect();
        let once = self.refine_nvb(&all);
        let all: Vec<usize> = (0..once.n_elements()).collect();
        let twice = once.refine_nvb(&all);
        // parents relative to `self`
        let parent = twice.parent.iter().map(|&p| once.parent[p]).collect();
        Mesh { parent, ..twice }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn refinement_edges(&self) -> &[u8] {
        &self.refinement_edge
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn boundary_vertices(&self) -> &[bool] {
        &self.boundary_vertex
    }

    /// Global edges as `[low, high]` vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Global edge id of each local edge.
    pub fn element_edges(&self) -> &[[usize; 3]] {
        &self.element_edges
    }

    /// Adjacent elements of each edge; the second entry is [`NO_ELEMENT`] on
    /// the boundary.
    pub fn edge_elements(&self) -> &[[usize; 2]] {
        &self.edge_elements
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_elements[e][1] == NO_ELEMENT
    }

    /// Element of the previous mesh this element was created from.
    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    /// Number of bisections separating each element from the initial mesh.
    pub fn generations(&self) -> &[u32] {
        &self.generation
    }

    fn refinement_edge_id(&self, t: usize) -> usize {
        self.element_edges[t][self.refinement_edge[t] as usize]
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn element_geometry(&self, t: usize) -> ElementGeometry {
        let tri = self.triangles[t];
        let corners = self.corners(t);
        let area = signed_area(corners[0], corners[1], corners[2]);
        let mut barycentric_gradients = [[0.0; 2]; 3];
        let mut edge_lengths = [0.0; 3];
        let mut edge_signs = [0.0; 3];
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let (p, q) = (corners[i], corners[j]);
            barycentric_gradients[k] =
                [(p[1] - q[1]) / (2.0 * area), (q[0] - p[0]) / (2.0 * area)];
            edge_lengths[k] = dist(p, q);
            // counter-clockwise traversal i -> j has outward normal (t_y, -t_x)
            edge_signs[k] = if tri[i] < tri[j] { 1.0 } else { -1.0 };
        }
        let diameter = edge_lengths.iter().copied().fold(0.0, f64::max);
        ElementGeometry { corners, area, diameter, barycentric_gradients, edge_lengths, edge_signs }
    }

    pub fn try_element_geometry(&self, t: usize) -> Result<ElementGeometry> {
        if t >= self.n_elements() {
            return Err(Error::InvalidElement(t));
        }
        Ok(self.element_geometry(t))
    }

    /// Shape-regularity constant `max_T diam(T)^2 / |T|`.
    pub fn shape_constant(&self) -> f64 {
        (0..self.n_elements())
            .map(|t| {
                let g = self.element_geometry(t);
                g.diameter * g.diameter / g.area
            })
            .fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_elements()).map(|t| self.element_geometry(t).area).sum()
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.n_elements()).map(|t| self.element_geometry(t).diameter).fold(0.0, f64::max)
    }

    /// Audits orientation, edge adjacency, and absence of hanging nodes.
    /// Returns a description of the first violation found.
    pub fn check_conformity(&self) -> std::result::Result<(), String> {
        for t in 0..self.n_elements() {
            let c = self.corners(t);
            if signed_area(c[0], c[1], c[2]) <= 0.0 {
                return Err(format!("element {t} is not positively oriented"));
            }
            if self.refinement_edge[t] > 2 {
                return Err(format!("element {t} has invalid refinement edge"));
            }
        }
        let mut count = vec![0usize; self.n_edges()];
        for local in &self.element_edges {
            for &e in local {
                count[e] += 1;
            }
        }
        if let Some(e) = count.iter().position(|&c| c == 0 || c > 2) {
            return Err(format!("edge {e} has {} adjacent elements", count[e]));
        }
        // a hanging node produced by bisection sits at an edge midpoint
        let quantize = |p: Point| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        let positions: HashMap<(i64, i64), usize> =
            self.vertices.iter().enumerate().map(|(i, &p)| (quantize(p), i)).collect();
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            if let Some(v) = positions.get(&quantize(mid)) {
                return Err(format!("vertex {v} hangs on edge {e}"));
            }
        }
        Ok(())
    }

    /// Plain-text dump: header `V E`, then `x y boundary_flag` per vertex and
    /// `v0 v1 v2 refedge` per element.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_vertices(), self.n_elements());
        for (p, &b) in self.vertices.iter().zip(&self.boundary_vertex) {
            let _ = writeln!(out, "{:e} {:e} {}", p[0], p[1], u8::from(b));
        }
        for (t, r) in self.triangles.iter().zip(&self.refinement_edge) {
            let _ = writeln!(out, "{} {} {} {}", t[0], t[1], t[2], r);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::Malformed(format!("mesh text: {what}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("missing header"))?
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("header"))?;
        let [nv, ne] = header[..] else { return Err(bad("header")) };
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = lines.next().ok_or_else(|| bad("truncated vertices"))?;
            let f: Vec<f64> = line
                .split_whitespace()
                .take(2)
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("vertex line"))?;
            if f.len() != 2 {
                return Err(bad("vertex line"));
            }
            vertices.push([f[0], f[1]]);
        }
        let mut triangles = Vec::with_capacity(ne);
        let mut refinement_edge = Vec::with_capacity(ne);
        for _ in 0..ne {
            let line = lines.next().ok_or_else(|| bad("truncated elements"))?;
            let v: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("element line"))?;
            let [a, b, c, r] = v[..] else { return Err(bad("element line")) };
            triangles.push([a, b, c]);
            refinement_edge.push(r as u8);
        }
        Self::with_refinement_edges(vertices, triangles, refinement_edge)
    }
}

/// Bisects `tri` across the edge opposite its first vertex and recurses into
/// children whose refinement edge is also marked.
fn bisect(
    tri: [usize; 3],
    generation: u32,
    midpoint: &HashMap<(usize, usize), usize>,
    out: &mut Vec<([usize; 3], u32)>,
) {
    let [a, b, c] = tri;
    match midpoint.get(&edge_key(b, c)) {
        None => out.push((tri, generation)),
        Some(&m) => {
            bisect([m, a, b], generation + 1, midpoint, out);
            bisect([m, c, a], generation + 1, midpoint, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_triangle() -> Mesh {
        Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn structured_counts() {
        let m = Mesh::create_structured(Domain::UnitSquare, 1).unwrap();
        assert_eq!((m.n_elements(), m.n_vertices()), (2, 4));
        assert_eq!(m.boundary_vertices().iter().filter(|&&b| b).count(), 4);

        let m = Mesh::create_structured(Domain::UnitSquare, 2).unwrap();
        assert_eq!((m.n_elements(), m.n_vertices()), (8, 9));
        assert_eq!(m.boundary_vertices().iter().filter(|&&b| !b).count(), 1);

        let m = Mesh::create_structured(Domain::LShapeSmall, 1).unwrap();
        assert_eq!((m.n_elements(), m.n_vertices()), (6, 8));
        // reentrant corner is a boundary vertex, so no interior vertex exists
        assert!(m.boundary_vertices().iter().all(|&b| b));
    }

    #[test]
    fn structured_meshes_cover_their_domains() {
        for d in Domain::ALL {
            for n in 1..4 {
                let m = Mesh::create_structured(d, n).unwrap();
                assert!((m.total_area() - d.area()).abs() <= 1e-12 * d.area());
                m.check_conformity().unwrap();
            }
        }
    }

    #[test]
    fn unknown_domain_and_zero_subdivision() {
        assert!(matches!("disk".parse::<Domain>(), Err(Error::UnknownDomain(_))));
        assert!(Mesh::create_structured(Domain::UnitSquare, 0).is_err());
    }

    #[test]
    fn diagonal_is_shared_refinement_edge() {
        let m = Mesh::create_structured(Domain::UnitSquare, 1).unwrap();
        let r0 = m.element_edges()[0][m.refinement_edges()[0] as usize];
        let r1 = m.element_edges()[1][m.refinement_edges()[1] as usize];
        assert_eq!(r0, r1);
        assert!(!m.is_boundary_edge(r0));
    }

    #[test]
    fn refine_examples() {
        let m = Mesh::create_structured(Domain::UnitSquare, 1).unwrap();
        assert_eq!(m.refine_nvb(&[]), m);
        let both = m.refine_nvb(&[0, 1]);
        assert_eq!(both.n_elements(), 4);
        both.check_conformity().unwrap();
        // closure: marking one bisects the neighbour across the diagonal too
        let one = m.refine_nvb(&[0]);
        assert_eq!(one.n_elements(), 4);
        one.check_conformity().unwrap();
        assert_eq!(one.n_vertices(), 5);
    }

    #[test]
    fn closure_propagates_through_chain() {
        let m = Mesh::create_structured(Domain::UnitSquare, 4).unwrap().refine_uniform();
        let fine = m.refine_nvb(&[7]).refine_nvb(&[0, 1]).refine_nvb(&[3]);
        fine.check_conformity().unwrap();
        assert!((fine.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_refinement_quadruples() {
        let m = Mesh::create_structured(Domain::LShapeBartels, 1).unwrap();
        let u = m.refine_uniform();
        assert_eq!(u.n_elements(), 4 * m.n_elements());
        assert!(u.parents().iter().all(|&p| p < m.n_elements()));
        for t in 0..m.n_elements() {
            assert_eq!(u.parents().iter().filter(|&&p| p == t).count(), 4);
        }
    }

    #[test]
    fn shape_constant_bounded_under_uniform_refinement() {
        let mut m = Mesh::create_structured(Domain::LShapeSmall, 1).unwrap();
        let kappa0 = m.shape_constant();
        for _ in 0..6 {
            m = m.refine_uniform();
            assert!(m.shape_constant() <= 2.0 * kappa0 + 1e-12);
            assert!((m.total_area() - 3.0).abs() <= 3e-12);
        }
        m.check_conformity().unwrap();
    }

    #[test]
    fn geometry_of_unit_triangle() {
        let g = unit_triangle().element_geometry(0);
        assert!((g.area - 0.5).abs() < 1e-15);
        assert!((g.diameter - 2f64.sqrt()).abs() < 1e-15);
        let expect = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        for k in 0..3 {
            assert!((g.barycentric_gradients[k][0] - expect[k][0]).abs() < 1e-15);
            assert!((g.barycentric_gradients[k][1] - expect[k][1]).abs() < 1e-15);
        }
        let s: [f64; 2] = g
            .barycentric_gradients
            .iter()
            .fold([0.0, 0.0], |acc, d| [acc[0] + d[0], acc[1] + d[1]]);
        assert!(s[0].abs() < 1e-15 && s[1].abs() < 1e-15);
    }

    #[test]
    fn geometry_scales_affinely() {
        let m = Mesh::new(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]], vec![[0, 1, 2]]).unwrap();
        let g = m.element_geometry(0);
        assert!((g.area - 2.0).abs() < 1e-15);
        assert!((g.barycentric_gradients[0][0] + 0.5).abs() < 1e-15);
        assert!((g.barycentric_gradients[1][0] - 0.5).abs() < 1e-15);
        assert!(m.try_element_geometry(1).is_err());
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let m = Mesh::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        assert!(m.element_geometry(0).area > 0.0);
        // longest edge is still the hypotenuse
        let r = m.refinement_edges()[0] as usize;
        assert!((m.element_geometry(0).edge_lengths[r] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let m = Mesh::create_structured(Domain::LShapeSmall, 2).unwrap().refine_nvb(&[0, 5]);
        let text = m.to_text();
        assert!(text.starts_with(&format!("{} {}\n", m.n_vertices(), m.n_elements())));
        let back = Mesh::from_text(&text).unwrap();
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.refinement_edges(), m.refinement_edges());
        assert_eq!(back.vertices(), m.vertices());
        assert!(Mesh::from_text("3").is_err());
    }
}
