//! Triangulated planar domains with an oriented boundary loop, outward
//! normals and the quadrature weights used by the solvers.
//!
//! A [`Mesh`] is immutable once built. All constructors go through
//! [`Mesh::from_parts`], which checks the structural invariants: positive
//! triangle orientation, a single closed boundary loop whose edges each belong
//! to exactly one triangle, and outward unit normals.

mod build;
mod io;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use build::{build_disk_mesh, build_polygon_mesh, disk_mesh_for_spacing, refine};
pub use io::{mesh_hash, parse_mesh_text, read_mesh, write_mesh, write_mesh_text};

pub type Point = [f64; 2];

/// Geometry the boundary nodes approximate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryShape {
    /// Straight-sided polygon; refinement keeps new nodes on the edges.
    Polygon,
    /// Inscribed polygon of a circle; refinement snaps new boundary nodes to the circle.
    Circle { center: Point, radius: f64 },
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    /// Boundary node indices in counterclockwise order; the loop closes from
    /// the last node back to the first.
    boundary_nodes: Vec<usize>,
    boundary_edges: Vec<[usize; 2]>,
    /// Length of each boundary edge.
    edge_weights: Vec<f64>,
    /// Trapezoid weight of each boundary node (half of the two adjacent edges).
    node_weights: Vec<f64>,
    /// Area of each triangle.
    interior_weights: Vec<f64>,
    normals: Vec<Point>,
    /// `boundary_slot[v]` is the position of vertex `v` in `boundary_nodes`.
    boundary_slot: Vec<Option<usize>>,
    shape: BoundaryShape,
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Mesh {
    /// Assembles a mesh from raw parts and validates every invariant.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_loop: Vec<usize>,
        shape: BoundaryShape,
    ) -> Result<Mesh> {
        let n = vertices.len();
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        if boundary_loop.len() < 3 {
            return Err(Error::InvalidMesh("boundary loop has fewer than 3 nodes".into()));
        }
        let mut interior_weights = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has non-positive signed area {area:e}"
                )));
            }
            interior_weights.push(area);
        }

        // Directed half-edges -> owning triangle. An undirected edge seen once is
        // a boundary edge; seen twice it must appear with opposite orientations.
        let mut half_edges: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let e = (tri[k], tri[(k + 1) % 3]);
                if half_edges.insert(e, t).is_some() {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({}, {}) appears twice with the same orientation",
                        e.0, e.1
                    )));
                }
            }
        }

        let mut boundary_slot = vec![None; n];
        for (slot, &v) in boundary_loop.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidMesh(format!("boundary node {v} out of range")));
            }
            if boundary_slot[v].replace(slot).is_some() {
                return Err(Error::InvalidMesh(format!("boundary node {v} repeated in loop")));
            }
        }

        let nb = boundary_loop.len();
        let mut boundary_edges = Vec::with_capacity(nb);
        let mut edge_weights = Vec::with_capacity(nb);
        let mut normals = Vec::with_capacity(nb);
        for i in 0..nb {
            let a = boundary_loop[i];
            let b = boundary_loop[(i + 1) % nb];
            let Some(&t) = half_edges.get(&(a, b)) else {
                return Err(Error::InvalidMesh(format!(
                    "boundary edge ({a}, {b}) is not a counterclockwise triangle edge"
                )));
            };
            if half_edges.contains_key(&(b, a)) {
                return Err(Error::InvalidMesh(format!(
                    "boundary edge ({a}, {b}) is shared by two triangles"
                )));
            }
            let (pa, pb) = (vertices[a], vertices[b]);
            let len = dist(pa, pb);
            let normal = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
            let tri = triangles[t];
            let centroid = [
                (vertices[tri[0]][0] + vertices[tri[1]][0] + vertices[tri[2]][0]) / 3.0,
                (vertices[tri[0]][1] + vertices[tri[1]][1] + vertices[tri[2]][1]) / 3.0,
            ];
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            if normal[0] * (mid[0] - centroid[0]) + normal[1] * (mid[1] - centroid[1]) <= 0.0 {
                return Err(Error::InvalidMesh(format!("normal of boundary edge ({a}, {b}) points inward")));
            }
            boundary_edges.push([a, b]);
            edge_weights.push(len);
            normals.push(normal);
        }

        // Every unmatched half-edge must lie on the loop.
        for &(a, b) in half_edges.keys() {
            if !half_edges.contains_key(&(b, a)) {
                let on_loop = matches!((boundary_slot[a], boundary_slot[b]),
                    (Some(i), Some(j)) if (i + 1) % nb == j);
                if !on_loop {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({a}, {b}) lies on the boundary but is missing from the loop"
                    )));
                }
            }
        }

        let node_weights = (0..nb)
            .map(|i| 0.5 * (edge_weights[i] + edge_weights[(i + nb - 1) % nb]))
            .collect();

        Ok(Mesh {
            vertices,
            triangles,
            boundary_nodes: boundary_loop,
            boundary_edges,
            edge_weights,
            node_weights,
            interior_weights,
            normals,
            boundary_slot,
            shape,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    /// Boundary edges in loop order; edge `i` joins boundary node `i` to node `i + 1`.
    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    /// Trapezoid quadrature weights per boundary node, in loop order.
    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    pub fn interior_weights(&self) -> &[f64] {
        &self.interior_weights
    }

    pub fn normals(&self) -> &[Point] {
        &self.normals
    }

    pub fn shape(&self) -> BoundaryShape {
        self.shape
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary_nodes.len()
    }

    pub fn interior_count(&self) -> usize {
        self.vertices.len() - self.boundary_nodes.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_slot[v].is_some()
    }

    /// Position of vertex `v` in the boundary loop, if it is a boundary node.
    pub fn boundary_slot(&self, v: usize) -> Option<usize> {
        self.boundary_slot[v]
    }

    /// |∂Ω| of the polygonal boundary.
    pub fn perimeter(&self) -> f64 {
        self.edge_weights.iter().sum()
    }

    /// |Ω| of the triangulated region.
    pub fn area(&self) -> f64 {
        self.interior_weights.iter().sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| dist(self.vertices[a], self.vertices[b]))
            .fold(0.0, f64::max)
    }

    pub fn centroid(&self) -> Point {
        let mut c = [0.0, 0.0];
        for (tri, &w) in self.triangles.iter().zip(&self.interior_weights) {
            for &v in tri {
                c[0] += w * self.vertices[v][0] / 3.0;
                c[1] += w * self.vertices[v][1] / 3.0;
            }
        }
        let a = self.area();
        [c[0] / a, c[1] / a]
    }

    /// Weighted average of the two edge normals meeting at each boundary node.
    ///
    /// This is the normal seen by lumped boundary quadrature: the consistent
    /// flux of a linear function `u` at node `i` equals `∇u · node_normals()[i]`.
    /// At corners the vector is not of unit length.
    pub fn node_normals(&self) -> Vec<Point> {
        let nb = self.boundary_count();
        (0..nb)
            .map(|i| {
                let prev = (i + nb - 1) % nb;
                let (lp, ln) = (self.edge_weights[prev], self.edge_weights[i]);
                let w = self.node_weights[i];
                [
                    0.5 * (lp * self.normals[prev][0] + ln * self.normals[i][0]) / w,
                    0.5 * (lp * self.normals[prev][1] + ln * self.normals[i][1]) / w,
                ]
            })
            .collect()
    }

    /// Cumulative arclength of each boundary node measured from the first node.
    pub fn boundary_arclength(&self) -> Vec<f64> {
        let mut s = 0.0;
        let mut out = Vec::with_capacity(self.boundary_count());
        for len in &self.edge_weights {
            out.push(s);
            s += len;
        }
        out
    }

    /// Coordinates of the boundary nodes in loop order.
    pub fn boundary_points(&self) -> Vec<Point> {
        self.boundary_nodes.iter().map(|&v| self.vertices[v]).collect()
    }

    /// Distance from `p` to the polygonal boundary.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.boundary_edges
            .iter()
            .map(|&[a, b]| segment_distance(p, self.vertices[a], self.vertices[b]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Finds a triangle containing `p` and the barycentric coordinates of `p` in it.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let tol = 1e-12;
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|v| self.vertices[v]);
            let area = self.interior_weights[t];
            let l0 = signed_area(p, b, c) / area;
            let l1 = signed_area(a, p, c) / area;
            let l2 = 1.0 - l0 - l1;
            if l0 >= -tol && l1 >= -tol && l2 >= -tol {
                return Some((t, [l0, l1, l2]));
            }
        }
        None
    }

    /// Linear interpolation of a vertex field at `p`.
    pub fn interpolate(&self, values: &[f64], p: Point) -> Option<f64> {
        assert_eq!(values.len(), self.vertex_count());
        self.locate(p).map(|(t, l)| {
            let tri = self.triangles[t];
            l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]]
        })
    }

    /// Returns a copy with every vertex mapped through `f`. The map must
    /// preserve orientation (rigid motions, positive scalings).
    pub fn transformed(&self, f: impl Fn(Point) -> Point, shape: BoundaryShape) -> Result<Mesh> {
        Mesh::from_parts(
            self.vertices.iter().map(|&p| f(p)).collect(),
            self.triangles.clone(),
            self.boundary_nodes.clone(),
            shape,
        )
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}
