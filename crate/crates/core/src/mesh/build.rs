use std::collections::HashMap;
use std::f64::consts::PI;

use super::{signed_area, BoundaryShape, Mesh, Point};
use crate::error::{Error, Result};

/// Radial placement of the disk rings; spacing shrinks toward the boundary
/// (`dr` is 1.25x the mean at the center and 0.75x at the rim).
fn ring_radius(t: f64) -> f64 {
    t * (1.25 - 0.25 * t)
}

/// Triangulates the regular `n_angular`-gon inscribed in the circle of the
/// given radius, centered at the origin.
///
/// Rings of nodes sit at graded radii with node counts proportional to the
/// ring radius; neighboring rings are stitched by merging their angular
/// orderings. The first boundary node is `(radius, 0)`.
pub fn build_disk_mesh(radius: f64, n_radial: usize, n_angular: usize) -> Result<Mesh> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::param("radius", format!("must be positive, got {radius}")));
    }
    if n_angular < 3 {
        return Err(Error::param("n_angular", format!("must be at least 3, got {n_angular}")));
    }
    if n_radial < 1 {
        return Err(Error::param("n_radial", "must be at least 1"));
    }

    let mut vertices: Vec<Point> = vec![[0.0, 0.0]];
    let mut rings: Vec<(Vec<usize>, Vec<f64>)> = Vec::with_capacity(n_radial);
    for k in 1..=n_radial {
        let t = k as f64 / n_radial as f64;
        let r = radius * ring_radius(t);
        let count = if k == n_radial {
            n_angular
        } else {
            ((n_angular as f64 * r / radius).round() as usize).clamp(3, n_angular)
        };
        let mut ids = Vec::with_capacity(count);
        let mut angles = Vec::with_capacity(count);
        for i in 0..count {
            let phi = 2.0 * PI * i as f64 / count as f64;
            let p = if k == n_radial {
                // Exact circle points; avoids drift from the ring parametrization.
                [radius * phi.cos(), radius * phi.sin()]
            } else {
                [r * phi.cos(), r * phi.sin()]
            };
            ids.push(vertices.len());
            vertices.push(p);
            angles.push(phi);
        }
        rings.push((ids, angles));
    }

    let mut triangles = Vec::new();
    let first = &rings[0].0;
    for i in 0..first.len() {
        triangles.push([0, first[i], first[(i + 1) % first.len()]]);
    }
    for w in rings.windows(2) {
        stitch_rings(&w[0], &w[1], &mut triangles);
    }

    let boundary = rings.last().map(|r| r.0.clone()).unwrap_or_default();
    Mesh::from_parts(
        vertices,
        triangles,
        boundary,
        BoundaryShape::Circle {
            center: [0.0, 0.0],
            radius,
        },
    )
}

fn stitch_rings(inner: &(Vec<usize>, Vec<f64>), outer: &(Vec<usize>, Vec<f64>), out: &mut Vec<[usize; 3]>) {
    let (iv, ia) = inner;
    let (ov, oa) = outer;
    let (m, n) = (iv.len(), ov.len());
    let angle = |a: &[f64], k: usize| if k == a.len() { 2.0 * PI } else { a[k] };
    let (mut i, mut j) = (0, 0);
    while i < m || j < n {
        let advance_inner = j == n || (i < m && angle(ia, i + 1) <= angle(oa, j + 1));
        if advance_inner {
            out.push([iv[i % m], ov[j % n], iv[(i + 1) % m]]);
            i += 1;
        } else {
            out.push([iv[i % m], ov[j % n], ov[(j + 1) % n]]);
            j += 1;
        }
    }
}

/// Disk mesh whose boundary spacing and mean radial spacing are close to `h`.
pub fn disk_mesh_for_spacing(radius: f64, h: f64) -> Result<Mesh> {
    if !(h > 0.0) {
        return Err(Error::param("h", format!("must be positive, got {h}")));
    }
    let n_angular = ((2.0 * PI * radius / h).ceil() as usize).max(6);
    let n_radial = ((radius / h).ceil() as usize).max(1);
    build_disk_mesh(radius, n_radial, n_angular)
}

/// Triangulates a convex counterclockwise polygon so that no edge is longer
/// than `2 * target_h`.
///
/// The polygon is fanned from its vertex centroid, refined uniformly and
/// made locally Delaunay by edge flips after every refinement.
pub fn build_polygon_mesh(vertices: &[Point], target_h: f64) -> Result<Mesh> {
    if !(target_h > 0.0) || !target_h.is_finite() {
        return Err(Error::param("target_h", format!("must be positive, got {target_h}")));
    }
    validate_polygon(vertices)?;

    let n = vertices.len();
    let center = [
        vertices.iter().map(|p| p[0]).sum::<f64>() / n as f64,
        vertices.iter().map(|p| p[1]).sum::<f64>() / n as f64,
    ];
    let mut pts = vertices.to_vec();
    pts.push(center);
    let triangles = (0..n).map(|i| [i, (i + 1) % n, n]).collect();
    let mut mesh = Mesh::from_parts(pts, triangles, (0..n).collect(), BoundaryShape::Polygon)?;
    mesh = delaunay_flips(&mesh)?;
    while mesh.max_edge_length() > 2.0 * target_h {
        mesh = delaunay_flips(&refine(&mesh))?;
    }
    Ok(mesh)
}

fn validate_polygon(v: &[Point]) -> Result<()> {
    let n = v.len();
    if n < 3 {
        return Err(Error::InvalidGeometry(format!("polygon needs at least 3 vertices, got {n}")));
    }
    if v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::InvalidGeometry("non-finite vertex coordinate".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            if v[i] == v[j] {
                return Err(Error::InvalidGeometry(format!("vertices {i} and {j} coincide")));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if !adjacent && segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::InvalidGeometry(format!(
                    "polygon is not simple: edges {i} and {j} intersect"
                )));
            }
        }
    }
    let area: f64 = (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            0.5 * (a[0] * b[1] - b[0] * a[1])
        })
        .sum();
    if !(area > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "polygon must be counterclockwise (signed area {area:e})"
        )));
    }
    for i in 0..n {
        let turn = signed_area(v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
        if turn < 0.0 {
            return Err(Error::ConvexityRequired(format!("reflex angle at vertex {i}")));
        }
    }
    Ok(())
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let o1 = signed_area(p1, p2, q1);
    let o2 = signed_area(p1, p2, q2);
    let o3 = signed_area(q1, q2, p1);
    let o4 = signed_area(q1, q2, p2);
    if (o1 > 0.0) != (o2 > 0.0) && (o3 > 0.0) != (o4 > 0.0) && o1 != 0.0 && o2 != 0.0 && o3 != 0.0 && o4 != 0.0 {
        return true;
    }
    let on_segment = |a: Point, b: Point, p: Point| {
        p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
    };
    (o1 == 0.0 && on_segment(p1, p2, q1))
        || (o2 == 0.0 && on_segment(p1, p2, q2))
        || (o3 == 0.0 && on_segment(q1, q2, p1))
        || (o4 == 0.0 && on_segment(q1, q2, p2))
}

/// Uniform midpoint refinement: every triangle splits into four.
///
/// Existing vertices keep their indices; edge midpoints are appended in
/// order of first appearance. On circle meshes the new boundary midpoints are
/// projected radially onto the circle.
pub fn refine(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices().to_vec();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let shape = mesh.shape();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            let (pa, pb) = (vertices[a], vertices[b]);
            let mut p = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            if let BoundaryShape::Circle { center, radius } = shape {
                if mesh.is_boundary(a) && mesh.is_boundary(b) && is_loop_edge(mesh, a, b) {
                    let d = [p[0] - center[0], p[1] - center[1]];
                    let s = radius / d[0].hypot(d[1]);
                    p = [center[0] + s * d[0], center[1] + s * d[1]];
                }
            }
            vertices.push(p);
            vertices.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(4 * mesh.triangles().len());
    for &[a, b, c] in mesh.triangles() {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }

    let mut boundary = Vec::with_capacity(2 * mesh.boundary_count());
    for &[a, b] in mesh.boundary_edges() {
        boundary.push(a);
        boundary.push(midpoint[&(a.min(b), a.max(b))]);
    }

    Mesh::from_parts(vertices, triangles, boundary, shape)
        .expect("midpoint refinement of a valid mesh is valid")
}

fn is_loop_edge(mesh: &Mesh, a: usize, b: usize) -> bool {
    let nb = mesh.boundary_count();
    match (mesh.boundary_slot(a), mesh.boundary_slot(b)) {
        (Some(i), Some(j)) => (i + 1) % nb == j || (j + 1) % nb == i,
        _ => false,
    }
}

/// Lawson flipping of interior edges until every edge is locally Delaunay.
fn delaunay_flips(mesh: &Mesh) -> Result<Mesh> {
    let v = mesh.vertices();
    let mut tris = mesh.triangles().to_vec();
    let scale = mesh.max_edge_length().powi(4);
    for _pass in 0..1000 {
        let mut owner: HashMap<(usize, usize), (usize, usize)> = HashMap::with_capacity(3 * tris.len());
        for (t, tri) in tris.iter().enumerate() {
            for k in 0..3 {
                owner.insert((tri[k], tri[(k + 1) % 3]), (t, k));
            }
        }
        let mut touched = vec![false; tris.len()];
        let mut flipped = false;
        for t1 in 0..tris.len() {
            for k in 0..3 {
                if touched[t1] {
                    break;
                }
                let [a, b] = [tris[t1][k], tris[t1][(k + 1) % 3]];
                let c = tris[t1][(k + 2) % 3];
                let Some(&(t2, k2)) = owner.get(&(b, a)) else { continue };
                if touched[t2] {
                    continue;
                }
                let d = tris[t2][(k2 + 2) % 3];
                if in_circle(v[a], v[b], v[c], v[d]) <= 1e-12 * scale {
                    continue;
                }
                if signed_area(v[a], v[d], v[c]) <= 0.0 || signed_area(v[d], v[b], v[c]) <= 0.0 {
                    continue;
                }
                tris[t1] = [a, d, c];
                tris[t2] = [d, b, c];
                touched[t1] = true;
                touched[t2] = true;
                flipped = true;
            }
        }
        if !flipped {
            return Mesh::from_parts(v.to_vec(), tris, mesh.boundary_nodes().to_vec(), mesh.shape());
        }
    }
    Err(Error::InvalidMesh("edge flipping did not terminate".into()))
}

/// Positive when `d` lies strictly inside the circumcircle of the
/// counterclockwise triangle `(a, b, c)`.
fn in_circle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}
