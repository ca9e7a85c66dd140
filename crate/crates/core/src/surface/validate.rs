use std::collections::HashMap;

use serde::Serialize;

use super::{triangulate, PolygonMesh, SurfaceError};
use crate::geom::{Point3, Vec3};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub vertices: usize,
    pub faces: usize,
    pub triangles: usize,
    /// Edges used by exactly one face.
    pub boundary_edges: usize,
    /// Edges used by more than two faces.
    pub non_manifold_edges: usize,
    /// Manifold edges traversed in the same direction by both faces.
    pub inconsistent_edges: usize,
    pub components: usize,
    pub area: f64,
    /// Pairs of triangles with no common vertex that touch or cross.
    pub self_intersections: usize,
}

impl ValidationReport {
    pub fn is_watertight(&self) -> bool {
        self.boundary_edges == 0 && self.non_manifold_edges == 0
    }

    pub fn is_clean(&self) -> bool {
        self.is_watertight() && self.inconsistent_edges == 0 && self.self_intersections == 0
    }
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

/// Topological and geometric checks on a polygon mesh. Edges are counted on
/// the polygon faces; intersections on their triangulation, with vertices at
/// identical positions treated as one.
pub fn validate(mesh: &PolygonMesh) -> Result<ValidationReport, SurfaceError> {
    let mut edges: HashMap<(usize, usize), (usize, i32)> = HashMap::new();
    for face in &mesh.faces {
        for i in 0..face.len() {
            let (a, b) = (face[i], face[(i + 1) % face.len()]);
            let e = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
            e.0 += 1;
            e.1 += if a < b { 1 } else { -1 };
        }
    }
    let boundary_edges = edges.values().filter(|e| e.0 == 1).count();
    let non_manifold_edges = edges.values().filter(|e| e.0 > 2).count();
    let inconsistent_edges = edges.values().filter(|e| e.0 == 2 && e.1 != 0).count();

    // components over faces sharing a vertex index
    let mut parent: Vec<usize> = (0..mesh.faces.len()).collect();
    let mut first_face = vec![usize::MAX; mesh.vertices.len()];
    for (f, face) in mesh.faces.iter().enumerate() {
        for &v in face {
            if first_face[v] == usize::MAX {
                first_face[v] = f;
            } else {
                let (a, b) = (find(&mut parent, first_face[v]), find(&mut parent, f));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let components = (0..mesh.faces.len()).filter(|&f| find(&mut parent, f) == f).count();

    let tri = triangulate(mesh)?;
    Ok(ValidationReport {
        vertices: mesh.vertices.len(),
        faces: mesh.faces.len(),
        triangles: tri.faces.len(),
        boundary_edges,
        non_manifold_edges,
        inconsistent_edges,
        components,
        area: mesh.area(),
        self_intersections: count_intersections(&tri),
    })
}

fn count_intersections(tri: &PolygonMesh) -> usize {
    let mut weld: HashMap<[u64; 3], usize> = HashMap::new();
    let ids: Vec<usize> = tri
        .vertices
        .iter()
        .map(|p| {
            let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
            let n = weld.len();
            *weld.entry(key).or_insert(n)
        })
        .collect();
    let boxes: Vec<([f64; 3], [f64; 3])> = tri
        .faces
        .iter()
        .map(|t| {
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for &v in t {
                for i in 0..3 {
                    lo[i] = lo[i].min(tri.vertices[v][i]);
                    hi[i] = hi[i].max(tri.vertices[v][i]);
                }
            }
            (lo, hi)
        })
        .collect();
    let mut order: Vec<usize> = (0..tri.faces.len()).collect();
    order.sort_by(|&a, &b| boxes[a].0[0].total_cmp(&boxes[b].0[0]));
    let mut count = 0;
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            if boxes[b].0[0] > boxes[a].1[0] + TOL {
                break;
            }
            if (1..3).any(|i| boxes[b].0[i] > boxes[a].1[i] + TOL || boxes[a].0[i] > boxes[b].1[i] + TOL) {
                continue;
            }
            let ta = &tri.faces[a];
            let tb = &tri.faces[b];
            if ta.iter().any(|&u| tb.iter().any(|&w| ids[u] == ids[w])) {
                continue;
            }
            let pa = [tri.vertices[ta[0]], tri.vertices[ta[1]], tri.vertices[ta[2]]];
            let pb = [tri.vertices[tb[0]], tri.vertices[tb[1]], tri.vertices[tb[2]]];
            if triangles_intersect(&pa, &pb) {
                count += 1;
            }
        }
    }
    count
}

/// Whether two triangles touch or cross, within a small absolute tolerance.
pub fn triangles_intersect(a: &[Point3; 3], b: &[Point3; 3]) -> bool {
    (0..3).any(|i| segment_hits_triangle(&a[i], &a[(i + 1) % 3], b))
        || (0..3).any(|i| segment_hits_triangle(&b[i], &b[(i + 1) % 3], a))
}

fn drop_axis(n: &Vec3) -> (usize, usize) {
    let m = n.iamax();
    ((m + 1) % 3, (m + 2) % 3)
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn point_in_triangle_2d(p: [f64; 2], t: &[[f64; 2]; 3], tol: f64) -> bool {
    let d = [cross2(t[0], t[1], p), cross2(t[1], t[2], p), cross2(t[2], t[0], p)];
    let area = cross2(t[0], t[1], t[2]);
    let s = area.signum();
    d.iter().all(|&x| x * s >= -tol)
}

fn segments_cross_2d(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2], tol: f64) -> bool {
    let d1 = cross2(a, b, p);
    let d2 = cross2(a, b, q);
    let d3 = cross2(p, q, a);
    let d4 = cross2(p, q, b);
    d1 * d2 <= tol && d3 * d4 <= tol && {
        // reject collinear disjoint pairs through a bounding-box check
        let lo = |u: f64, v: f64| u.min(v);
        let hi = |u: f64, v: f64| u.max(v);
        (0..2).all(|i| lo(p[i], q[i]) <= hi(a[i], b[i]) + TOL && lo(a[i], b[i]) <= hi(p[i], q[i]) + TOL)
    }
}

fn segment_hits_triangle(p: &Point3, q: &Point3, t: &[Point3; 3]) -> bool {
    let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
    let nn = n.norm();
    if nn < 1e-300 {
        return false;
    }
    let unit = n / nn;
    let dp = unit.dot(&(p - t[0]));
    let dq = unit.dot(&(q - t[0]));
    if (dp > TOL && dq > TOL) || (dp < -TOL && dq < -TOL) {
        return false;
    }
    let (i, j) = drop_axis(&n);
    let to2 = |x: &Point3| [x[i], x[j]];
    let t2 = [to2(&t[0]), to2(&t[1]), to2(&t[2])];
    let tol2 = TOL * nn.sqrt();
    if dp.abs() <= TOL && dq.abs() <= TOL {
        let (p2, q2) = (to2(p), to2(q));
        return point_in_triangle_2d(p2, &t2, tol2)
            || point_in_triangle_2d(q2, &t2, tol2)
            || (0..3).any(|k| segments_cross_2d(p2, q2, t2[k], t2[(k + 1) % 3], tol2 * tol2));
    }
    let s = dp / (dp - dq);
    let x = p + (q - p) * s.clamp(0.0, 1.0);
    point_in_triangle_2d(to2(&x), &t2, tol2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::tests::cube_mesh;

    fn box_mesh(lo: [f64; 3], hi: [f64; 3]) -> PolygonMesh {
        let v = |x: usize, y: usize, z: usize| {
            Point3::new(if x == 1 { hi[0] } else { lo[0] }, if y == 1 { hi[1] } else { lo[1] }, if z == 1 { hi[2] } else { lo[2] })
        };
        let vertices: Vec<Point3> = (0..8).map(|i| v(i & 1, i >> 1 & 1, i >> 2 & 1)).collect();
        let faces = vec![
            vec![0, 2, 3, 1],
            vec![4, 5, 7, 6],
            vec![0, 1, 5, 4],
            vec![2, 6, 7, 3],
            vec![0, 4, 6, 2],
            vec![1, 3, 7, 5],
        ];
        PolygonMesh { vertices, faces, origins: vec![] }
    }

    #[test]
    fn closed_cube_is_clean() {
        let r = validate(&cube_mesh()).unwrap();
        assert_eq!(r.boundary_edges, 0);
        assert_eq!(r.non_manifold_edges, 0);
        assert_eq!(r.inconsistent_edges, 0);
        assert_eq!(r.components, 1);
        assert_eq!(r.self_intersections, 0);
        assert!((r.area - 24.0).abs() < 1e-12);
        assert!(validate(&box_mesh([0.; 3], [1.; 3])).unwrap().is_clean());
    }

    #[test]
    fn missing_face_leaves_four_boundary_edges() {
        let mut m = cube_mesh();
        m.faces.pop();
        m.origins.pop();
        let r = validate(&m).unwrap();
        assert_eq!(r.boundary_edges, 4);
        assert!(!r.is_watertight());
    }

    #[test]
    fn interpenetrating_boxes_intersect() {
        let a = box_mesh([0.; 3], [2.; 3]);
        let b = box_mesh([1.; 3], [3.; 3]);
        let mut m = a.clone();
        m.vertices.extend(b.vertices);
        m.faces.extend(b.faces.iter().map(|f| f.iter().map(|v| v + 8).collect()));
        let r = validate(&m).unwrap();
        assert!(r.self_intersections > 0);
        assert_eq!(r.components, 2);
        assert_eq!(r.boundary_edges, 0);
    }

    #[test]
    fn separate_boxes_do_not_intersect() {
        let a = box_mesh([0.; 3], [1.; 3]);
        let b = box_mesh([1.5, 0., 0.], [2.5, 1., 1.]);
        let mut m = a.clone();
        m.vertices.extend(b.vertices);
        m.faces.extend(b.faces.iter().map(|f| f.iter().map(|v| v + 8).collect()));
        assert_eq!(validate(&m).unwrap().self_intersections, 0);
    }

    #[test]
    fn flipped_face_is_inconsistent() {
        let mut m = cube_mesh();
        m.faces[0].reverse();
        assert_eq!(validate(&m).unwrap().inconsistent_edges, 4);
    }

    #[test]
    fn triangle_pairs() {
        let t = |a: [f64; 3], b: [f64; 3], c: [f64; 3]| [Point3::from(a), Point3::from(b), Point3::from(c)];
        let base = t([0., 0., 0.], [2., 0., 0.], [0., 2., 0.]);
        // piercing
        assert!(triangles_intersect(&base, &t([0.5, 0.5, -1.], [0.5, 0.5, 1.], [1.5, 1.5, 1.])));
        // above
        assert!(!triangles_intersect(&base, &t([0., 0., 1.], [2., 0., 1.], [0., 2., 1.])));
        // coplanar overlapping
        assert!(triangles_intersect(&base, &t([0.5, 0.5, 0.], [3., 0.5, 0.], [0.5, 3., 0.])));
        // coplanar disjoint
        assert!(!triangles_intersect(&base, &t([3., 3., 0.], [4., 3., 0.], [3., 4., 0.])));
        // touching at a vertex
        assert!(triangles_intersect(&base, &t([1., 1., 0.], [1., 1., 1.], [2., 2., 1.])));
    }
}
