//! Boundary surface between full and empty cells, its triangulation,
//! structural validation and mesh file formats.

mod io;
mod validate;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::arrangement::CellComplex;
use crate::geom::{Point3, Vec3};

pub use io::{load_mesh, parse_obj, parse_off, save_mesh, to_obj_string, to_off_string, MeshFormat, MeshIoError};
pub use validate::{triangles_intersect, validate, ValidationReport};

/// Where a mesh face comes from in the complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FaceOrigin {
    pub face: usize,
    pub plane: usize,
    pub full: usize,
    /// `None` for faces on the bounding box.
    pub empty: Option<usize>,
}

/// Polygon mesh with faces oriented so that their normal points from full
/// space into empty space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolygonMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<Vec<usize>>,
    /// Per face; empty for meshes not extracted from a complex.
    pub origins: Vec<FaceOrigin>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("face {0} is not a convex polygon")]
    NonConvexFace(usize),
    #[error("labeling has {got} cells, complex has {expected}")]
    WrongLength { got: usize, expected: usize },
}

fn polygon_normal(pts: &[Point3]) -> Vec3 {
    let mut n = Vec3::zeros();
    for i in 0..pts.len() {
        n += pts[i].coords.cross(&pts[(i + 1) % pts.len()].coords);
    }
    0.5 * n
}

impl PolygonMesh {
    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn face_points(&self, f: usize) -> Vec<Point3> {
        self.faces[f].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Area-weighted normal of face `f` (length = area).
    pub fn face_normal(&self, f: usize) -> Vec3 {
        polygon_normal(&self.face_points(f))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        self.face_normal(f).norm()
    }

    pub fn area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn triangle_count(&self) -> usize {
        self.faces.iter().map(|f| f.len().saturating_sub(2)).sum()
    }
}

/// Options for [`extract_surface_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractOptions {
    /// Emit faces on the bounding box that close off full cells.
    pub box_faces: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { box_faces: true }
    }
}

pub fn extract_surface(complex: &CellComplex, labeling: &[bool]) -> Result<PolygonMesh, SurfaceError> {
    extract_surface_with(complex, labeling, ExtractOptions::default())
}

struct Dsu(HashMap<usize, usize>);

impl Dsu {
    fn find(&mut self, a: usize) -> usize {
        let p = *self.0.get(&a).unwrap_or(&a);
        if p == a {
            return a;
        }
        let r = self.find(p);
        self.0.insert(a, r);
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0.insert(ra.max(rb), ra.min(rb));
        }
    }
}

/// One mesh face per complex face whose two cells differ in occupancy.
/// Vertices are shared through the complex, except where full cells meet
/// only along an edge or at a vertex: there each locally connected group
/// of full cells gets its own copy, which keeps every mesh edge manifold.
pub fn extract_surface_with(
    complex: &CellComplex,
    labeling: &[bool],
    options: ExtractOptions,
) -> Result<PolygonMesh, SurfaceError> {
    if labeling.len() != complex.cell_count() {
        return Err(SurfaceError::WrongLength { got: labeling.len(), expected: complex.cell_count() });
    }
    let mut emitted: Vec<(usize, FaceOrigin)> = Vec::new();
    for (f, face) in complex.faces().iter().enumerate() {
        let origin = match (face.negative, face.positive) {
            (Some(a), Some(b)) if labeling[a] != labeling[b] => {
                let (full, empty) = if labeling[a] { (a, b) } else { (b, a) };
                FaceOrigin { face: f, plane: face.plane, full, empty: Some(empty) }
            }
            (Some(c), None) | (None, Some(c)) if options.box_faces && labeling[c] => {
                FaceOrigin { face: f, plane: face.plane, full: c, empty: None }
            }
            _ => continue,
        };
        emitted.push((f, origin));
    }

    // Around each vertex, emitted faces are chained through the edges they
    // share; every chain is one sheet and gets its own vertex copy. Along an
    // edge, the faces bounding one run of consecutive full cells are chained.
    let mut slot = vec![usize::MAX; complex.faces().len()];
    for (i, &(f, _)) in emitted.iter().enumerate() {
        slot[f] = i;
    }
    let mut sheets: Vec<HashMap<usize, usize>> = vec![HashMap::new(); emitted.len()];
    let mut at_vertex: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &(f, _)) in emitted.iter().enumerate() {
        for &v in &complex.faces()[f].vertices {
            at_vertex.entry(v).or_default().push(i);
        }
    }
    for &v in at_vertex.keys() {
        let mut dsu = Dsu(HashMap::new());
        for &e in complex.vertex_edges(v) {
            let edge = &complex.edges()[e];
            let mut runs = Dsu(HashMap::new());
            for &g in &edge.faces {
                let face = &complex.faces()[g];
                if let (Some(a), Some(b)) = (face.negative, face.positive) {
                    if labeling[a] && labeling[b] {
                        runs.union(a, b);
                    }
                }
            }
            let mut first_of_run: HashMap<usize, usize> = HashMap::new();
            for &g in &edge.faces {
                if slot[g] == usize::MAX {
                    continue;
                }
                let run = runs.find(emitted[slot[g]].1.full);
                match first_of_run.get(&run) {
                    Some(&h) => dsu.union(h, g),
                    None => {
                        first_of_run.insert(run, g);
                    }
                }
            }
        }
        for &i in &at_vertex[&v] {
            let f = emitted[i].0;
            sheets[i].insert(v, dsu.find(f));
        }
    }

    let mut mesh = PolygonMesh::default();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    for (f, origin) in emitted {
        let mut loop_ = complex.face_loop_outward(f, origin.full);
        for v in loop_.iter_mut() {
            let group = sheets[slot[f]][v];
            *v = *index.entry((*v, group)).or_insert_with(|| {
                mesh.vertices.push(complex.vertices()[*v].position);
                mesh.vertices.len() - 1
            });
        }
        mesh.faces.push(loop_);
        mesh.origins.push(origin);
    }
    Ok(mesh)
}

/// Complex edges under mesh edges that more than two faces use. `mesh`
/// must come from [`extract_surface_with`] on `complex`.
pub fn non_manifold_complex_edges(complex: &CellComplex, mesh: &PolygonMesh) -> Vec<usize> {
    let key = |p: &Point3| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
    let by_position: HashMap<[u64; 3], usize> =
        complex.vertices().iter().enumerate().map(|(i, v)| (key(&v.position), i)).collect();
    let mut uses: HashMap<(usize, usize), usize> = HashMap::new();
    for face in &mesh.faces {
        for (k, &a) in face.iter().enumerate() {
            let b = face[(k + 1) % face.len()];
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut out: Vec<usize> = uses
        .into_iter()
        .filter(|&(_, n)| n > 2)
        .filter_map(|((a, b), _)| {
            let (a, b) = (by_position.get(&key(&mesh.vertices[a]))?, by_position.get(&key(&mesh.vertices[b]))?);
            complex.vertex_edges(*a).iter().copied().find(|&e| {
                let [p, q] = complex.edges()[e].vertices;
                (p == *a && q == *b) || (p == *b && q == *a)
            })
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Fan triangulation. The fan starts at a corner vertex when that gives no
/// degenerate triangle; polygons with collinear vertices on every side are
/// fanned around an added centroid vertex instead.
pub fn triangulate(mesh: &PolygonMesh) -> Result<PolygonMesh, SurfaceError> {
    let mut out = PolygonMesh { vertices: mesh.vertices.clone(), faces: Vec::new(), origins: Vec::new() };
    for (fi, face) in mesh.faces.iter().enumerate() {
        let pts = mesh.face_points(fi);
        let n = polygon_normal(&pts);
        let scale = n.norm();
        let m = face.len();
        // convexity: every turn agrees with the face normal
        for i in 0..m {
            let a = pts[i];
            let b = pts[(i + 1) % m];
            let c = pts[(i + 2) % m];
            if (b - a).cross(&(c - b)).dot(&n) < -1e-12 * scale {
                return Err(SurfaceError::NonConvexFace(fi));
            }
        }
        let tri_ok = |i: usize, j: usize, k: usize| (pts[j] - pts[i]).cross(&(pts[k] - pts[i])).norm() > 1e-12 * scale;
        let apex = (0..m).find(|&a| (1..m - 1).all(|s| tri_ok(a, (a + s) % m, (a + s + 1) % m)));
        let origin = mesh.origins.get(fi).copied();
        let mut push = |tri: Vec<usize>| {
            out.faces.push(tri);
            if let Some(o) = origin {
                out.origins.push(o);
            }
        };
        match apex {
            Some(a) => {
                for s in 1..m - 1 {
                    push(vec![face[a], face[(a + s) % m], face[(a + s + 1) % m]]);
                }
            }
            None => {
                let c = pts.iter().fold(Vec3::zeros(), |acc, p| acc + p.coords) / m as f64;
                out.vertices.push(Point3::from(c));
                let ci = out.vertices.len() - 1;
                for i in 0..m {
                    push(vec![ci, face[i], face[(i + 1) % m]]);
                }
            }
        }
    }
    Ok(out)
}
