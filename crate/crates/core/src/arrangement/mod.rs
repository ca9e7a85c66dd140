//! Bounded plane arrangements: the convex cell complex cut out of a box by
//! a set of planes, with the queries the labeling energy needs.

mod build;
mod dump;
mod queries;

use std::collections::HashMap;

use thiserror::Error;

use crate::geom::{Aabb, Plane, Point3, Vec3};

pub use build::{build_complex, build_complex_with_limit, scene_bbox, DEFAULT_MAX_PLANES};
pub use dump::{ComplexDump, COMPLEX_FORMAT_TAG};
pub use queries::{Carrier, Crossing, Fragment};

/// Vertices closer than this to a plane are snapped onto it.
pub const SNAP_TOL: f64 = 1e-9;
/// A segment whose endpoints are both this close to a plane lies on it.
pub const ON_PLANE_TOL: f64 = 1e-8;
/// Planes closer than this in angle (degrees), with nearly equal offsets,
/// are rejected as duplicates.
pub const DUPLICATE_ANGLE_DEG: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArrangementError {
    #[error("{count} planes exceed the limit of {max}")]
    TooManyPlanes { count: usize, max: usize },
    #[error("near-duplicate planes: {0:?}")]
    NearDuplicatePlanes(Vec<(usize, usize)>),
    #[error("point or segment lies outside the bounding box")]
    OutsideBox,
    #[error("point lies on plane {0}")]
    OnBoundary(usize),
    #[error("viewpoint lies on carrier plane {0}")]
    GrazingViewpoint(usize),
    #[error("empty or degenerate bounding box")]
    DegenerateBox,
}

/// Bitset over scene planes: bit `p` set when the cell lies on the positive
/// side of plane `p`.
pub type SignKey = Vec<u64>;

pub(crate) fn key_words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

pub(crate) fn set_bit(key: &mut SignKey, p: usize, on: bool) {
    if on {
        key[p / 64] |= 1 << (p % 64);
    } else {
        key[p / 64] &= !(1 << (p % 64));
    }
}

pub(crate) fn get_bit(key: &SignKey, p: usize) -> bool {
    key[p / 64] >> (p % 64) & 1 == 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub position: Point3,
    /// Sorted indices of all planes (scene and box) through the vertex.
    pub planes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub faces: Vec<usize>,
    pub signs: SignKey,
    pub volume: f64,
    /// Average of the cell's vertices; always strictly inside.
    pub centroid: Point3,
}

/// Convex polygon on one plane, vertices counterclockwise around the plane
/// normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub plane: usize,
    pub vertices: Vec<usize>,
    /// Incident cell on the negative side of the plane.
    pub negative: Option<usize>,
    /// Incident cell on the positive side of the plane.
    pub positive: Option<usize>,
    pub area: f64,
}

impl Face {
    pub fn cells(&self) -> impl Iterator<Item = usize> {
        self.negative.into_iter().chain(self.positive)
    }

    pub fn is_interior(&self) -> bool {
        self.negative.is_some() && self.positive.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Sorted planes containing the whole edge.
    pub planes: Vec<usize>,
    /// Incident cells in cyclic order around the edge.
    pub ring: Vec<usize>,
    pub faces: Vec<usize>,
    /// No box plane contains the edge.
    pub interior: bool,
    pub length: f64,
}

/// Bounded arrangement of planes. Planes `0..scene_plane_count()` are the
/// input planes, followed by the six box planes.
#[derive(Debug, Clone)]
pub struct CellComplex {
    pub(crate) planes: Vec<Plane>,
    pub(crate) scene_planes: usize,
    pub(crate) bbox: Aabb,
    pub(crate) vertices: Vec<Vertex>,
    pub(crate) cells: Vec<Cell>,
    pub(crate) faces: Vec<Face>,
    pub(crate) edges: Vec<Edge>,
    pub(crate) vertex_edges: Vec<Vec<usize>>,
    pub(crate) cell_by_signs: HashMap<SignKey, usize>,
    pub(crate) face_by_cells: HashMap<(usize, usize), usize>,
    /// Edges on the line of each pair of scene planes.
    pub(crate) line_edges: HashMap<(usize, usize), Vec<usize>>,
}

impl CellComplex {
    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn scene_plane_count(&self) -> usize {
        self.scene_planes
    }

    pub fn is_box_plane(&self, p: usize) -> bool {
        p >= self.scene_planes
    }

    pub fn bbox(&self) -> &Aabb {
        &self.bbox
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Edges incident to vertex `v`.
    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    /// The face shared by two cells, if any.
    pub fn face_between(&self, a: usize, b: usize) -> Option<usize> {
        self.face_by_cells.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn cell_with_signs(&self, key: &SignKey) -> Option<usize> {
        self.cell_by_signs.get(key).copied()
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| self.faces[f].is_interior())
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.edges[e].interior)
    }

    /// Vertex is off every box plane.
    pub fn is_interior_vertex(&self, v: usize) -> bool {
        self.vertices[v].planes.iter().all(|&p| p < self.scene_planes)
    }

    pub fn edge_direction(&self, e: usize) -> Vec3 {
        let [a, b] = self.edges[e].vertices;
        self.vertices[b].position - self.vertices[a].position
    }

    /// Outward unit normal of face `f` as seen from `cell`.
    pub fn outward_normal(&self, f: usize, cell: usize) -> Vec3 {
        let face = &self.faces[f];
        let n = *self.planes[face.plane].normal();
        if face.positive == Some(cell) {
            -n
        } else {
            n
        }
    }

    /// Face vertices ordered counterclockwise as seen from outside `cell`.
    pub fn face_loop_outward(&self, f: usize, cell: usize) -> Vec<usize> {
        let face = &self.faces[f];
        let mut vs = face.vertices.clone();
        if face.positive == Some(cell) {
            vs.reverse();
        }
        vs
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }
}
