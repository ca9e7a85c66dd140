use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{
    key_words, set_bit, ArrangementError, Cell, CellComplex, Edge, Face, SignKey, Vertex,
    DUPLICATE_ANGLE_DEG, SNAP_TOL,
};
use crate::geom::{Aabb, Plane, Point3, Vec3};

pub const DEFAULT_MAX_PLANES: usize = 160;

/// Box around every segment endpoint and viewpoint, each side pushed out
/// by `margin` times the largest extent.
pub fn scene_bbox<'a>(points: impl IntoIterator<Item = &'a Point3>, margin: f64) -> Aabb {
    Aabb::from_points(points).inflated(margin)
}

struct BuildFace {
    plane: usize,
    verts: Vec<usize>,
}

struct BuildCell {
    faces: Vec<BuildFace>,
    signs: SignKey,
    lo: Point3,
    hi: Point3,
}

struct Builder {
    planes: Vec<Plane>,
    positions: Vec<Point3>,
    vplanes: Vec<Vec<usize>>,
    cells: Vec<BuildCell>,
}

fn in_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = n.cross(&helper).normalize();
    (u, n.cross(&u))
}

fn newell(points: &[Point3]) -> Vec3 {
    let mut n = Vec3::zeros();
    for i in 0..points.len() {
        let a = points[i].coords;
        let b = points[(i + 1) % points.len()].coords;
        n += a.cross(&b);
    }
    n
}

impl Builder {
    fn cell_bounds(&self, faces: &[BuildFace]) -> (Point3, Point3) {
        let mut b = Aabb::empty();
        for f in faces {
            for &v in &f.verts {
                b.grow(&self.positions[v]);
            }
        }
        (b.min, b.max)
    }

    fn insert_plane(&mut self, k: usize) {
        let plane = self.planes[k];
        let n = *plane.normal();
        let mut side: HashMap<usize, i8> = HashMap::new();
        let mut cuts: HashMap<(usize, usize), usize> = HashMap::new();
        let cells = std::mem::take(&mut self.cells);
        for mut cell in cells {
            // plane range over the cell's bounding box
            let mut lo = -plane.offset();
            let mut hi = -plane.offset();
            for i in 0..3 {
                let (a, b) = (n[i] * cell.lo[i], n[i] * cell.hi[i]);
                lo += a.min(b);
                hi += a.max(b);
            }
            if lo > SNAP_TOL {
                set_bit(&mut cell.signs, k, true);
                self.cells.push(cell);
                continue;
            }
            if hi < -SNAP_TOL {
                self.cells.push(cell);
                continue;
            }
            let mut any_pos = false;
            let mut any_neg = false;
            for f in &cell.faces {
                for &v in &f.verts {
                    let s = *side.entry(v).or_insert_with(|| {
                        let d = plane.signed_distance(&self.positions[v]);
                        if d.abs() <= SNAP_TOL {
                            if let Err(i) = self.vplanes[v].binary_search(&k) {
                                self.vplanes[v].insert(i, k);
                            }
                            0
                        } else if d > 0.0 {
                            1
                        } else {
                            -1
                        }
                    });
                    any_pos |= s > 0;
                    any_neg |= s < 0;
                }
            }
            if !(any_pos && any_neg) {
                set_bit(&mut cell.signs, k, any_pos);
                self.cells.push(cell);
                continue;
            }
            let mut pos_faces = Vec::new();
            let mut neg_faces = Vec::new();
            let mut cap: BTreeSet<usize> = BTreeSet::new();
            for f in &cell.faces {
                let m = f.verts.len();
                let mut pos = Vec::with_capacity(m + 1);
                let mut neg = Vec::with_capacity(m + 1);
                let (mut has_pos, mut has_neg) = (false, false);
                for i in 0..m {
                    let u = f.verts[i];
                    let w = f.verts[(i + 1) % m];
                    let su = side[&u];
                    let sw = side[&w];
                    if su >= 0 {
                        pos.push(u);
                    }
                    if su <= 0 {
                        neg.push(u);
                    }
                    if su == 0 {
                        cap.insert(u);
                    }
                    has_pos |= su > 0;
                    has_neg |= su < 0;
                    if su * sw < 0 {
                        let key = (u.min(w), u.max(w));
                        let x = match cuts.get(&key) {
                            Some(&x) => x,
                            None => {
                                let (pu, pw) = (self.positions[u], self.positions[w]);
                                let du = plane.signed_distance(&pu);
                                let dw = plane.signed_distance(&pw);
                                let p = pu + (pw - pu) * (du / (du - dw));
                                let mut planes: Vec<usize> = self.vplanes[u]
                                    .iter()
                                    .filter(|q| self.vplanes[w].binary_search(q).is_ok())
                                    .copied()
                                    .collect();
                                if let Err(i) = planes.binary_search(&k) {
                                    planes.insert(i, k);
                                }
                                self.positions.push(p);
                                self.vplanes.push(planes);
                                let x = self.positions.len() - 1;
                                side.insert(x, 0);
                                cuts.insert(key, x);
                                x
                            }
                        };
                        pos.push(x);
                        neg.push(x);
                        cap.insert(x);
                    }
                }
                if has_pos && pos.len() >= 3 {
                    pos_faces.push(BuildFace { plane: f.plane, verts: pos });
                }
                if has_neg && neg.len() >= 3 {
                    neg_faces.push(BuildFace { plane: f.plane, verts: neg });
                }
            }
            let cap = self.order_polygon(cap.into_iter().collect(), &n);
            pos_faces.push(BuildFace { plane: k, verts: cap.clone() });
            neg_faces.push(BuildFace { plane: k, verts: cap });
            let mut pos_signs = cell.signs.clone();
            set_bit(&mut pos_signs, k, true);
            let (plo, phi) = self.cell_bounds(&pos_faces);
            let (nlo, nhi) = self.cell_bounds(&neg_faces);
            self.cells.push(BuildCell { faces: neg_faces, signs: cell.signs, lo: nlo, hi: nhi });
            self.cells.push(BuildCell { faces: pos_faces, signs: pos_signs, lo: plo, hi: phi });
        }
    }

    /// Sorts coplanar convex-position vertices counterclockwise around `n`.
    fn order_polygon(&self, verts: Vec<usize>, n: &Vec3) -> Vec<usize> {
        let c = verts.iter().fold(Vec3::zeros(), |a, &v| a + self.positions[v].coords) / verts.len() as f64;
        let (u, w) = in_basis(n);
        let mut keyed: Vec<(f64, usize)> = verts
            .into_iter()
            .map(|v| {
                let d = self.positions[v].coords - c;
                (d.dot(&w).atan2(d.dot(&u)), v)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        keyed.into_iter().map(|(_, v)| v).collect()
    }
}

fn check_planes(planes: &[Plane], max: usize) -> Result<(), ArrangementError> {
    if planes.len() > max {
        return Err(ArrangementError::TooManyPlanes { count: planes.len(), max });
    }
    let mut dups = Vec::new();
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let (a, b) = (&planes[i], &planes[j]);
            if a.angle_to(b) <= DUPLICATE_ANGLE_DEG {
                let same = a.normal().dot(b.normal()) > 0.0;
                let gap = if same { a.offset() - b.offset() } else { a.offset() + b.offset() };
                if gap.abs() <= SNAP_TOL {
                    dups.push((i, j));
                }
            }
        }
    }
    if dups.is_empty() {
        Ok(())
    } else {
        Err(ArrangementError::NearDuplicatePlanes(dups))
    }
}

pub fn build_complex(planes: &[Plane], bbox: Aabb) -> Result<CellComplex, ArrangementError> {
    build_complex_with_limit(planes, bbox, DEFAULT_MAX_PLANES)
}

/// Splits the box by each plane in turn. Cells sharing a face keep sharing
/// identical vertices, so the result is a face-to-face complex.
pub fn build_complex_with_limit(
    planes: &[Plane],
    bbox: Aabb,
    max_planes: usize,
) -> Result<CellComplex, ArrangementError> {
    check_planes(planes, max_planes)?;
    if bbox.is_empty() || bbox.extent().min() <= 0.0 {
        return Err(ArrangementError::DegenerateBox);
    }
    let n = planes.len();
    let mut all = planes.to_vec();
    for axis in 0..3 {
        all.push(Plane::axis(axis, bbox.min[axis]));
        all.push(Plane::axis(axis, bbox.max[axis]));
    }
    let box_plane = |axis: usize, hi: bool| n + 2 * axis + hi as usize;

    let mut b = Builder { planes: all, positions: Vec::new(), vplanes: Vec::new(), cells: Vec::new() };
    for corner in 0..8 {
        let hi = [corner & 1 != 0, corner & 2 != 0, corner & 4 != 0];
        let p = Point3::new(
            if hi[0] { bbox.max.x } else { bbox.min.x },
            if hi[1] { bbox.max.y } else { bbox.min.y },
            if hi[2] { bbox.max.z } else { bbox.min.z },
        );
        b.positions.push(p);
        let mut ps: Vec<usize> = (0..3).map(|a| box_plane(a, hi[a])).collect();
        ps.sort_unstable();
        b.vplanes.push(ps);
    }
    let mut faces = Vec::new();
    for axis in 0..3 {
        for hi in [false, true] {
            let verts: Vec<usize> = (0..8).filter(|c| (c >> axis & 1 == 1) == hi).collect();
            let mut normal = Vec3::zeros();
            normal[axis] = 1.0;
            let verts = b.order_polygon(verts, &normal);
            faces.push(BuildFace { plane: box_plane(axis, hi), verts });
        }
    }
    b.cells.push(BuildCell { faces, signs: vec![0; key_words(n)], lo: bbox.min, hi: bbox.max });
    for k in 0..n {
        b.insert_plane(k);
    }
    Ok(finish(b, n, bbox))
}

fn finish(b: Builder, scene: usize, bbox: Aabb) -> CellComplex {
    let Builder { planes, positions, vplanes, cells: bcells } = b;

    // drop vertices no cell uses and renumber
    let mut used = vec![false; positions.len()];
    for c in &bcells {
        for f in &c.faces {
            for &v in &f.verts {
                used[v] = true;
            }
        }
    }
    let mut remap = vec![usize::MAX; positions.len()];
    let mut vertices = Vec::new();
    for v in 0..positions.len() {
        if used[v] {
            remap[v] = vertices.len();
            vertices.push(Vertex { position: positions[v], planes: vplanes[v].clone() });
        }
    }

    let mut faces: Vec<Face> = Vec::new();
    let mut face_index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut cells = Vec::with_capacity(bcells.len());
    for (ci, bc) in bcells.into_iter().enumerate() {
        let mut cell_verts: BTreeSet<usize> = BTreeSet::new();
        for f in &bc.faces {
            cell_verts.extend(f.verts.iter().map(|&v| remap[v]));
        }
        let centroid = Point3::from(
            cell_verts.iter().fold(Vec3::zeros(), |a, &v| a + vertices[v].position.coords)
                / cell_verts.len() as f64,
        );
        let mut face_ids = Vec::with_capacity(bc.faces.len());
        let mut volume = 0.0;
        for f in bc.faces {
            let verts: Vec<usize> = f.verts.iter().map(|&v| remap[v]).collect();
            let mut key = verts.clone();
            key.sort_unstable();
            let fid = *face_index.entry(key).or_insert_with(|| {
                let plane = &planes[f.plane];
                let pts: Vec<Point3> = verts.iter().map(|&v| vertices[v].position).collect();
                let nw = newell(&pts);
                let mut verts = verts.clone();
                if nw.dot(plane.normal()) < 0.0 {
                    verts.reverse();
                }
                faces.push(Face { plane: f.plane, vertices: verts, negative: None, positive: None, area: 0.5 * nw.norm() });
                faces.len() - 1
            });
            let face = &mut faces[fid];
            let plane = &planes[face.plane];
            if plane.signed_distance(&centroid) > 0.0 {
                face.positive = Some(ci);
            } else {
                face.negative = Some(ci);
            }
            volume += face.area * plane.signed_distance(&centroid).abs() / 3.0;
            face_ids.push(fid);
        }
        face_ids.sort_unstable();
        cells.push(Cell { faces: face_ids, signs: bc.signs, volume, centroid });
    }

    let mut cell_by_signs = HashMap::with_capacity(cells.len());
    for (ci, c) in cells.iter().enumerate() {
        cell_by_signs.insert(c.signs.clone(), ci);
    }
    let mut face_by_cells = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        if let (Some(a), Some(b)) = (f.negative, f.positive) {
            face_by_cells.insert((a.min(b), a.max(b)), fi);
        }
    }

    // edges from consecutive face vertices
    let mut edge_faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (fi, f) in faces.iter().enumerate() {
        let m = f.vertices.len();
        for i in 0..m {
            let (a, b) = (f.vertices[i], f.vertices[(i + 1) % m]);
            edge_faces.entry((a.min(b), a.max(b))).or_default().push(fi);
        }
    }
    let mut edges = Vec::with_capacity(edge_faces.len());
    let mut vertex_edges = vec![Vec::new(); vertices.len()];
    let mut line_edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for ((a, b), efaces) in edge_faces {
        let planes_ab: Vec<usize> = vertices[a]
            .planes
            .iter()
            .filter(|p| vertices[b].planes.binary_search(p).is_ok())
            .copied()
            .collect();
        let pa = vertices[a].position;
        let pb = vertices[b].position;
        let dir = (pb - pa).normalize();
        let mid = Point3::from((pa.coords + pb.coords) * 0.5);
        let (u, w) = in_basis(&dir);
        let mut ring: Vec<usize> = efaces.iter().flat_map(|&f| faces[f].cells()).collect();
        ring.sort_unstable();
        ring.dedup();
        let angle = |c: usize| {
            let d = cells[c].centroid - mid;
            d.dot(&w).atan2(d.dot(&u))
        };
        ring.sort_by(|&x, &y| angle(x).total_cmp(&angle(y)).then(x.cmp(&y)));
        let interior = planes_ab.iter().all(|&p| p < scene);
        let e = edges.len();
        for (i, &p) in planes_ab.iter().enumerate() {
            for &q in &planes_ab[i + 1..] {
                if q < scene {
                    line_edges.entry((p, q)).or_default().push(e);
                }
            }
        }
        vertex_edges[a].push(e);
        vertex_edges[b].push(e);
        edges.push(Edge {
            vertices: [a, b],
            planes: planes_ab,
            ring,
            faces: efaces,
            interior,
            length: (pb - pa).norm(),
        });
    }

    CellComplex {
        planes,
        scene_planes: scene,
        bbox,
        vertices,
        cells,
        faces,
        edges,
        vertex_edges,
        cell_by_signs,
        face_by_cells,
        line_edges,
    }
}
