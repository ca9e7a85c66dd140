//! Shared fixtures: random micro-scenes small enough for brute force, and
//! exact point-to-mesh distances.
#![allow(dead_code)]

use linerecon::arrangement::{build_complex, CellComplex};
use linerecon::geom::{Aabb, Plane, Point3, Segment3, Vec3};
use linerecon::lineio::{LineCloud, ObservedSegment, View, Viewpoint};
use linerecon::ransac::SupportState;
use linerecon::surface::PolygonMesh;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct MicroScene {
    pub planes: Vec<Plane>,
    pub bbox: Aabb,
    pub cloud: LineCloud,
    /// Planes supported by each segment.
    pub support: Vec<Vec<usize>>,
}

pub fn micro_bbox() -> Aabb {
    Aabb::new(Point3::new(-2., -2., -2.), Point3::new(2., 2., 2.))
}

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.2 && n <= 1.0 {
            return v / n;
        }
    }
}

fn point(rng: &mut ChaCha8Rng, r: f64) -> Point3 {
    Point3::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r))
}

/// Planes pairwise at least 20 degrees apart, all passing near the origin.
pub fn random_planes(rng: &mut ChaCha8Rng, count: usize) -> Vec<Plane> {
    let mut planes: Vec<Plane> = Vec::new();
    while planes.len() < count {
        let n = unit(rng);
        if planes.iter().any(|p| p.normal().dot(&n).abs() > 20f64.to_radians().cos()) {
            continue;
        }
        planes.push(Plane::new(n, rng.gen_range(-0.4..0.4)).unwrap());
    }
    planes
}

/// A segment of random direction, centered at `center`.
fn segment_through(rng: &mut ChaCha8Rng, center: Point3, dir: Vec3) -> Segment3 {
    let h = 0.5 * rng.gen_range(0.3..1.0);
    Segment3::new(center - dir * h, center + dir * h).unwrap()
}

fn views(rng: &mut ChaCha8Rng, viewpoints: usize) -> Vec<View> {
    let mut out = Vec::new();
    for v in 0..viewpoints as u32 {
        if out.is_empty() && v + 1 == viewpoints as u32 || rng.gen_bool(0.6) {
            if rng.gen_bool(0.5) {
                out.push(View::full(v));
            } else {
                let a = rng.gen_range(0.0..0.5);
                let b = rng.gen_range(a + 0.1..1.0);
                out.push(View { viewpoint: v, intervals: vec![[a, b]] });
            }
        }
    }
    out
}

/// `plane_count` planes, two textural segments per plane, one structural
/// segment per plane pair, one unsupported segment, three viewpoints.
pub fn micro_scene(seed: u64, plane_count: usize) -> MicroScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planes = random_planes(&mut rng, plane_count);
    let viewpoints: Vec<Viewpoint> =
        (0..3).map(|i| Viewpoint { id: i, position: point(&mut rng, 1.7) }).collect();
    let mut geometry = Vec::new();
    let mut support = Vec::new();
    for (p, plane) in planes.iter().enumerate() {
        for _ in 0..2 {
            let c = plane.project(&point(&mut rng, 0.8));
            let d = unit(&mut rng);
            let d = (d - plane.normal() * plane.normal().dot(&d)).normalize();
            geometry.push(segment_through(&mut rng, c, d));
            support.push(vec![p]);
        }
    }
    for p in 0..planes.len() {
        for q in p + 1..planes.len() {
            let line = planes[p].intersection(&planes[q]).unwrap();
            let c = line.project(&point(&mut rng, 0.6));
            geometry.push(segment_through(&mut rng, c, line.direction.into_inner()));
            support.push(vec![p, q]);
        }
    }
    let (c, d) = (point(&mut rng, 0.8), unit(&mut rng));
    geometry.push(segment_through(&mut rng, c, d));
    support.push(vec![]);
    let segments = geometry
        .into_iter()
        .enumerate()
        .map(|(i, g)| ObservedSegment { id: i as u32, geometry: g, views: views(&mut rng, viewpoints.len()) })
        .collect();
    MicroScene { planes, bbox: micro_bbox(), cloud: LineCloud { viewpoints, segments }, support }
}

impl MicroScene {
    pub fn complex(&self) -> CellComplex {
        build_complex(&self.planes, self.bbox).unwrap()
    }

    pub fn state(&self) -> SupportState {
        state_for(&self.cloud, &self.planes, &self.support)
    }

    /// Every segment cut in two at a random parameter, views split alike.
    pub fn over_segmented(&self, seed: u64) -> MicroScene {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut segments = Vec::new();
        let mut support = Vec::new();
        for (s, sup) in self.cloud.segments.iter().zip(&self.support) {
            let t = rng.gen_range(0.1..0.9);
            for (lo, hi) in [(0.0, t), (t, 1.0)] {
                let views = s
                    .views
                    .iter()
                    .filter_map(|v| {
                        let intervals: Vec<[f64; 2]> = v
                            .intervals
                            .iter()
                            .filter_map(|&[a, b]| {
                                let (a, b) = ((a.max(lo) - lo) / (hi - lo), (b.min(hi) - lo) / (hi - lo));
                                (b > a).then_some([a, b])
                            })
                            .collect();
                        (!intervals.is_empty()).then_some(View { viewpoint: v.viewpoint, intervals })
                    })
                    .collect();
                segments.push(ObservedSegment {
                    id: segments.len() as u32,
                    geometry: s.geometry.sub(lo, hi),
                    views,
                });
                support.push(sup.clone());
            }
        }
        MicroScene {
            planes: self.planes.clone(),
            bbox: self.bbox,
            cloud: LineCloud { viewpoints: self.cloud.viewpoints.clone(), segments },
            support,
        }
    }
}

pub fn state_for(cloud: &LineCloud, planes: &[Plane], support: &[Vec<usize>]) -> SupportState {
    let mut state = SupportState::new(cloud);
    for (p, plane) in planes.iter().enumerate() {
        state.commit(*plane, (0..support.len()).filter(|&l| support[l].contains(&p)));
    }
    state
}

pub fn labelings(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

pub fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 { 0.0 } else { (a - b).abs() / scale }
}

/// Closest-point distance from `p` to triangle `abc`.
pub fn point_triangle_distance(p: &Point3, a: &Point3, b: &Point3, c: &Point3) -> f64 {
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(&ap), ac.dot(&ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return (p - a).norm();
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(&bp), ac.dot(&bp));
    if d3 >= 0.0 && d4 <= d3 {
        return (p - b).norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (p - (a + ab * v)).norm();
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(&cp), ac.dot(&cp));
    if d6 >= 0.0 && d5 <= d6 {
        return (p - c).norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (p - (a + ac * w)).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * w)).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let (v, w) = (vb * denom, vc * denom);
    (p - (a + ab * v + ac * w)).norm()
}

/// Distance from `p` to the nearest point of a polygon mesh, by fanning
/// every face from its first vertex.
pub fn point_mesh_distance(p: &Point3, mesh: &PolygonMesh) -> f64 {
    mesh.faces
        .iter()
        .flat_map(|f| (1..f.len() - 1).map(move |k| (f[0], f[k], f[k + 1])))
        .map(|(a, b, c)| point_triangle_distance(p, &mesh.vertices[a], &mesh.vertices[b], &mesh.vertices[c]))
        .fold(f64::INFINITY, f64::min)
}
