//! Axis-aligned furnished room seen from interior viewpoints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::uniform_noise;
use crate::arrangement::build_complex;
use crate::geom::{Aabb, Plane, Point3, Segment3, Vec3};
use crate::lineio::{LineCloud, ObservedSegment, SegmentId, View, Viewpoint, MIN_INTERVAL};
use crate::surface::{extract_surface_with, ExtractOptions, PolygonMesh};

/// Samples per segment for the occlusion scan before bisection.
const VIS_SAMPLES: usize = 257;
const VIS_BISECTIONS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct RoomSpec {
    /// The room spans `[0, size.x] x [0, size.y] x [0, size.z]`.
    pub size: Vec3,
    /// Solid boxes inside the room. They may rest on the floor or against
    /// walls but must not touch each other.
    pub furniture: Vec<Aabb>,
    pub viewpoints: usize,
    pub noise_std: f64,
    pub outliers: usize,
    /// Textural lines per square meter of visible face.
    pub texture_density: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoomSpecError {
    #[error("room size must be positive")]
    BadSize,
    #[error("furniture {0} has no volume")]
    DegenerateFurniture(usize),
    #[error("furniture {0} sticks out of the room")]
    FurnitureOutside(usize),
    #[error("furniture {0} and {1} touch or overlap")]
    FurnitureContact(usize, usize),
    #[error("no room left for {0} viewpoints")]
    NoViewpointSpace(usize),
    #[error("noise and texture density must be nonnegative")]
    BadNoise,
}

impl RoomSpec {
    pub fn empty(size: Vec3, viewpoints: usize) -> Self {
        RoomSpec { size, furniture: Vec::new(), viewpoints, noise_std: 0.0, outliers: 0, texture_density: 0.0, seed: 0 }
    }

    /// A 4 x 5 x 2.5 m room with a bed, a desk and a wardrobe in corners and a
    /// free-standing crate, seen from 12 viewpoints.
    pub fn furnished(noise_std: f64, seed: u64) -> Self {
        let b = |lo: [f64; 3], hi: [f64; 3]| Aabb::new(Point3::from(lo), Point3::from(hi));
        RoomSpec {
            size: Vec3::new(4.0, 5.0, 2.5),
            furniture: vec![
                b([0.0, 0.0, 0.0], [1.4, 2.1, 0.5]),
                b([2.6, 0.0, 0.0], [4.0, 0.8, 0.75]),
                b([0.0, 3.8, 0.0], [0.6, 5.0, 1.9]),
                b([2.2, 3.0, 0.0], [2.9, 3.7, 0.6]),
            ],
            viewpoints: 12,
            noise_std,
            outliers: 0,
            texture_density: 2.0,
            seed,
        }
    }

    pub fn room_box(&self) -> Aabb {
        Aabb::new(Point3::origin(), Point3::from(self.size))
    }

    fn check(&self) -> Result<(), RoomSpecError> {
        if !(self.size.iter().all(|&s| s > 0.0 && s.is_finite())) {
            return Err(RoomSpecError::BadSize);
        }
        if !(self.noise_std >= 0.0 && self.texture_density >= 0.0) {
            return Err(RoomSpecError::BadNoise);
        }
        let room = self.room_box();
        for (i, f) in self.furniture.iter().enumerate() {
            if (0..3).any(|k| f.max[k] <= f.min[k]) {
                return Err(RoomSpecError::DegenerateFurniture(i));
            }
            if (0..3).any(|k| f.min[k] < room.min[k] || f.max[k] > room.max[k]) {
                return Err(RoomSpecError::FurnitureOutside(i));
            }
            for (j, g) in self.furniture.iter().enumerate().take(i) {
                if f.overlaps(g, 0.0) {
                    return Err(RoomSpecError::FurnitureContact(j, i));
                }
            }
        }
        Ok(())
    }
}

/// Halton radical inverse.
fn halton(mut i: u64, base: u64) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn inside_open(b: &Aabb, p: &Point3, shrink: f64) -> bool {
    (0..3).all(|k| p[k] > b.min[k] + shrink && p[k] < b.max[k] - shrink)
}

/// Whether the segment `a -> b` passes through the interior of the box.
fn crosses_interior(a: &Point3, b: &Point3, bx: &Aabb) -> bool {
    const SHRINK: f64 = 1e-9;
    let d = b - a;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for k in 0..3 {
        let (mn, mx) = (bx.min[k] + SHRINK, bx.max[k] - SHRINK);
        if d[k].abs() < 1e-15 {
            if a[k] <= mn || a[k] >= mx {
                return false;
            }
            continue;
        }
        let t0 = (mn - a[k]) / d[k];
        let t1 = (mx - a[k]) / d[k];
        lo = lo.max(t0.min(t1));
        hi = hi.min(t0.max(t1));
        if hi <= lo {
            return false;
        }
    }
    hi > lo
}

fn visible(v: &Point3, p: &Point3, furniture: &[Aabb]) -> bool {
    !furniture.iter().any(|b| crosses_interior(v, p, b))
}

/// Visible parameter intervals of `seg` from `v`.
pub(crate) fn visible_intervals(seg: &Segment3, v: &Point3, furniture: &[Aabb]) -> Vec<[f64; 2]> {
    let n = VIS_SAMPLES - 1;
    let vis_at = |t: f64| visible(v, &seg.point_at(t), furniture);
    let flags: Vec<bool> = (0..=n).map(|i| vis_at(i as f64 / n as f64)).collect();
    let refine = |mut a: f64, mut b: f64, a_vis: bool| {
        for _ in 0..VIS_BISECTIONS {
            let m = 0.5 * (a + b);
            if vis_at(m) == a_vis {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut out = Vec::new();
    let mut start = flags[0].then_some(0.0);
    for i in 1..=n {
        let (t0, t1) = ((i - 1) as f64 / n as f64, i as f64 / n as f64);
        match (flags[i - 1], flags[i]) {
            (false, true) => start = Some(refine(t0, t1, false)),
            (true, false) => {
                let end = refine(t0, t1, true);
                out.push([start.take().unwrap(), end]);
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push([s, 1.0]);
    }
    out.retain(|[a, b]| b - a > 10.0 * MIN_INTERVAL);
    out
}

fn box_edges(b: &Aabb) -> Vec<Segment3> {
    let mut edges = Vec::with_capacity(12);
    for axis in 0..3 {
        let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
        for k in 0..4 {
            let mut p = b.min;
            p[u] = if k & 1 == 0 { b.min[u] } else { b.max[u] };
            p[w] = if k & 2 == 0 { b.min[w] } else { b.max[w] };
            let mut q = p;
            q[axis] = b.max[axis];
            edges.push(Segment3 { p0: p, p1: q });
        }
    }
    edges
}

/// Axis-aligned rectangle on the plane `x[axis] = value`.
struct FaceRect {
    axis: usize,
    value: f64,
    lo: [f64; 2],
    hi: [f64; 2],
}

fn box_faces(b: &Aabb) -> Vec<FaceRect> {
    let mut out = Vec::new();
    for axis in 0..3 {
        let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
        for value in [b.min[axis], b.max[axis]] {
            out.push(FaceRect { axis, value, lo: [b.min[u], b.min[w]], hi: [b.max[u], b.max[w]] });
        }
    }
    out
}

fn random_textural(rng: &mut ChaCha8Rng, f: &FaceRect) -> Option<Segment3> {
    const MARGIN: f64 = 0.05;
    let ext = [f.hi[0] - f.lo[0] - 2.0 * MARGIN, f.hi[1] - f.lo[1] - 2.0 * MARGIN];
    if ext[0] <= 0.1 || ext[1] <= 0.1 {
        return None;
    }
    let (u, w) = ((f.axis + 1) % 3, (f.axis + 2) % 3);
    let c = [f.lo[0] + MARGIN + rng.gen::<f64>() * ext[0], f.lo[1] + MARGIN + rng.gen::<f64>() * ext[1]];
    let angle = rng.gen::<f64>() * std::f64::consts::PI;
    let len = (0.2 + 0.4 * rng.gen::<f64>()) * ext[0].min(ext[1]);
    let (du, dw) = (angle.cos() * len / 2.0, angle.sin() * len / 2.0);
    let clamp = |x: f64, k: usize| x.clamp(f.lo[k] + MARGIN, f.hi[k] - MARGIN);
    let mut p = Point3::origin();
    let mut q = Point3::origin();
    p[f.axis] = f.value;
    q[f.axis] = f.value;
    p[u] = clamp(c[0] - du, 0);
    p[w] = clamp(c[1] - dw, 1);
    q[u] = clamp(c[0] + du, 0);
    q[w] = clamp(c[1] + dw, 1);
    Segment3::new(p, q).ok().filter(|s| s.length() > 0.05)
}

fn place_viewpoints(spec: &RoomSpec) -> Result<Vec<Viewpoint>, RoomSpecError> {
    let mut out = Vec::with_capacity(spec.viewpoints);
    let mut i = 1u64;
    while out.len() < spec.viewpoints {
        if i > 100_000 {
            return Err(RoomSpecError::NoViewpointSpace(spec.viewpoints));
        }
        let f = Vec3::new(halton(i, 2), halton(i, 3), halton(i, 5));
        i += 1;
        let p = Point3::new(
            (0.15 + 0.7 * f.x) * spec.size.x,
            (0.15 + 0.7 * f.y) * spec.size.y,
            (0.3 + 0.5 * f.z) * spec.size.z,
        );
        if spec.furniture.iter().any(|b| inside_open(&b.inflated_by(0.25), &p, 0.0)) {
            continue;
        }
        out.push(Viewpoint { id: out.len() as u32, position: p });
    }
    Ok(out)
}

trait Inflate {
    fn inflated_by(&self, d: f64) -> Aabb;
}

impl Inflate for Aabb {
    fn inflated_by(&self, d: f64) -> Aabb {
        Aabb::new(self.min - Vec3::repeat(d), self.max + Vec3::repeat(d))
    }
}

/// Ground-truth surface: the inner shell of the room plus the furniture.
pub fn room_ground_truth(spec: &RoomSpec) -> Result<PolygonMesh, RoomSpecError> {
    spec.check()?;
    let room = spec.room_box();
    let mut keys: Vec<(usize, u64)> = Vec::new();
    for b in std::iter::once(&room).chain(&spec.furniture) {
        for k in 0..3 {
            for v in [b.min[k], b.max[k]] {
                if !keys.contains(&(k, v.to_bits())) {
                    keys.push((k, v.to_bits()));
                }
            }
        }
    }
    let planes: Vec<Plane> = keys.iter().map(|&(k, v)| Plane::axis(k, f64::from_bits(v))).collect();
    let complex = build_complex(&planes, room.inflated_by(0.5)).expect("axis planes of a valid room");
    let labels: Vec<bool> = complex
        .cells()
        .iter()
        .map(|c| !inside_open(&room, &c.centroid, 0.0) || spec.furniture.iter().any(|b| inside_open(b, &c.centroid, 0.0)))
        .collect();
    Ok(extract_surface_with(&complex, &labels, ExtractOptions { box_faces: false }).expect("labeling matches"))
}

/// Line cloud of the room: every room and furniture edge, random textural
/// lines on visible faces and `outliers` random segments inside the room.
/// Visible intervals account for occlusion by furniture; segments seen from
/// no viewpoint are dropped. Noise is added after visibility is computed.
pub fn synth_room(spec: &RoomSpec) -> Result<(LineCloud, PolygonMesh), RoomSpecError> {
    spec.check()?;
    let mesh = room_ground_truth(spec)?;
    let room = spec.room_box();
    let viewpoints = place_viewpoints(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut ideal: Vec<Segment3> = box_edges(&room);
    for b in &spec.furniture {
        ideal.extend(box_edges(b));
    }
    if spec.texture_density > 0.0 {
        let mut faces: Vec<(FaceRect, Option<usize>)> = box_faces(&room).into_iter().map(|f| (f, None)).collect();
        for (i, b) in spec.furniture.iter().enumerate() {
            // faces flush with a wall or the floor are hidden
            faces.extend(
                box_faces(b)
                    .into_iter()
                    .filter(|f| f.value != room.min[f.axis] && f.value != room.max[f.axis])
                    .map(|f| (f, Some(i))),
            );
        }
        for (f, owner) in &faces {
            let area = (f.hi[0] - f.lo[0]) * (f.hi[1] - f.lo[1]);
            let count = (spec.texture_density * area).round() as usize;
            for _ in 0..count {
                let Some(s) = random_textural(&mut rng, f) else { continue };
                let covered = spec.furniture.iter().enumerate().any(|(j, b)| {
                    Some(j) != *owner
                        && (0..=16).any(|i| {
                            b.contains(&s.point_at(i as f64 / 16.0), 1e-9)
                        })
                });
                if !covered {
                    ideal.push(s);
                }
            }
        }
    }

    let mut segments = Vec::new();
    for s in &ideal {
        let views: Vec<View> = viewpoints
            .iter()
            .filter_map(|v| {
                let intervals = visible_intervals(s, &v.position, &spec.furniture);
                (!intervals.is_empty()).then_some(View { viewpoint: v.id, intervals })
            })
            .collect();
        if views.is_empty() {
            continue;
        }
        let geometry = Segment3 {
            p0: s.p0 + uniform_noise(&mut rng, spec.noise_std),
            p1: s.p1 + uniform_noise(&mut rng, spec.noise_std),
        };
        segments.push(ObservedSegment { id: segments.len() as SegmentId, geometry, views });
    }
    let mut added = 0;
    while added < spec.outliers {
        let pick = |rng: &mut ChaCha8Rng| {
            Point3::new(
                rng.gen::<f64>() * spec.size.x,
                rng.gen::<f64>() * spec.size.y,
                rng.gen::<f64>() * spec.size.z,
            )
        };
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        let Ok(geometry) = Segment3::new(a, b) else { continue };
        let first = rng.gen_range(0..viewpoints.len());
        let second = rng.gen_range(0..viewpoints.len());
        let mut ids = vec![viewpoints[first].id, viewpoints[second].id];
        ids.sort_unstable();
        ids.dedup();
        let views = ids.into_iter().map(View::full).collect();
        segments.push(ObservedSegment { id: segments.len() as SegmentId, geometry, views });
        added += 1;
    }
    Ok((LineCloud { viewpoints, segments }, mesh))
}
