//! Deterministic synthetic scenes.

mod room;

pub use room::{room_ground_truth, synth_room, RoomSpec, RoomSpecError};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LineCloud, ObservedSegment, SegmentId, View, Viewpoint};
use crate::geom::{Point3, Segment3, Vec3};

/// Radius of the viewpoint sphere around the synthetic cube.
pub const CUBE_VIEW_RADIUS: f64 = 6.0;
/// Outlier endpoints are drawn in a ball of this radius.
pub const CUBE_OUTLIER_RADIUS: f64 = 2.0;

/// Uniform noise on `[-std*sqrt(3), std*sqrt(3)]`, whose standard deviation is `std`.
pub(crate) fn uniform_noise(rng: &mut impl Rng, std: f64) -> Vec3 {
    if std == 0.0 {
        return Vec3::zeros();
    }
    let h = std * 3f64.sqrt();
    Vec3::new(rng.gen_range(-h..=h), rng.gen_range(-h..=h), rng.gen_range(-h..=h))
}

fn ball_point(rng: &mut impl Rng, radius: f64) -> Point3 {
    loop {
        let p = Vec3::new(
            rng.gen_range(-radius..=radius),
            rng.gen_range(-radius..=radius),
            rng.gen_range(-radius..=radius),
        );
        if p.norm() <= radius {
            return Point3::from(p);
        }
    }
}

/// The 12 ideal edges of `[-1, 1]^3`. Edge `4a + k` runs along axis `a`;
/// `k` enumerates the other two coordinates in `(-,-), (-,+), (+,-), (+,+)`.
pub fn cube_edges() -> Vec<Segment3> {
    let mut edges = Vec::with_capacity(12);
    for axis in 0..3 {
        let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
        let (u, w) = (u.min(w), u.max(w));
        for k in 0..4 {
            let mut a = Point3::origin();
            a[u] = if k & 2 == 0 { -1.0 } else { 1.0 };
            a[w] = if k & 1 == 0 { -1.0 } else { 1.0 };
            let mut b = a;
            a[axis] = -1.0;
            b[axis] = 1.0;
            edges.push(Segment3 { p0: a, p1: b });
        }
    }
    edges
}

/// For each of the six faces (x=-1, x=1, y=-1, y=1, z=-1, z=1) the ids of
/// its four bounding edges.
pub fn cube_face_edges() -> [[SegmentId; 4]; 6] {
    let edges = cube_edges();
    let mut faces = [[0; 4]; 6];
    for axis in 0..3 {
        for (side, value) in [(0usize, -1.0), (1, 1.0)] {
            let ids: Vec<SegmentId> = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.p0[axis] == value && e.p1[axis] == value)
                .map(|(i, _)| i as SegmentId)
                .collect();
            faces[2 * axis + side].copy_from_slice(&ids);
        }
    }
    faces
}

/// 26 viewpoints on a sphere: the directions of the 3x3x3 grid around the
/// origin, scaled to [`CUBE_VIEW_RADIUS`].
pub fn cube_viewpoints() -> Vec<Viewpoint> {
    let mut out = Vec::with_capacity(26);
    for a in -1i32..=1 {
        for b in -1i32..=1 {
            for c in -1i32..=1 {
                if (a, b, c) == (0, 0, 0) {
                    continue;
                }
                let d = Vec3::new(a as f64, b as f64, c as f64).normalize() * CUBE_VIEW_RADIUS;
                out.push(Viewpoint { id: out.len() as u32, position: Point3::from(d) });
            }
        }
    }
    out
}

/// Cube `[-1, 1]^3` given by its 12 edges with endpoint noise, plus
/// `n_outliers` random segments inside a radius-2 ball. Every segment is
/// seen entirely from the viewpoints on its side (`v . midpoint > 0`).
pub fn synth_cube(noise_std: f64, n_outliers: usize, seed: u64) -> LineCloud {
    assert!(noise_std >= 0.0, "noise_std must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let viewpoints = cube_viewpoints();
    let mut geoms: Vec<Segment3> = cube_edges()
        .into_iter()
        .map(|e| Segment3 {
            p0: e.p0 + uniform_noise(&mut rng, noise_std),
            p1: e.p1 + uniform_noise(&mut rng, noise_std),
        })
        .collect();
    while geoms.len() < 12 + n_outliers {
        let a = ball_point(&mut rng, CUBE_OUTLIER_RADIUS);
        let b = ball_point(&mut rng, CUBE_OUTLIER_RADIUS);
        if let Ok(s) = Segment3::new(a, b) {
            geoms.push(s);
        }
    }
    let segments = geoms
        .into_iter()
        .enumerate()
        .map(|(i, geometry)| {
            let m = geometry.midpoint().coords;
            let mut views: Vec<View> = viewpoints
                .iter()
                .filter(|v| v.position.coords.dot(&m) > 0.0)
                .map(|v| View::full(v.id))
                .collect();
            if views.is_empty() {
                views = viewpoints.iter().map(|v| View::full(v.id)).collect();
            }
            ObservedSegment { id: i as SegmentId, geometry, views }
        })
        .collect();
    LineCloud { viewpoints, segments }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{segment_plane_distance, Plane};

    #[test]
    fn clean_cube_has_twelve_unit_edges() {
        let c = synth_cube(0.0, 0, 3);
        assert_eq!(c.segments.len(), 12);
        assert_eq!(c.viewpoints.len(), 26);
        for s in &c.segments {
            assert_eq!(s.geometry.length(), 2.0);
            assert!(!s.views.is_empty());
        }
        assert_eq!(c.segments, cube_edges_cloud_reference());
        c.validate().unwrap();
    }

    fn cube_edges_cloud_reference() -> Vec<ObservedSegment> {
        synth_cube(0.0, 0, 99).segments
    }

    #[test]
    fn noisy_cube_with_outliers() {
        let c = synth_cube(0.35, 50, 1);
        assert_eq!(c.segments.len(), 62);
        for s in &c.segments[12..] {
            assert!(s.geometry.p0.coords.norm() <= 2.0);
            assert!(s.geometry.p1.coords.norm() <= 2.0);
        }
        let bound = 0.35 * 3f64.sqrt() + 1e-12;
        for (s, e) in c.segments.iter().zip(cube_edges()) {
            assert!((s.geometry.p0 - e.p0).amax() <= bound);
        }
        c.validate().unwrap();
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(synth_cube(0.1, 0, 7), synth_cube(0.1, 0, 7));
        assert_ne!(synth_cube(0.1, 0, 7), synth_cube(0.1, 0, 8));
    }

    #[test]
    fn face_edges_lie_on_their_face() {
        let c = synth_cube(0.0, 0, 0);
        for (f, ids) in cube_face_edges().iter().enumerate() {
            let plane = Plane::axis(f / 2, if f % 2 == 0 { -1.0 } else { 1.0 });
            for &id in ids {
                assert_eq!(segment_plane_distance(&c.segments[id as usize].geometry, &plane), 0.0);
            }
        }
        // each edge bounds exactly two faces
        let mut count = [0; 12];
        for ids in cube_face_edges() {
            for id in ids {
                count[id as usize] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 2));
    }
}
