use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use super::{DetectParams, SupportState};
use crate::geom::{
    fit_plane, segment_line_distance, segment_plane_distance_with, Plane, Point3, Segment3,
    MIN_DIHEDRAL_DEG,
};

/// What happened during fusion, in order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FusionLog {
    /// `(plane a, plane b, angle in degrees)` for each accepted merge, with
    /// plane indices in the growing list (merged planes are appended).
    pub merged: Vec<(usize, usize, f64)>,
    pub rejected: usize,
    /// Segments that lost one of their two planes in the final structural pass.
    pub demoted: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pair {
    angle: f64,
    a: usize,
    b: usize,
}

impl Eq for Pair {}

impl Ord for Pair {
    fn cmp(&self, other: &Self) -> Ordering {
        self.angle
            .total_cmp(&other.angle)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

impl PartialOrd for Pair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn refit(support: &BTreeSet<usize>, segments: &[Segment3]) -> Option<Plane> {
    let pts: Vec<(Point3, f64)> = support
        .iter()
        .flat_map(|&l| {
            let s = &segments[l];
            [(s.p0, s.length()), (s.p1, s.length())]
        })
        .collect();
    fit_plane(&pts).ok()
}

/// Merges nearly parallel planes, smallest dihedral angle first. A pair is
/// merged when enough inliers are shared (relative to the smaller support)
/// and every inlier of the union lies within `epsilon_fus` of the plane
/// refitted on the union.
pub fn fuse_planes(state: SupportState, segments: &[Segment3], params: &DetectParams) -> SupportState {
    fuse_planes_with_log(state, segments, params).0
}

pub fn fuse_planes_with_log(
    state: SupportState,
    segments: &[Segment3],
    params: &DetectParams,
) -> (SupportState, FusionLog) {
    let mut log = FusionLog::default();
    let (segment_ids, planes) = state.into_planes();
    let mut alive: Vec<Option<(Plane, BTreeSet<usize>)>> = planes.into_iter().map(Some).collect();
    let mut heap = BinaryHeap::new();
    let push_pairs = |heap: &mut BinaryHeap<Reverse<Pair>>, alive: &[Option<(Plane, BTreeSet<usize>)>], b: usize| {
        let pb = alive[b].as_ref().map(|x| x.0).expect("plane alive");
        for (a, entry) in alive.iter().enumerate().take(b) {
            if let Some((pa, _)) = entry {
                let angle = pa.angle_to(&pb);
                if angle < params.theta_fus_deg {
                    heap.push(Reverse(Pair { angle, a, b }));
                }
            }
        }
    };
    for b in 0..alive.len() {
        push_pairs(&mut heap, &alive, b);
    }
    while let Some(Reverse(Pair { angle, a, b })) = heap.pop() {
        let (Some((_, sa)), Some((_, sb))) = (&alive[a], &alive[b]) else { continue };
        let common = sa.intersection(sb).count();
        let smaller = sa.len().min(sb.len()).max(1);
        if (common as f64) / (smaller as f64) < params.p_fus {
            log.rejected += 1;
            continue;
        }
        let union: BTreeSet<usize> = sa.union(sb).copied().collect();
        let merged = refit(&union, segments).filter(|plane| {
            union
                .iter()
                .all(|&l| segment_plane_distance_with(&segments[l], plane, params.distance) <= params.epsilon_fus)
        });
        let Some(plane) = merged else {
            log.rejected += 1;
            continue;
        };
        alive[a] = None;
        alive[b] = None;
        alive.push(Some((plane, union)));
        log.merged.push((a, b, angle));
        push_pairs(&mut heap, &alive, alive.len() - 1);
    }

    let mut survivors: Vec<(Plane, BTreeSet<usize>)> = alive.into_iter().flatten().collect();
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); segments.len()];
    for (p, (_, sup)) in survivors.iter().enumerate() {
        for &l in sup {
            assigned[l].push(p);
        }
    }
    for (l, planes) in assigned.iter().enumerate() {
        if let [a, b] = planes[..] {
            let (pa, pb) = (&survivors[a].0, &survivors[b].0);
            let drop = if pa.angle_to(pb) < MIN_DIHEDRAL_DEG {
                // a merge made the two planes nearly parallel: keep the
                // most recent (merged) one
                Some(a)
            } else {
                let line = pa.intersection(pb).expect("angle checked");
                if segment_line_distance(&segments[l], &line) > params.epsilon_fus {
                    let da = segment_plane_distance_with(&segments[l], pa, params.distance);
                    let db = segment_plane_distance_with(&segments[l], pb, params.distance);
                    Some(if da > db { a } else { b })
                } else {
                    None
                }
            };
            if let Some(p) = drop {
                survivors[p].1.remove(&l);
                log.demoted.push(l);
            }
        }
    }
    (SupportState::with_planes(segment_ids, survivors), log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{SegmentDistance, Vec3};
    use crate::lineio::synth::synth_cube;
    use crate::ransac::{detect_planes, SamplingMode};

    fn seg(a: [f64; 3], b: [f64; 3]) -> Segment3 {
        Segment3::new(Point3::from(a), Point3::from(b)).unwrap()
    }

    fn params() -> DetectParams {
        DetectParams { epsilon: 0.02, epsilon_fus: 0.06, ..Default::default() }
    }

    /// Vertical segments on the wall y = 0 at x = 0, 0.25, ..., 4.
    fn wall() -> Vec<Segment3> {
        (0..=16).map(|i| seg([0.25 * i as f64, 0.0, 0.0], [0.25 * i as f64, 0.0, 2.0])).collect()
    }

    /// Plane through the point `(x0, 0, 0)` rotated `deg` about the z axis
    /// from `y = 0`.
    fn tilted(deg: f64, x0: f64) -> Plane {
        let r = deg.to_radians();
        Plane::from_point_normal(&Point3::new(x0, 0.0, 0.0), Vec3::new(-r.sin(), r.cos(), 0.0)).unwrap()
    }

    #[test]
    fn split_wall_is_merged() {
        let segs = wall();
        // left half 0..=9, right half 6..=16: 4 shared of min(10, 11) = 40%
        let left: BTreeSet<usize> = (0..=9).collect();
        let right: BTreeSet<usize> = (6..=16).collect();
        let state = SupportState::with_planes(
            (0..segs.len() as u32).collect(),
            vec![(tilted(0.25, 1.0), left), (tilted(-0.25, 3.0), right)],
        );
        assert!((state.planes()[0].angle_to(&state.planes()[1]) - 0.5).abs() < 1e-9);
        let (fused, log) = fuse_planes_with_log(state, &segs, &params());
        assert_eq!(fused.plane_count(), 1);
        assert_eq!(log.merged.len(), 1);
        assert_eq!(fused.support(0).len(), segs.len());
        assert!(fused.planes()[0].angle_to(&Plane::axis(1, 0.0)) < 1e-9);
        assert_eq!(fused.partition_sizes(), [0, segs.len(), 0]);
        fused.audit(&segs, 0.06, SegmentDistance::Max).unwrap();
    }

    #[test]
    fn no_common_inliers_blocks_merge() {
        let segs = wall();
        let left: BTreeSet<usize> = (0..=7).collect();
        let right: BTreeSet<usize> = (8..=16).collect();
        let state = SupportState::with_planes(
            (0..segs.len() as u32).collect(),
            vec![(tilted(2.5, 1.0), left), (tilted(-2.5, 3.0), right)],
        );
        let (fused, log) = fuse_planes_with_log(state, &segs, &params());
        assert_eq!(fused.plane_count(), 2);
        assert_eq!(log.rejected, 1);
    }

    #[test]
    fn union_too_thick_blocks_merge() {
        // two parallel walls 0.2 m apart sharing a support
        let mut segs = wall();
        segs.extend((0..=16).map(|i| seg([0.25 * i as f64, 0.2, 0.0], [0.25 * i as f64, 0.2, 2.0])));
        let a: BTreeSet<usize> = (0..=16).collect();
        let b: BTreeSet<usize> = (10..=33).filter(|&l| l >= 17 || l == 10).collect();
        let state = SupportState::with_planes(
            (0..segs.len() as u32).collect(),
            vec![(Plane::axis(1, 0.0), a), (Plane::axis(1, 0.2), b)],
        );
        let (fused, log) = fuse_planes_with_log(state, &segs, &DetectParams { p_fus: 0.01, ..params() });
        assert_eq!(fused.plane_count(), 2);
        assert_eq!(log.rejected, 1);
    }

    #[test]
    fn cube_faces_are_never_fused() {
        let cloud = synth_cube(0.0, 0, 0);
        let segs: Vec<_> = cloud.segments.iter().map(|s| s.geometry).collect();
        let p = DetectParams { epsilon: 0.06, epsilon_fus: 0.18, mode: SamplingMode::Exhaustive, ..Default::default() };
        let state = detect_planes(&cloud, &p, 0);
        let (fused, log) = fuse_planes_with_log(state.clone(), &segs, &p);
        assert_eq!(fused, state);
        // only the three pairs of opposite (parallel) faces are tried, and
        // they share no inlier
        assert!(log.merged.is_empty());
        assert_eq!(log.rejected, 3);
    }
}
