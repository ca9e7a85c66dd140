use std::collections::BTreeSet;

use thiserror::Error;

use crate::geom::{segment_line_distance, segment_plane_distance_with, Plane, Segment3, SegmentDistance};
use crate::lineio::{LineCloud, SegmentId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SupportError {
    #[error("support state is inconsistent:\n  {}", .0.join("\n  "))]
    Inconsistent(Vec<String>),
    #[error("unknown segment id {0}")]
    UnknownSegment(SegmentId),
}

/// Detected planes with the bidirectional support relation between planes
/// and segments. Segments are addressed by their index in the cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportState {
    planes: Vec<Plane>,
    support: Vec<BTreeSet<usize>>,
    assigned: Vec<Vec<usize>>,
    segment_ids: Vec<SegmentId>,
}

impl SupportState {
    /// Empty state: every segment in `L0`.
    pub fn new(cloud: &LineCloud) -> Self {
        SupportState {
            planes: Vec::new(),
            support: Vec::new(),
            assigned: vec![Vec::new(); cloud.segments.len()],
            segment_ids: cloud.segments.iter().map(|s| s.id).collect(),
        }
    }

    pub(crate) fn with_planes(
        segment_ids: Vec<SegmentId>,
        planes: Vec<(Plane, BTreeSet<usize>)>,
    ) -> Self {
        let mut state = SupportState {
            planes: Vec::new(),
            support: Vec::new(),
            assigned: vec![Vec::new(); segment_ids.len()],
            segment_ids,
        };
        for (plane, inliers) in planes {
            state.commit(plane, inliers);
        }
        state
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn plane_count(&self) -> usize {
        self.planes.len()
    }

    pub fn segment_count(&self) -> usize {
        self.assigned.len()
    }

    pub fn segment_id(&self, index: usize) -> SegmentId {
        self.segment_ids[index]
    }

    /// Segments supporting plane `p` (Lambda).
    pub fn support(&self, p: usize) -> &BTreeSet<usize> {
        &self.support[p]
    }

    /// Planes supported by segment `l` (Pi), at most two.
    pub fn planes_of(&self, l: usize) -> &[usize] {
        &self.assigned[l]
    }

    /// Number of planes the segment supports: 0, 1 or 2.
    pub fn class_of(&self, l: usize) -> usize {
        self.assigned[l].len()
    }

    pub fn is_structural(&self, l: usize) -> bool {
        self.assigned[l].len() == 2
    }

    /// `[L0, L1, L2]` as sorted segment indices.
    pub fn partition(&self) -> [Vec<usize>; 3] {
        let mut out: [Vec<usize>; 3] = Default::default();
        for (l, a) in self.assigned.iter().enumerate() {
            out[a.len()].push(l);
        }
        out
    }

    pub fn partition_sizes(&self) -> [usize; 3] {
        let mut out = [0; 3];
        for a in &self.assigned {
            out[a.len()] += 1;
        }
        out
    }

    /// Segments still available to support a plane (`L0 u L1`).
    pub fn available(&self) -> Vec<usize> {
        (0..self.assigned.len()).filter(|&l| self.assigned[l].len() < 2).collect()
    }

    /// Adds a plane with its inliers. Inliers already in `L2` are skipped.
    pub fn commit(&mut self, plane: Plane, inliers: impl IntoIterator<Item = usize>) -> usize {
        let p = self.planes.len();
        self.planes.push(plane);
        let mut set = BTreeSet::new();
        for l in inliers {
            if self.assigned[l].len() < 2 && !self.assigned[l].contains(&p) {
                self.assigned[l].push(p);
                set.insert(l);
            }
        }
        self.support.push(set);
        p
    }

    /// Checks the structural invariants: `|Pi(l)| <= 2`, symmetric
    /// support relation, every structural segment within `tol` of the
    /// intersection line of its two planes and every support within `tol`
    /// of its plane.
    pub fn audit(
        &self,
        segments: &[Segment3],
        tol: f64,
        kind: SegmentDistance,
    ) -> Result<(), SupportError> {
        let mut problems = Vec::new();
        for (l, planes) in self.assigned.iter().enumerate() {
            if planes.len() > 2 {
                problems.push(format!("segment {} supports {} planes", self.segment_ids[l], planes.len()));
            }
            for &p in planes {
                if p >= self.planes.len() || !self.support[p].contains(&l) {
                    problems.push(format!(
                        "segment {} lists plane {p} which does not list it back",
                        self.segment_ids[l]
                    ));
                }
            }
            if planes.len() == 2 && planes[0] == planes[1] {
                problems.push(format!("segment {} supports plane {} twice", self.segment_ids[l], planes[0]));
            }
        }
        for (p, sup) in self.support.iter().enumerate() {
            for &l in sup {
                if !self.assigned[l].contains(&p) {
                    problems.push(format!(
                        "plane {p} lists segment {} which does not list it back",
                        self.segment_ids[l]
                    ));
                }
                let d = segment_plane_distance_with(&segments[l], &self.planes[p], kind);
                if d > tol {
                    problems.push(format!(
                        "segment {} is {d:.4} m from plane {p} (tolerance {tol})",
                        self.segment_ids[l]
                    ));
                }
            }
        }
        for (l, planes) in self.assigned.iter().enumerate() {
            if let [a, b] = planes[..] {
                match self.planes[a].intersection(&self.planes[b]) {
                    Ok(line) => {
                        let d = segment_line_distance(&segments[l], &line);
                        if d > tol {
                            problems.push(format!(
                                "structural segment {} is {d:.4} m from the crease of planes {a} and {b}",
                                self.segment_ids[l]
                            ));
                        }
                    }
                    Err(_) => problems.push(format!(
                        "structural segment {} supports nearly parallel planes {a} and {b}",
                        self.segment_ids[l]
                    )),
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SupportError::Inconsistent(problems))
        }
    }

    /// Consumes the state into `(plane, support)` pairs.
    pub(crate) fn into_planes(self) -> (Vec<SegmentId>, Vec<(Plane, BTreeSet<usize>)>) {
        (self.segment_ids, self.planes.into_iter().zip(self.support).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineio::synth::synth_cube;

    #[test]
    fn commit_maintains_partitions() {
        let cloud = synth_cube(0.0, 0, 0);
        let mut s = SupportState::new(&cloud);
        assert_eq!(s.partition_sizes(), [12, 0, 0]);
        let p = s.commit(Plane::axis(2, 1.0), [0, 1, 2]);
        assert_eq!(p, 0);
        assert_eq!(s.partition_sizes(), [9, 3, 0]);
        s.commit(Plane::axis(0, 1.0), [2, 3]);
        assert_eq!(s.partition_sizes(), [8, 3, 1]);
        assert!(s.is_structural(2));
        assert_eq!(s.planes_of(2), &[0, 1]);
        // L2 segments are never added a third time
        s.commit(Plane::axis(1, 1.0), [2, 4]);
        assert_eq!(s.planes_of(2).len(), 2);
        assert!(!s.support(2).contains(&2));
        let [l0, l1, l2] = s.partition();
        assert_eq!(l0.len() + l1.len() + l2.len(), 12);
    }

    #[test]
    fn audit_flags_far_supports() {
        let cloud = synth_cube(0.0, 0, 0);
        let segs: Vec<_> = cloud.segments.iter().map(|s| s.geometry).collect();
        let mut s = SupportState::new(&cloud);
        // segment 0 runs along x at (y,z)=(-1,-1): not on z=1
        s.commit(Plane::axis(2, 1.0), [0]);
        assert!(s.audit(&segs, 0.06, SegmentDistance::Max).is_err());
    }
}
