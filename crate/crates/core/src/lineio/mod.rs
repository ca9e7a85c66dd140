//! Line clouds: viewpoints, observed segments with visible intervals, the
//! `linecloud/1` document format and synthetic scene generators.

mod format;
pub mod synth;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::geom::{Aabb, Point3, Segment3};

pub use format::{load_line_cloud, parse_line_cloud, save_line_cloud, to_document_string, FORMAT_TAG};

pub type ViewpointId = u32;
pub type SegmentId = u32;

/// Smallest accepted visible-interval length, in segment parameter units.
pub const MIN_INTERVAL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LineIoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported format tag {0:?} (expected \"linecloud/1\")")]
    UnsupportedFormat(String),
    #[error("invalid line cloud:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Viewpoint {
    pub id: ViewpointId,
    pub position: Point3,
}

/// Visibility of a segment from one viewpoint: disjoint parameter intervals
/// `[t0, t1]` within `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct View {
    pub viewpoint: ViewpointId,
    pub intervals: Vec<[f64; 2]>,
}

impl View {
    pub fn full(viewpoint: ViewpointId) -> Self {
        View { viewpoint, intervals: vec![[0.0, 1.0]] }
    }

    /// Total visible fraction of the segment.
    pub fn visible_fraction(&self) -> f64 {
        self.intervals.iter().map(|[a, b]| b - a).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedSegment {
    pub id: SegmentId,
    pub geometry: Segment3,
    pub views: Vec<View>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LineCloud {
    pub viewpoints: Vec<Viewpoint>,
    pub segments: Vec<ObservedSegment>,
}

impl LineCloud {
    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<(), LineIoError> {
        let mut problems = Vec::new();
        let mut vp_ids = BTreeSet::new();
        for vp in &self.viewpoints {
            if !vp_ids.insert(vp.id) {
                problems.push(format!("duplicate viewpoint id {}", vp.id));
            }
            if !vp.position.iter().all(|c| c.is_finite()) {
                problems.push(format!("viewpoint {} has a non-finite position", vp.id));
            }
        }
        let mut seg_ids = BTreeSet::new();
        for s in &self.segments {
            if !seg_ids.insert(s.id) {
                problems.push(format!("duplicate segment id {}", s.id));
            }
            let g = &s.geometry;
            if !g.p0.iter().chain(g.p1.iter()).all(|c| c.is_finite()) {
                problems.push(format!("segment {} has non-finite coordinates", s.id));
            } else if g.length() <= crate::geom::MIN_SEGMENT_LENGTH {
                problems.push(format!("segment {} is degenerate (zero length)", s.id));
            }
            if s.views.is_empty() {
                problems.push(format!("segment {} has no views", s.id));
            }
            let mut seen = BTreeSet::new();
            for v in &s.views {
                if !vp_ids.contains(&v.viewpoint) {
                    problems.push(format!(
                        "segment {} references missing viewpoint {}",
                        s.id, v.viewpoint
                    ));
                }
                if !seen.insert(v.viewpoint) {
                    problems.push(format!(
                        "segment {} lists viewpoint {} more than once",
                        s.id, v.viewpoint
                    ));
                }
                if v.intervals.is_empty() {
                    problems.push(format!(
                        "segment {} view {} has no visible interval",
                        s.id, v.viewpoint
                    ));
                }
                for &[a, b] in &v.intervals {
                    if !(a >= 0.0 && b <= 1.0 && b - a > MIN_INTERVAL) {
                        problems.push(format!(
                            "segment {} view {}: interval [{a}, {b}] is not a nonempty sub-interval of [0, 1]",
                            s.id, v.viewpoint
                        ));
                    }
                }
                let mut sorted = v.intervals.clone();
                sorted.sort_by(|x, y| x[0].total_cmp(&y[0]));
                for w in sorted.windows(2) {
                    if w[1][0] < w[0][1] {
                        problems.push(format!(
                            "segment {} view {}: intervals [{}, {}] and [{}, {}] overlap",
                            s.id, v.viewpoint, w[0][0], w[0][1], w[1][0], w[1][1]
                        ));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(LineIoError::Validation(problems))
        }
    }

    pub fn viewpoint_index(&self) -> BTreeMap<ViewpointId, usize> {
        self.viewpoints.iter().enumerate().map(|(i, v)| (v.id, i)).collect()
    }

    /// Axis-aligned box of all endpoints and viewpoints.
    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::empty();
        for s in &self.segments {
            b.grow(&s.geometry.p0);
            b.grow(&s.geometry.p1);
        }
        for v in &self.viewpoints {
            b.grow(&v.position);
        }
        b
    }

    /// Copy with every segment cut at a parameter in `(0, 1)`, visible
    /// intervals remapped onto the two halves. Ids of the second halves are
    /// allocated after the current maximum.
    pub fn split_segments(&self, mut cut_at: impl FnMut(&ObservedSegment) -> f64) -> LineCloud {
        let mut next_id = self.segments.iter().map(|s| s.id).max().map_or(0, |m| m + 1);
        let mut segments = Vec::with_capacity(self.segments.len() * 2);
        for s in &self.segments {
            let tc = cut_at(s);
            assert!(tc > 0.0 && tc < 1.0, "cut parameter must be inside (0, 1)");
            let remap = |lo: f64, hi: f64| -> Vec<View> {
                s.views
                    .iter()
                    .filter_map(|v| {
                        let iv: Vec<[f64; 2]> = v
                            .intervals
                            .iter()
                            .filter_map(|&[a, b]| {
                                let (a, b) = (a.max(lo), b.min(hi));
                                (b - a > MIN_INTERVAL)
                                    .then(|| [(a - lo) / (hi - lo), (b - lo) / (hi - lo)])
                            })
                            .map(|[a, b]| [a.clamp(0.0, 1.0), b.clamp(0.0, 1.0)])
                            .collect();
                        (!iv.is_empty()).then(|| View { viewpoint: v.viewpoint, intervals: iv })
                    })
                    .collect()
            };
            let first = remap(0.0, tc);
            let second = remap(tc, 1.0);
            let mid = s.geometry.point_at(tc);
            if !first.is_empty() {
                segments.push(ObservedSegment {
                    id: s.id,
                    geometry: Segment3 { p0: s.geometry.p0, p1: mid },
                    views: first,
                });
            }
            if !second.is_empty() {
                segments.push(ObservedSegment {
                    id: next_id,
                    geometry: Segment3 { p0: mid, p1: s.geometry.p1 },
                    views: second,
                });
                next_id += 1;
            }
        }
        LineCloud { viewpoints: self.viewpoints.clone(), segments }
    }
}
