//! Multi-support greedy RANSAC plane detection on line segments.
//!
//! A segment may support up to two planes. A segment that already supports
//! one plane only joins a second one when it lies near the intersection
//! line of both, which is what lets crease edges seed every adjacent face.

mod detect;
mod document;
mod fusion;
mod state;

pub use detect::{
    collect_inliers, detect_planes, detect_planes_with_log, draw_candidate_pair, hypothesize_plane,
    refit_until_stable, CandidateSampler, DetectionLog, Reject, MAX_REFIT_ROUNDS,
};
pub use document::{PlaneRecord, PlanesDocument, PLANES_FORMAT_TAG};
pub use fusion::{fuse_planes, fuse_planes_with_log, FusionLog};
pub use state::{SupportError, SupportState};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::SegmentDistance;

/// Candidate generation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// `n_iter` random legal pairs per greedy round.
    #[default]
    Sampled,
    /// Every legal pair, once per greedy round.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectParams {
    /// Inlier distance threshold, meters.
    pub epsilon: f64,
    /// Minimum angle between the two segments of a candidate pair, degrees.
    pub theta_min_deg: f64,
    pub n_iter: usize,
    pub n_max: usize,
    pub min_support: usize,
    /// Fusion distance threshold, meters.
    pub epsilon_fus: f64,
    /// Fusion angle threshold, degrees.
    pub theta_fus_deg: f64,
    /// Minimum common-inlier proportion for a fusion.
    pub p_fus: f64,
    pub mode: SamplingMode,
    pub distance: SegmentDistance,
    /// Rank candidates by total inlier length instead of inlier count.
    pub rank_by_length: bool,
    /// Consecutive sampled rounds without a candidate reaching
    /// `min_support` before detection stops.
    #[serde(default = "default_failed_rounds")]
    pub max_failed_rounds: usize,
}

fn default_failed_rounds() -> usize {
    DetectParams::default().max_failed_rounds
}

impl Default for DetectParams {
    fn default() -> Self {
        let epsilon = 0.02;
        DetectParams {
            epsilon,
            theta_min_deg: 5.0,
            n_iter: 50_000,
            n_max: 160,
            min_support: 4,
            epsilon_fus: 3.0 * epsilon,
            theta_fus_deg: 10.0,
            p_fus: 0.2,
            mode: SamplingMode::Sampled,
            distance: SegmentDistance::Max,
            rank_by_length: false,
            max_failed_rounds: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid detection parameters: {0}")]
pub struct ParamError(pub String);

impl DetectParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let bad = |m: &str| Err(ParamError(m.to_string()));
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be > 0");
        }
        if !(self.epsilon_fus > self.epsilon) {
            return bad("epsilon_fus must exceed epsilon");
        }
        if !(self.p_fus > 0.0 && self.p_fus <= 1.0) {
            return bad("p_fus must be in (0, 1]");
        }
        if self.max_failed_rounds == 0 {
            return bad("max_failed_rounds must be at least 1");
        }
        if self.min_support < 3 {
            return bad("min_support must be at least 3");
        }
        if !(self.theta_min_deg >= 0.0 && self.theta_min_deg < 90.0) {
            return bad("theta_min must be in [0, 90)");
        }
        if !(self.theta_fus_deg >= 0.0 && self.theta_fus_deg <= 90.0) {
            return bad("theta_fus must be in [0, 90]");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = DetectParams::default();
        p.validate().unwrap();
        assert_eq!(p.epsilon_fus, 0.06);
        assert_eq!(p.n_iter, 50_000);
        assert_eq!(p.n_max, 160);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = DetectParams { epsilon_fus: 0.01, ..Default::default() };
        assert!(p.validate().is_err());
        let p = DetectParams { p_fus: 0.0, ..Default::default() };
        assert!(p.validate().is_err());
        let p = DetectParams { min_support: 2, ..Default::default() };
        assert!(p.validate().is_err());
    }
}
