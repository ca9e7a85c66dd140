use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{DetectParams, SamplingMode, SupportState};
use crate::geom::{
    fit_plane, line_line_distance, segment_angle, segment_line_distance,
    segment_plane_distance_with, GeomError, Line3, Plane, Point3, Segment3, SegmentDistance,
};
use crate::lineio::LineCloud;

/// Cap on refit/re-collect rounds for one plane.
pub const MAX_REFIT_ROUNDS: usize = 20;

/// Why a segment pair does not yield a candidate plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reject {
    /// The segments are (nearly) parallel.
    Angle,
    /// The supporting lines are farther apart than epsilon.
    NonCoplanar,
    Degenerate,
}

/// Legal-pair sampler over the segments still available (`L0 u L1`) for
/// one greedy round. A first segment already supporting `P'` is never
/// paired with another supporter of `P'`.
#[derive(Debug)]
pub struct CandidateSampler<'a> {
    state: &'a SupportState,
    pool: Vec<usize>,
    in_pool: Vec<bool>,
    /// Pool segments with at least one legal partner.
    firsts: Vec<usize>,
    partners: HashMap<usize, Vec<usize>>,
}

impl<'a> CandidateSampler<'a> {
    /// `None` when no legal pair remains.
    pub fn new(state: &'a SupportState) -> Option<Self> {
        let pool = state.available();
        let mut in_pool = vec![false; state.segment_count()];
        for &l in &pool {
            in_pool[l] = true;
        }
        let mut partners: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut firsts = Vec::new();
        for &l in &pool {
            let ok = match state.planes_of(l) {
                [] => pool.len() >= 2,
                [p] => {
                    let list = partners.entry(*p).or_insert_with(|| {
                        let sup = state.support(*p);
                        pool.iter().copied().filter(|m| !sup.contains(m)).collect()
                    });
                    !list.is_empty()
                }
                _ => false,
            };
            if ok {
                firsts.push(l);
            }
        }
        if firsts.is_empty() {
            return None;
        }
        Some(CandidateSampler { state, pool, in_pool, firsts, partners })
    }

    pub fn pool(&self) -> &[usize] {
        &self.pool
    }

    /// Partners allowed for `a`.
    pub fn is_legal(&self, a: usize, b: usize) -> bool {
        if a == b || !self.in_pool[a] || !self.in_pool[b] {
            return false;
        }
        let pa = self.state.planes_of(a);
        !self.state.planes_of(b).iter().any(|p| pa.contains(p))
    }

    pub fn draw(&self, rng: &mut impl Rng) -> (usize, usize) {
        let a = self.firsts[rng.gen_range(0..self.firsts.len())];
        let b = match self.state.planes_of(a) {
            [p] => {
                let list = &self.partners[p];
                list[rng.gen_range(0..list.len())]
            }
            _ => {
                // uniform over pool \ {a}
                let i = rng.gen_range(0..self.pool.len() - 1);
                let j = self.pool.binary_search(&a).expect("first segment is in the pool");
                self.pool[if i >= j { i + 1 } else { i }]
            }
        };
        (a, b)
    }

    /// Every unordered legal pair, in lexicographic order.
    pub fn all_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, &a) in self.pool.iter().enumerate() {
            for &b in &self.pool[i + 1..] {
                if self.is_legal(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Draws one legal candidate pair; `None` when none remains.
pub fn draw_candidate_pair(state: &SupportState, rng: &mut impl Rng) -> Option<(usize, usize)> {
    CandidateSampler::new(state).map(|s| s.draw(rng))
}

fn weighted_endpoints<'s>(segs: impl IntoIterator<Item = &'s Segment3>) -> Vec<(Point3, f64)> {
    segs.into_iter().flat_map(|s| {
        let w = s.length();
        [(s.p0, w), (s.p1, w)]
    })
    .collect()
}

/// Plane through two segments, or the reason there is none.
pub fn hypothesize_plane(a: &Segment3, b: &Segment3, params: &DetectParams) -> Result<Plane, Reject> {
    if segment_angle(a, b) < params.theta_min_deg {
        return Err(Reject::Angle);
    }
    if line_line_distance(a, b) > params.epsilon {
        return Err(Reject::NonCoplanar);
    }
    fit_plane(&weighted_endpoints([a, b])).map_err(|_| Reject::Degenerate)
}

/// Available segments within epsilon of `plane`. A segment that already
/// supports `P'` must also lie within epsilon of the line `plane n P'`.
pub fn collect_inliers(
    plane: &Plane,
    state: &SupportState,
    segments: &[Segment3],
    epsilon: f64,
    kind: SegmentDistance,
) -> Vec<usize> {
    let mut creases: HashMap<usize, Option<Line3>> = HashMap::new();
    let mut out = Vec::new();
    for l in 0..segments.len() {
        let planes = state.planes_of(l);
        if planes.len() >= 2 {
            continue;
        }
        if segment_plane_distance_with(&segments[l], plane, kind) > epsilon {
            continue;
        }
        if let [p] = planes {
            let line = creases
                .entry(*p)
                .or_insert_with(|| plane.intersection(&state.planes()[*p]).ok());
            match line {
                Some(line) if segment_line_distance(&segments[l], line) <= epsilon => {}
                _ => continue,
            }
        }
        out.push(l);
    }
    out
}

fn count_inliers(
    plane: &Plane,
    state: &SupportState,
    segments: &[Segment3],
    params: &DetectParams,
) -> f64 {
    let inliers = collect_inliers(plane, state, segments, params.epsilon, params.distance);
    if params.rank_by_length {
        inliers.iter().map(|&l| segments[l].length()).sum()
    } else {
        inliers.len() as f64
    }
}

/// Refits the plane to its inliers (endpoints weighted by segment length)
/// and re-collects, until no new segment enters the epsilon slab or
/// [`MAX_REFIT_ROUNDS`] is reached. The inlier set never shrinks here.
pub fn refit_until_stable(
    plane: Plane,
    inliers: &[usize],
    state: &SupportState,
    segments: &[Segment3],
    params: &DetectParams,
) -> Result<(Plane, Vec<usize>), GeomError> {
    let mut current: BTreeSet<usize> = inliers.iter().copied().collect();
    let mut plane = plane;
    for _ in 0..MAX_REFIT_ROUNDS {
        plane = fit_plane(&weighted_endpoints(current.iter().map(|&l| &segments[l])))?;
        let before = current.len();
        current.extend(collect_inliers(&plane, state, segments, params.epsilon, params.distance));
        if current.len() == before {
            break;
        }
    }
    Ok((plane, current.into_iter().collect()))
}

/// Per-round record of a greedy detection run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionLog {
    /// Candidate count evaluated per round.
    pub candidates: Vec<usize>,
    /// Inlier count of the committed plane per round.
    pub committed_support: Vec<usize>,
}

/// Greedy multi-support detection. Deterministic given `seed`.
pub fn detect_planes(cloud: &LineCloud, params: &DetectParams, seed: u64) -> SupportState {
    detect_planes_with_log(cloud, params, seed).0
}

pub fn detect_planes_with_log(
    cloud: &LineCloud,
    params: &DetectParams,
    seed: u64,
) -> (SupportState, DetectionLog) {
    let segments: Vec<Segment3> = cloud.segments.iter().map(|s| s.geometry).collect();
    let mut state = SupportState::new(cloud);
    let mut log = DetectionLog::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failed = 0;
    while state.plane_count() < params.n_max {
        let Some(sampler) = CandidateSampler::new(&state) else { break };
        let pairs = match params.mode {
            SamplingMode::Sampled => (0..params.n_iter).map(|_| sampler.draw(&mut rng)).collect(),
            SamplingMode::Exhaustive => sampler.all_pairs(),
        };
        log.candidates.push(pairs.len());
        let scores: Vec<Option<(f64, Plane)>> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let plane = hypothesize_plane(&segments[a], &segments[b], params).ok()?;
                Some((count_inliers(&plane, &state, &segments, params), plane))
            })
            .collect();
        // first maximum in draw order
        let mut best: Option<(f64, Plane)> = None;
        for s in scores.into_iter().flatten() {
            if best.as_ref().map_or(true, |b| s.0 > b.0) {
                best = Some(s);
            }
        }
        let accepted = best.and_then(|(_, h)| {
            let initial = collect_inliers(&h, &state, &segments, params.epsilon, params.distance);
            (initial.len() >= params.min_support).then_some((h, initial))
        });
        let Some((hypothesis, initial)) = accepted else {
            failed += 1;
            // an exhaustive round has nothing new to draw next time
            if params.mode == SamplingMode::Exhaustive || failed >= params.max_failed_rounds {
                break;
            }
            continue;
        };
        failed = 0;
        // keep only inliers that pass against the final plane so the
        // support invariants hold; fall back to the hypothesis otherwise
        let refined = refit_until_stable(hypothesis, &initial, &state, &segments, params)
            .ok()
            .map(|(plane, _)| {
                let kept = collect_inliers(&plane, &state, &segments, params.epsilon, params.distance);
                (plane, kept)
            })
            .filter(|(_, kept)| kept.len() >= params.min_support);
        let (plane, inliers) = refined.unwrap_or((hypothesis, initial));
        log.committed_support.push(inliers.len());
        state.commit(plane, inliers);
    }
    (state, log)
}
