//! Precision and completeness between surfaces, and the cube detection
//! robustness experiment.

mod cube;

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geom::Point3;
use crate::surface::{triangulate, PolygonMesh, SurfaceError};

pub use cube::{cube_experiment, recovered_faces, CubeGrid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("mesh has no area to sample")]
    EmptyMesh,
    #[error("point set is empty")]
    EmptyPointSet,
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// `n` points distributed uniformly by area over the mesh.
pub fn sample_surface(mesh: &PolygonMesh, n: usize, seed: u64) -> Result<Vec<Point3>, EvalError> {
    let tri = triangulate(mesh)?;
    let corners: Vec<[Point3; 3]> = tri
        .faces
        .iter()
        .map(|t| [tri.vertices[t[0]], tri.vertices[t[1]], tri.vertices[t[2]]])
        .collect();
    let mut cumulative = Vec::with_capacity(corners.len());
    let mut total = 0.0;
    for [a, b, c] in &corners {
        total += 0.5 * (b - a).cross(&(c - a)).norm();
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(EvalError::EmptyMesh);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let target = rng.gen::<f64>() * total;
            let k = cumulative.partition_point(|&c| c <= target).min(corners.len() - 1);
            let [a, b, c] = corners[k];
            let (r1, r2) = (rng.gen::<f64>().sqrt(), rng.gen::<f64>());
            Point3::from(a.coords * (1.0 - r1) + b.coords * (r1 * (1.0 - r2)) + c.coords * (r1 * r2))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryOptions {
    pub percentiles: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub histogram_bins: usize,
    /// Upper edge of the histogram; larger distances go to the last bin.
    pub histogram_max: f64,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions {
            percentiles: vec![50.0, 75.0, 90.0, 95.0, 99.0, 100.0],
            thresholds: vec![0.01, 0.02, 0.03, 0.05, 0.08, 0.1],
            histogram_bins: 20,
            histogram_max: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceSummary {
    pub count: usize,
    pub mean: f64,
    /// `(percentile, distance)`, nearest-rank.
    pub percentiles: Vec<(f64, f64)>,
    /// `(threshold, fraction of distances <= threshold)`.
    pub within: Vec<(f64, f64)>,
    pub histogram_edges: Vec<f64>,
    pub histogram_counts: Vec<usize>,
}

impl DistanceSummary {
    pub fn from_distances(d: &[f64], options: &SummaryOptions) -> Self {
        let mut sorted = d.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let percentiles = options
            .percentiles
            .iter()
            .map(|&p| {
                let rank = ((p / 100.0) * n as f64).ceil().max(1.0) as usize;
                (p, if n == 0 { 0.0 } else { sorted[rank.min(n) - 1] })
            })
            .collect();
        let mut thresholds = options.thresholds.clone();
        thresholds.sort_by(f64::total_cmp);
        let within = thresholds
            .iter()
            .map(|&t| (t, if n == 0 { 0.0 } else { sorted.partition_point(|&x| x <= t) as f64 / n as f64 }))
            .collect();
        let bins = options.histogram_bins.max(1);
        let width = options.histogram_max / bins as f64;
        let histogram_edges = (0..=bins).map(|i| i as f64 * width).collect();
        let mut histogram_counts = vec![0; bins];
        for &x in &sorted {
            histogram_counts[((x / width) as usize).min(bins - 1)] += 1;
        }
        DistanceSummary {
            count: n,
            mean: if n == 0 { 0.0 } else { sorted.iter().sum::<f64>() / n as f64 },
            percentiles,
            within,
            histogram_edges,
            histogram_counts,
        }
    }

    /// Fraction of distances at or below `t`, for a threshold in the summary.
    pub fn fraction_within(&self, t: f64) -> Option<f64> {
        self.within.iter().find(|(x, _)| *x == t).map(|&(_, f)| f)
    }

    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("lower,upper,count\n");
        for (i, c) in self.histogram_counts.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", self.histogram_edges[i], self.histogram_edges[i + 1], c));
        }
        s
    }
}

/// Distance from each point of `from` to its nearest neighbor in `to`.
pub fn nearest_distances(from: &[Point3], to: &[Point3]) -> Result<Vec<f64>, EvalError> {
    if from.is_empty() || to.is_empty() {
        return Err(EvalError::EmptyPointSet);
    }
    let entries: Vec<[f64; 3]> = to.iter().map(|p| [p.x, p.y, p.z]).collect();
    let tree: ImmutableKdTree<f64, 3> =
        ImmutableKdTree::new_from_slice(&entries).map_err(|_| EvalError::EmptyPointSet)?;
    Ok(from
        .par_iter()
        .map(|p| tree.query(&[p.x, p.y, p.z]).nearest_one::<SquaredEuclidean<f64>>().execute().distance.sqrt())
        .collect())
}

pub fn nn_distance(from: &[Point3], to: &[Point3]) -> Result<(Vec<f64>, DistanceSummary), EvalError> {
    nn_distance_with(from, to, &SummaryOptions::default())
}

pub fn nn_distance_with(
    from: &[Point3],
    to: &[Point3],
    options: &SummaryOptions,
) -> Result<(Vec<f64>, DistanceSummary), EvalError> {
    let d = nearest_distances(from, to)?;
    let summary = DistanceSummary::from_distances(&d, options);
    Ok((d, summary))
}

/// Precision (reconstruction to ground truth) and completeness (ground
/// truth to reconstruction) from `n` samples on each surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceComparison {
    pub samples: usize,
    pub precision: DistanceSummary,
    pub completeness: DistanceSummary,
}

pub fn compare_surfaces(
    recon: &PolygonMesh,
    truth: &PolygonMesh,
    n: usize,
    seed: u64,
    options: &SummaryOptions,
) -> Result<SurfaceComparison, EvalError> {
    let r = sample_surface(recon, n, seed)?;
    let t = sample_surface(truth, n, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    Ok(SurfaceComparison {
        samples: n,
        precision: nn_distance_with(&r, &t, options)?.1,
        completeness: nn_distance_with(&t, &r, options)?.1,
    })
}
