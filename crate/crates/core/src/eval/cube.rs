use rayon::prelude::*;
use serde::Serialize;

use crate::lineio::synth::{cube_face_edges, synth_cube};
use crate::ransac::{detect_planes, DetectParams, SupportState};

/// Mean number of recovered cube faces per (noise, outlier count) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeGrid {
    pub noise_levels: Vec<f64>,
    pub outlier_counts: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
    /// `mean[i][j]` for `noise_levels[i]` and `outlier_counts[j]`.
    pub mean: Vec<Vec<f64>>,
}

impl CubeGrid {
    pub fn get(&self, noise: f64, outliers: usize) -> Option<f64> {
        let i = self.noise_levels.iter().position(|&x| x == noise)?;
        let j = self.outlier_counts.iter().position(|&x| x == outliers)?;
        Some(self.mean[i][j])
    }

    /// One row per noise level, one column per outlier count.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("noise");
        for o in &self.outlier_counts {
            s.push_str(&format!(",{o}"));
        }
        s.push('\n');
        for (i, noise) in self.noise_levels.iter().enumerate() {
            s.push_str(&format!("{noise}"));
            for m in &self.mean[i] {
                s.push_str(&format!(",{m:.2}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Cube faces whose four edges all support a single detected plane.
pub fn recovered_faces(state: &SupportState) -> usize {
    cube_face_edges()
        .iter()
        .filter(|edges| {
            (0..state.plane_count()).any(|p| {
                let support = state.support(p);
                edges.iter().all(|&id| support.contains(&(id as usize)))
            })
        })
        .count()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of one run in one grid cell.
pub(crate) fn run_seed(seed: u64, cell: usize, run: usize) -> u64 {
    seed ^ splitmix64(((cell as u64) << 32) | run as u64)
}

/// Runs detection `runs` times on noisy cubes for every grid cell. The same
/// seed drives both the scene and the detector of a run.
pub fn cube_experiment(
    noise_levels: &[f64],
    outlier_counts: &[usize],
    runs: usize,
    params: &DetectParams,
    seed: u64,
) -> CubeGrid {
    let cols = outlier_counts.len();
    let jobs: Vec<(usize, usize)> = (0..noise_levels.len() * cols).flat_map(|c| (0..runs).map(move |r| (c, r))).collect();
    let found: Vec<usize> = jobs
        .par_iter()
        .map(|&(cell, run)| {
            let s = run_seed(seed, cell, run);
            let cloud = synth_cube(noise_levels[cell / cols], outlier_counts[cell % cols], s);
            recovered_faces(&detect_planes(&cloud, params, s))
        })
        .collect();
    let mean = (0..noise_levels.len())
        .map(|i| {
            (0..cols)
                .map(|j| {
                    let cell = i * cols + j;
                    let total: usize = found[cell * runs..(cell + 1) * runs].iter().sum();
                    if runs == 0 { 0.0 } else { total as f64 / runs as f64 }
                })
                .collect()
        })
        .collect();
    CubeGrid { noise_levels: noise_levels.to_vec(), outlier_counts: outlier_counts.to_vec(), runs, seed, mean }
}
