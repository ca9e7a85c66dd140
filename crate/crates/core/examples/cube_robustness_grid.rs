//! Noise and outlier robustness of plane detection on the 12-edge cube.
//!
//! Prints the grid of mean recovered faces as CSV. Pass `--quick` for a
//! coarse grid.

use std::time::Instant;

use linerecon::eval::cube_experiment;
use linerecon::ransac::DetectParams;

fn main() {
    let quick = std::env::args().any(|a| a == "--quick");
    let params = DetectParams { epsilon: 0.06, epsilon_fus: 0.18, n_iter: 100, ..Default::default() };
    let (noise, outliers): (Vec<f64>, Vec<usize>) = if quick {
        (vec![0.0, 0.15, 0.35], vec![0, 25, 50])
    } else {
        ((0..=7).map(|i| i as f64 * 0.05).collect(), (0..=5).map(|i| i * 10).collect())
    };
    let start = Instant::now();
    let grid = cube_experiment(&noise, &outliers, 20, &params, 2024);
    print!("{}", grid.to_csv());
    eprintln!("{} cells x {} runs in {:.2?}", noise.len() * outliers.len(), grid.runs, start.elapsed());
}
