//! Plane detection on the 12-edge cube: prints each plane with the segments
//! it supports, then the planes document.

use linerecon::lineio::synth::synth_cube;
use linerecon::ransac::{detect_planes, DetectParams, SamplingMode};

fn main() {
    let noise: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let cloud = synth_cube(noise, 0, 7);
    let params = DetectParams { epsilon: 0.06, epsilon_fus: 0.18, mode: SamplingMode::Exhaustive, ..Default::default() };
    let state = detect_planes(&cloud, &params, 7);
    for (p, plane) in state.planes().iter().enumerate() {
        let n = plane.normal();
        println!(
            "plane {p}: n = ({:+.3}, {:+.3}, {:+.3}), d = {:+.3}, segments {:?}",
            n.x,
            n.y,
            n.z,
            plane.offset(),
            state.support(p)
        );
    }
    let [l0, l1, l2] = state.partition_sizes();
    println!("unassigned {l0}, textural {l1}, structural {l2}");
    print!("{}", linerecon::ransac::PlanesDocument::from_state(&state).to_json());
}
