//! Full pipeline on the cube seen from 26 viewpoints. Writes the mesh as OFF
//! to the path given as first argument, or to stdout.

use linerecon::lineio::synth::synth_cube;
use linerecon::pipeline::{reconstruct, PipelineConfig};
use linerecon::ransac::SamplingMode;
use linerecon::surface::to_off_string;

fn main() {
    let cloud = synth_cube(0.0, 0, 0);
    let mut config = PipelineConfig::default();
    config.detect.epsilon = 0.06;
    config.detect.epsilon_fus = 0.18;
    config.detect.mode = SamplingMode::Exhaustive;
    let r = reconstruct(&cloud, &config, None).unwrap();
    eprintln!("{}", r.report.to_json());
    eprintln!("area {:.6}, watertight {}", r.mesh.area(), r.report.validation.is_watertight());
    let off = to_off_string(&r.mesh);
    match std::env::args().nth(1) {
        Some(path) => std::fs::write(path, off).unwrap(),
        None => print!("{off}"),
    }
}
