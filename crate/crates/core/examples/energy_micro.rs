//! Energy of a small scene three ways: the LP relaxation, its rounding, and
//! brute force over all labelings.

use linerecon::energy::{assemble, exhaustive_min, round, solve_lp, to_lp, EnergyParams};
use linerecon::lineio::synth::synth_cube;
use linerecon::pipeline::{arrange, detect, PipelineConfig};
use linerecon::ransac::SamplingMode;

fn main() {
    let cloud = synth_cube(0.0, 0, 0);
    let mut config = PipelineConfig::default();
    config.detect.epsilon = 0.06;
    config.detect.epsilon_fus = 0.18;
    config.detect.mode = SamplingMode::Exhaustive;
    let d = detect(&cloud, &config).unwrap();
    let complex = arrange(&cloud, &d.state, &config).unwrap();
    let (model, report) = assemble(&complex, &cloud, &d.state, &EnergyParams::default()).unwrap();
    println!("{report:?}");
    println!(
        "{} cells ({} hard-empty), {} primitive groups, {} visibility pairs, {} edge terms, {} corners",
        model.cell_count,
        model.hard_empty.len(),
        model.primitive.len(),
        model.visibility.len(),
        model.edges.len(),
        model.corners.len()
    );

    let lp = to_lp(&model);
    let sol = solve_lp(&lp).unwrap();
    let x = round(&lp.occupancies(&sol), &lp.hard_empty);
    let best = exhaustive_min(&model).unwrap();
    println!("lp objective {:.6}", sol.objective);
    println!("rounded      {:?}", model.evaluate(&x).unwrap());
    println!("exhaustive   {:?}", model.evaluate(&best).unwrap());
    let full: Vec<usize> = (0..x.len()).filter(|&c| x[c]).collect();
    println!("full cells {full:?}, same as brute force: {}", x == best);
}
