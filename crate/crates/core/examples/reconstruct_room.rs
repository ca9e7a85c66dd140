//! Reconstructs a synthetic furnished room and measures precision and
//! completeness against its ground-truth surface.

use std::time::Instant;

use linerecon::eval::{compare_surfaces, SummaryOptions};
use linerecon::lineio::synth::{synth_room, RoomSpec};
use linerecon::pipeline::{reconstruct, PipelineConfig};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut spec = RoomSpec::furnished(0.01, seed);
    let (clean, _) = synth_room(&spec).unwrap();
    spec.outliers = clean.segments.len() / 10;
    let (cloud, truth) = synth_room(&spec).unwrap();
    println!("{} segments ({} outliers), {} viewpoints", cloud.segments.len(), spec.outliers, cloud.viewpoints.len());

    let config = PipelineConfig { seed, ..Default::default() };
    let start = Instant::now();
    let r = reconstruct(&cloud, &config, None).unwrap();
    let rep = &r.report;
    println!(
        "planes {} -> {}, partition {:?}, cells {}, lp vars {}, objective {:.4}, fractional {}",
        rep.planes_detected,
        rep.planes_fused,
        rep.partition,
        rep.complex.cells,
        rep.energy.lp_variables,
        rep.energy.lp_objective,
        rep.energy.fractional_cells
    );
    println!("{}", r.timings.to_json());
    println!(
        "watertight {} (boundary {}, non-manifold {}), self-intersections {}, components {}",
        rep.validation.is_watertight(),
        rep.validation.boundary_edges,
        rep.validation.non_manifold_edges,
        rep.validation.self_intersections,
        rep.validation.components
    );

    let cmp = compare_surfaces(&r.mesh_without_box(), &truth, 200_000, seed, &SummaryOptions::default()).unwrap();
    println!(
        "precision within 5 cm: {:.1} %, completeness within 8 cm: {:.1} % ({:.1?})",
        100.0 * cmp.precision.fraction_within(0.05).unwrap(),
        100.0 * cmp.completeness.fraction_within(0.08).unwrap(),
        start.elapsed()
    );
}
