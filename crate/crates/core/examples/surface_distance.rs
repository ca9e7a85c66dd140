//! Precision and completeness of a shrunken cube against the unit cube.

use linerecon::eval::{compare_surfaces, SummaryOptions};
use linerecon::geom::Point3;
use linerecon::surface::PolygonMesh;

fn cube(half: f64) -> PolygonMesh {
    let vertices = (0..8)
        .map(|i| {
            let s = |b: usize| if i & b == 0 { -half } else { half };
            Point3::new(s(1), s(2), s(4))
        })
        .collect();
    let faces = vec![
        vec![0, 2, 3, 1],
        vec![4, 5, 7, 6],
        vec![0, 1, 5, 4],
        vec![2, 6, 7, 3],
        vec![0, 4, 6, 2],
        vec![1, 3, 7, 5],
    ];
    PolygonMesh { vertices, faces, origins: vec![] }
}

fn main() {
    let truth = cube(1.0);
    for half in [1.0, 0.98, 0.95, 0.9] {
        let cmp = compare_surfaces(&cube(half), &truth, 50_000, 1, &SummaryOptions::default()).unwrap();
        println!(
            "half-size {half}: precision mean {:.4}, within 5 cm {:.3}; completeness mean {:.4}, within 8 cm {:.3}",
            cmp.precision.mean,
            cmp.precision.fraction_within(0.05).unwrap(),
            cmp.completeness.mean,
            cmp.completeness.fraction_within(0.08).unwrap()
        );
    }
}
