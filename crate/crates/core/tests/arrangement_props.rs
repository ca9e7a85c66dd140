mod common;

use linerecon::arrangement::build_complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{micro_bbox, random_planes};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn complex_is_a_consistent_partition(seed in 0u64..10_000, count in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let planes = random_planes(&mut rng, count);
        let bbox = micro_bbox();
        let c = build_complex(&planes, bbox).unwrap();

        let volume: f64 = c.cells().iter().map(|k| k.volume).sum();
        prop_assert!((volume - bbox.volume()).abs() < 1e-9 * bbox.volume());

        for (i, cell) in c.cells().iter().enumerate() {
            prop_assert_eq!(c.locate(&cell.centroid).unwrap(), i);
        }

        for f in c.interior_faces() {
            let face = &c.faces()[f];
            let plane = &c.planes()[face.plane];
            let neg = plane.signed_distance(&c.cells()[face.negative.unwrap()].centroid);
            let pos = plane.signed_distance(&c.cells()[face.positive.unwrap()].centroid);
            prop_assert!(neg < 0.0 && pos > 0.0);
        }

        // a convex box subdivision is a 3-ball
        let euler = c.vertices().len() as i64 - c.edges().len() as i64 + c.faces().len() as i64 - c.cell_count() as i64;
        prop_assert_eq!(euler, 1);
    }
}
