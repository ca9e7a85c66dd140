use linerecon::geom::{fit_plane, project_segment, Carrier, Plane, Point3, Segment3, Vec3};
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3> {
    vec3().prop_filter("not tiny", |v| v.norm() > 0.2).prop_map(|v| v.normalize())
}

fn point() -> impl Strategy<Value = Point3> {
    vec3().prop_map(|v| Point3::from(v * 3.0))
}

fn sse(points: &[(Point3, f64)], normal: &Vec3) -> f64 {
    let total: f64 = points.iter().map(|(_, w)| w).sum();
    let c = points.iter().fold(Vec3::zeros(), |a, (p, w)| a + p.coords * *w) / total;
    points.iter().map(|(p, w)| w * normal.dot(&(p.coords - c)).powi(2)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // brute oracle: no sampled direction beats the fitted normal
    #[test]
    fn fit_is_no_worse_than_sampled_normals(
        pts in prop::collection::vec((point(), 0.1..2.0f64), 4..12),
        dirs in prop::collection::vec(unit(), 64),
    ) {
        if let Ok(plane) = fit_plane(&pts) {
            let best = sse(&pts, &plane.normal().normalize());
            for d in &dirs {
                prop_assert!(best <= sse(&pts, d) + 1e-9 * (1.0 + best));
            }
        }
    }

    #[test]
    fn exact_planes_are_recovered(n in unit(), offset in -2.0..2.0f64, raw in prop::collection::vec(point(), 5..10)) {
        let truth = Plane::new(n, offset).unwrap();
        let pts: Vec<(Point3, f64)> = raw.iter().map(|p| (truth.project(p), 1.0)).collect();
        if let Ok(fit) = fit_plane(&pts) {
            for (p, _) in &pts {
                prop_assert!(fit.signed_distance(p).abs() < 1e-7);
            }
            prop_assert!(fit.angle_to(&truth) < 1e-6);
        }
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal(n in unit(), offset in -2.0..2.0f64, p in point()) {
        let plane = Plane::new(n, offset).unwrap();
        let q = plane.project(&p);
        prop_assert!(plane.signed_distance(&q).abs() < 1e-12);
        prop_assert!((plane.project(&q) - q).norm() < 1e-12);
        prop_assert!((p - q).cross(plane.normal()).norm() < 1e-9);
    }

    #[test]
    fn crease_projection_lies_on_both_planes(a in unit(), b in unit(), oa in -1.0..1.0f64, ob in -1.0..1.0f64, p0 in point(), p1 in point()) {
        prop_assume!(a.cross(&b).norm() > 0.2);
        let (pa, pb) = (Plane::new(a, oa).unwrap(), Plane::new(b, ob).unwrap());
        let seg = Segment3::new(p0, p1);
        prop_assume!(seg.is_ok());
        let s = project_segment(&seg.unwrap(), Carrier::Crease(&pa, &pb)).unwrap();
        for q in [s.p0, s.p1] {
            prop_assert!(pa.signed_distance(&q).abs() < 1e-9);
            prop_assert!(pb.signed_distance(&q).abs() < 1e-9);
        }
    }
}
