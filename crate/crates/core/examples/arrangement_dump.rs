//! Arrangement of three oblique planes in a box: counts, a few adjacency
//! queries and the text dump.

use linerecon::arrangement::build_complex;
use linerecon::geom::{Aabb, Plane, Point3, Vec3};

fn main() {
    let planes = vec![
        Plane::new(Vec3::new(1.0, 0.2, 0.0), 0.1).unwrap(),
        Plane::new(Vec3::new(0.0, 1.0, 0.3), -0.2).unwrap(),
        Plane::new(Vec3::new(0.3, -0.2, 1.0), 0.0).unwrap(),
    ];
    let bbox = Aabb::new(Point3::new(-1.0, -1.0, -1.0), Point3::new(1.0, 1.0, 1.0));
    let c = build_complex(&planes, bbox).unwrap();
    println!(
        "{} vertices, {} edges, {} faces, {} cells, volume {:.6}",
        c.vertices().len(),
        c.edges().len(),
        c.faces().len(),
        c.cell_count(),
        c.total_volume()
    );
    let origin = c.locate(&Point3::new(0.5, 0.5, 0.5)).unwrap();
    println!("(0.5, 0.5, 0.5) lies in cell {origin}; its neighbours:");
    for &f in &c.cells()[origin].faces {
        let face = &c.faces()[f];
        let other = face.cells().find(|&k| k != origin);
        println!("  face {f} on plane {} (area {:.4}) -> {:?}", face.plane, face.area, other);
    }
    for e in c.interior_edges().take(3) {
        println!("edge {e}: ring {:?}", c.edges()[e].ring);
    }
    print!("{}", c.dump());
}
