//! Writes a synthetic room as a line-cloud document, reads it back and
//! summarizes what the viewpoints see.

use linerecon::lineio::synth::{synth_room, RoomSpec};
use linerecon::lineio::{load_line_cloud, save_line_cloud};

fn main() {
    let (cloud, truth) = synth_room(&RoomSpec::furnished(0.01, 3)).unwrap();
    let path = std::env::temp_dir().join("linerecon-room.json");
    save_line_cloud(&cloud, &path).unwrap();
    let back = load_line_cloud(&path).unwrap();
    assert_eq!(back.segments.len(), cloud.segments.len());

    let views: usize = back.segments.iter().map(|s| s.views.len()).sum();
    let length: f64 = back.segments.iter().map(|s| s.geometry.length()).sum();
    println!(
        "{} segments, total length {length:.2} m, {} viewpoints, {:.1} views per segment",
        back.segments.len(),
        back.viewpoints.len(),
        views as f64 / back.segments.len() as f64
    );
    println!("ground truth: {} faces, area {:.2} m2", truth.faces.len(), truth.area());
    println!("written to {}", path.display());
}
