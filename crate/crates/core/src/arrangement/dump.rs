use serde::Serialize;

use super::CellComplex;

pub const COMPLEX_FORMAT_TAG: &str = "complex/1";

#[derive(Debug, Serialize)]
pub struct ComplexDump {
    pub format: &'static str,
    pub scene_planes: usize,
    pub planes: Vec<PlaneDump>,
    pub vertices: Vec<VertexDump>,
    pub cells: Vec<CellDump>,
    pub faces: Vec<FaceDump>,
    pub edges: Vec<EdgeDump>,
}

#[derive(Debug, Serialize)]
pub struct PlaneDump {
    pub normal: [f64; 3],
    pub offset: f64,
}

#[derive(Debug, Serialize)]
pub struct VertexDump {
    pub position: [f64; 3],
    pub planes: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct CellDump {
    pub faces: Vec<usize>,
    pub neighbors: Vec<usize>,
    pub volume: f64,
}

#[derive(Debug, Serialize)]
pub struct FaceDump {
    pub plane: usize,
    pub vertices: Vec<usize>,
    pub negative: Option<usize>,
    pub positive: Option<usize>,
    pub area: f64,
}

#[derive(Debug, Serialize)]
pub struct EdgeDump {
    pub vertices: [usize; 2],
    pub planes: Vec<usize>,
    pub ring: Vec<usize>,
    pub interior: bool,
}

/// Rounds to 9 significant digits so dumps are stable across platforms.
fn r(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

impl ComplexDump {
    pub fn new(c: &CellComplex) -> Self {
        ComplexDump {
            format: COMPLEX_FORMAT_TAG,
            scene_planes: c.scene_planes,
            planes: c
                .planes
                .iter()
                .map(|p| PlaneDump { normal: p.normal().map(r).into(), offset: r(p.offset()) })
                .collect(),
            vertices: c
                .vertices
                .iter()
                .map(|v| VertexDump { position: v.position.coords.map(r).into(), planes: v.planes.clone() })
                .collect(),
            cells: c
                .cells
                .iter()
                .enumerate()
                .map(|(i, cell)| {
                    let mut neighbors: Vec<usize> = cell
                        .faces
                        .iter()
                        .flat_map(|&f| c.faces[f].cells())
                        .filter(|&o| o != i)
                        .collect();
                    neighbors.sort_unstable();
                    CellDump { faces: cell.faces.clone(), neighbors, volume: r(cell.volume) }
                })
                .collect(),
            faces: c
                .faces
                .iter()
                .map(|f| FaceDump {
                    plane: f.plane,
                    vertices: f.vertices.clone(),
                    negative: f.negative,
                    positive: f.positive,
                    area: r(f.area),
                })
                .collect(),
            edges: c
                .edges
                .iter()
                .map(|e| EdgeDump {
                    vertices: e.vertices,
                    planes: e.planes.clone(),
                    ring: e.ring.clone(),
                    interior: e.interior,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dump serializes");
        s.push('\n');
        s
    }
}

impl CellComplex {
    /// Structured `complex/1` text dump of cells, faces and edges with
    /// their adjacency.
    pub fn dump(&self) -> String {
        ComplexDump::new(self).to_json()
    }
}

#[cfg(test)]
mod tests {
    use crate::arrangement::build_complex;
    use crate::geom::{Aabb, Plane, Point3};

    #[test]
    fn one_plane_dump() {
        let c = build_complex(&[Plane::axis(0, 0.0)], Aabb::new(Point3::new(-1., -1., -1.), Point3::new(1., 1., 1.)))
            .unwrap();
        let text = c.dump();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["format"], "complex/1");
        assert_eq!(v["cells"].as_array().unwrap().len(), 2);
        assert_eq!(v["cells"][0]["neighbors"], serde_json::json!([1]));
        assert_eq!(v["faces"].as_array().unwrap().len(), 11);
        assert_eq!(text, c.dump());
    }
}
