use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::PolygonMesh;
use crate::geom::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self, MeshIoError> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("off") => Ok(MeshFormat::Off),
            Some("obj") => Ok(MeshFormat::Obj),
            _ => Err(MeshIoError::UnknownFormat(path.display().to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot tell mesh format of {0}; use .off or .obj")]
    UnknownFormat(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshIoError {
    MeshIoError::Parse { line, message: message.into() }
}

pub fn to_off_string(mesh: &PolygonMesh) -> String {
    let mut s = format!("OFF\n{} {} 0\n", mesh.vertices.len(), mesh.faces.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", v.x, v.y, v.z);
    }
    for f in &mesh.faces {
        let _ = write!(s, "{}", f.len());
        for i in f {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    s
}

pub fn to_obj_string(mesh: &PolygonMesh) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in &mesh.faces {
        s.push('f');
        for i in f {
            let _ = write!(s, " {}", i + 1);
        }
        s.push('\n');
    }
    s
}

fn check_face(face: &[usize], nv: usize, line: usize) -> Result<(), MeshIoError> {
    if face.len() < 3 {
        return Err(parse_err(line, "face with fewer than 3 vertices"));
    }
    if let Some(&bad) = face.iter().find(|&&i| i >= nv) {
        return Err(parse_err(line, format!("vertex index {bad} out of range")));
    }
    Ok(())
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, MeshIoError> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing coordinate"))?;
    let x: f64 = tok.parse().map_err(|_| parse_err(line, format!("bad number {tok:?}")))?;
    if !x.is_finite() {
        return Err(parse_err(line, "non-finite coordinate"));
    }
    Ok(x)
}

pub fn parse_off(text: &str) -> Result<PolygonMesh, MeshIoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (n, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut counts_line = None;
    if header != "OFF" {
        match header.strip_prefix("OFF") {
            Some(rest) if !rest.is_empty() && rest.starts_with(char::is_whitespace) => {
                counts_line = Some((n, rest.trim()))
            }
            _ => return Err(parse_err(n, "missing OFF header")),
        }
    }
    let (n, counts) = match counts_line {
        Some(c) => c,
        None => lines.next().ok_or_else(|| parse_err(n, "missing counts"))?,
    };
    let c: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(n, format!("bad count {t:?}"))))
        .collect::<Result<_, _>>()?;
    let [nv, nf, ..] = c[..] else { return Err(parse_err(n, "expected vertex and face counts")) };
    let mut mesh = PolygonMesh::default();
    for _ in 0..nv {
        let (n, l) = lines.next().ok_or_else(|| parse_err(n, "truncated vertex list"))?;
        let mut t = l.split_whitespace();
        mesh.vertices.push(Point3::new(parse_f64(t.next(), n)?, parse_f64(t.next(), n)?, parse_f64(t.next(), n)?));
    }
    for _ in 0..nf {
        let (n, l) = lines.next().ok_or_else(|| parse_err(n, "truncated face list"))?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(n, format!("bad index {t:?}"))))
            .collect::<Result<_, _>>()?;
        let (&k, rest) = idx.split_first().ok_or_else(|| parse_err(n, "empty face"))?;
        if rest.len() < k {
            return Err(parse_err(n, "face shorter than its vertex count"));
        }
        let face = rest[..k].to_vec();
        check_face(&face, nv, n)?;
        mesh.faces.push(face);
    }
    Ok(mesh)
}

pub fn parse_obj(text: &str) -> Result<PolygonMesh, MeshIoError> {
    let mut mesh = PolygonMesh::default();
    let mut faces = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let n = i + 1;
        let mut t = l.split('#').next().unwrap_or("").split_whitespace();
        match t.next() {
            Some("v") => {
                mesh.vertices.push(Point3::new(parse_f64(t.next(), n)?, parse_f64(t.next(), n)?, parse_f64(t.next(), n)?))
            }
            Some("f") => {
                let mut face = Vec::new();
                for tok in t {
                    let head = tok.split('/').next().unwrap_or("");
                    let k: i64 = head.parse().map_err(|_| parse_err(n, format!("bad index {tok:?}")))?;
                    let idx = match k {
                        0 => return Err(parse_err(n, "index 0")),
                        k if k > 0 => k - 1,
                        k => mesh.vertices.len() as i64 + k,
                    };
                    if idx < 0 {
                        return Err(parse_err(n, format!("vertex index {k} out of range")));
                    }
                    face.push(idx as usize);
                }
                faces.push((n, face));
            }
            _ => {}
        }
    }
    for (n, face) in faces {
        check_face(&face, mesh.vertices.len(), n)?;
        mesh.faces.push(face);
    }
    Ok(mesh)
}

/// Writes the mesh in the format given by the file extension.
pub fn save_mesh(mesh: &PolygonMesh, path: &Path) -> Result<(), MeshIoError> {
    let text = match MeshFormat::from_path(path)? {
        MeshFormat::Off => to_off_string(mesh),
        MeshFormat::Obj => to_obj_string(mesh),
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_mesh(path: &Path) -> Result<PolygonMesh, MeshIoError> {
    let format = MeshFormat::from_path(path)?;
    let text = std::fs::read_to_string(path)?;
    match format {
        MeshFormat::Off => parse_off(&text),
        MeshFormat::Obj => parse_obj(&text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::tests::cube_mesh;
    use crate::surface::triangulate;

    #[test]
    fn triangulated_cube_file() {
        let dir = tempfile::tempdir().unwrap();
        let tri = triangulate(&cube_mesh()).unwrap();
        for name in ["cube.off", "cube.obj"] {
            let path = dir.path().join(name);
            save_mesh(&tri, &path).unwrap();
            let back = load_mesh(&path).unwrap();
            assert_eq!(back.vertices.len(), 8);
            assert_eq!(back.faces.len(), 12);
            assert_eq!(back.vertices, tri.vertices);
            assert_eq!(back.faces, tri.faces);
        }
    }

    #[test]
    fn polygon_faces_survive() {
        let m = cube_mesh();
        let back = parse_off(&to_off_string(&m)).unwrap();
        assert_eq!(back.faces, m.faces);
        let back = parse_obj(&to_obj_string(&m)).unwrap();
        assert_eq!(back.faces, m.faces);
    }

    #[test]
    fn obj_variants() {
        let m = parse_obj("# c\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 -1//1\n").unwrap();
        assert_eq!(m.faces, vec![vec![0, 1, 2]]);
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
    }

    #[test]
    fn off_errors() {
        assert!(matches!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n"), Err(MeshIoError::Parse { .. })));
        assert!(matches!(parse_off("PLY\n"), Err(MeshIoError::Parse { line: 1, .. })));
        assert!(parse_off("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").is_ok());
        assert!(matches!(
            save_mesh(&cube_mesh(), Path::new("x.stl")),
            Err(MeshIoError::UnknownFormat(_))
        ));
    }
}
