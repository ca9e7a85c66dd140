use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LineCloud, LineIoError, ObservedSegment, View, Viewpoint};
use crate::geom::{Point3, Segment3};

pub const FORMAT_TAG: &str = "linecloud/1";

/// Coordinates are written with this many significant digits.
const COORD_DIGITS: usize = 9;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    #[serde(default = "default_units")]
    units: String,
    viewpoints: Vec<ViewpointDoc>,
    segments: Vec<SegmentDoc>,
}

fn default_units() -> String {
    "m".to_string()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ViewpointDoc {
    id: u32,
    position: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentDoc {
    id: u32,
    p0: [f64; 3],
    p1: [f64; 3],
    views: Vec<ViewDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ViewDoc {
    viewpoint: u32,
    intervals: Vec<[f64; 2]>,
}

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", COORD_DIGITS - 1, x).parse().unwrap_or(x)
}

fn coords(p: &Point3) -> [f64; 3] {
    [round_sig(p.x), round_sig(p.y), round_sig(p.z)]
}

/// Serializes a cloud as a `linecloud/1` document.
pub fn to_document_string(cloud: &LineCloud) -> String {
    let doc = Document {
        format: FORMAT_TAG.to_string(),
        units: default_units(),
        viewpoints: cloud
            .viewpoints
            .iter()
            .map(|v| ViewpointDoc { id: v.id, position: coords(&v.position) })
            .collect(),
        segments: cloud
            .segments
            .iter()
            .map(|s| SegmentDoc {
                id: s.id,
                p0: coords(&s.geometry.p0),
                p1: coords(&s.geometry.p1),
                views: s
                    .views
                    .iter()
                    .map(|v| ViewDoc { viewpoint: v.viewpoint, intervals: v.intervals.clone() })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("line cloud serializes");
    out.push('\n');
    out
}

/// Parses and validates a `linecloud/1` document.
pub fn parse_line_cloud(text: &str) -> Result<LineCloud, LineIoError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| LineIoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.format != FORMAT_TAG {
        return Err(LineIoError::UnsupportedFormat(doc.format));
    }
    let mut problems = Vec::new();
    let segments = doc
        .segments
        .into_iter()
        .filter_map(|s| {
            let geometry = Segment3 { p0: Point3::from(s.p0), p1: Point3::from(s.p1) };
            if geometry.length() <= crate::geom::MIN_SEGMENT_LENGTH {
                problems.push(format!("segment {} is degenerate (zero length)", s.id));
                return None;
            }
            Some(ObservedSegment {
                id: s.id,
                geometry,
                views: s
                    .views
                    .into_iter()
                    .map(|v| View { viewpoint: v.viewpoint, intervals: v.intervals })
                    .collect(),
            })
        })
        .collect();
    let cloud = LineCloud {
        viewpoints: doc
            .viewpoints
            .into_iter()
            .map(|v| Viewpoint { id: v.id, position: Point3::from(v.position) })
            .collect(),
        segments,
    };
    match cloud.validate() {
        Ok(()) if problems.is_empty() => Ok(cloud),
        Ok(()) => Err(LineIoError::Validation(problems)),
        Err(LineIoError::Validation(more)) => {
            problems.extend(more);
            Err(LineIoError::Validation(problems))
        }
        Err(e) => Err(e),
    }
}

pub fn load_line_cloud(path: impl AsRef<Path>) -> Result<LineCloud, LineIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| LineIoError::Io { path: path.display().to_string(), source })?;
    parse_line_cloud(&text)
}

pub fn save_line_cloud(cloud: &LineCloud, path: impl AsRef<Path>) -> Result<(), LineIoError> {
    let path = path.as_ref();
    fs::write(path, to_document_string(cloud))
        .map_err(|source| LineIoError::Io { path: path.display().to_string(), source })
}
