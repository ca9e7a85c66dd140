use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SupportError, SupportState};
use crate::geom::Plane;
use crate::lineio::{LineCloud, LineIoError, SegmentId};

pub const PLANES_FORMAT_TAG: &str = "planes/1";

/// One detected plane with the ids of its supporting segments. Structural
/// segments also appear in `inliers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneRecord {
    pub normal: [f64; 3],
    pub offset: f64,
    pub inliers: Vec<SegmentId>,
    pub structural: Vec<SegmentId>,
}

/// Serialized plane set. Values are written at full precision so that a
/// saved detection reloads to the identical state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanesDocument {
    pub format: String,
    /// Plane count before fusion, when the planes come from a detection run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detected: Option<usize>,
    pub planes: Vec<PlaneRecord>,
}

impl PlanesDocument {
    pub fn from_state(state: &SupportState) -> Self {
        let planes = state
            .planes()
            .iter()
            .enumerate()
            .map(|(p, plane)| {
                let sup = state.support(p);
                PlaneRecord {
                    normal: (*plane.normal()).into(),
                    offset: plane.offset(),
                    inliers: sup.iter().map(|&l| state.segment_id(l)).collect(),
                    structural: sup
                        .iter()
                        .filter(|&&l| state.is_structural(l))
                        .map(|&l| state.segment_id(l))
                        .collect(),
                }
            })
            .collect();
        PlanesDocument { format: PLANES_FORMAT_TAG.to_string(), detected: None, planes }
    }

    /// Rebuilds the support state against `cloud`.
    pub fn to_state(&self, cloud: &LineCloud) -> Result<SupportState, SupportError> {
        let index: HashMap<SegmentId, usize> =
            cloud.segments.iter().enumerate().map(|(i, s)| (s.id, i)).collect();
        let mut planes = Vec::with_capacity(self.planes.len());
        let mut problems = Vec::new();
        for (p, rec) in self.planes.iter().enumerate() {
            let plane = match Plane::try_from_parts(rec.normal, rec.offset) {
                Ok(plane) => plane,
                Err(e) => {
                    problems.push(format!("plane {p}: {e}"));
                    continue;
                }
            };
            let mut set = BTreeSet::new();
            for id in &rec.inliers {
                set.insert(*index.get(id).ok_or(SupportError::UnknownSegment(*id))?);
            }
            planes.push((plane, set));
        }
        if !problems.is_empty() {
            return Err(SupportError::Inconsistent(problems));
        }
        let ids = cloud.segments.iter().map(|s| s.id).collect();
        let state = SupportState::with_planes(ids, planes);
        let sizes: usize = state.planes().iter().enumerate().map(|(p, _)| state.support(p).len()).sum();
        let listed: usize = self.planes.iter().map(|r| r.inliers.len()).sum();
        if sizes != listed {
            return Err(SupportError::Inconsistent(vec![
                "a segment is listed more than twice or twice in one plane".to_string(),
            ]));
        }
        Ok(state)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("planes serialize");
        out.push('\n');
        out
    }

    pub fn parse(text: &str) -> Result<Self, LineIoError> {
        let doc: PlanesDocument = serde_json::from_str(text).map_err(|e| LineIoError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if doc.format != PLANES_FORMAT_TAG {
            return Err(LineIoError::UnsupportedFormat(doc.format));
        }
        Ok(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LineIoError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|source| LineIoError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LineIoError> {
        let path = path.as_ref();
        fs::write(path, self.to_json())
            .map_err(|source| LineIoError::Io { path: path.display().to_string(), source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineio::synth::synth_cube;
    use crate::ransac::{detect_planes, DetectParams};

    #[test]
    fn round_trip_is_exact() {
        let cloud = synth_cube(0.05, 10, 4);
        let params = DetectParams { epsilon: 0.06, epsilon_fus: 0.18, n_iter: 200, ..Default::default() };
        let state = detect_planes(&cloud, &params, 1);
        assert!(state.plane_count() > 0);
        let doc = PlanesDocument::from_state(&state);
        let text = doc.to_json();
        let back = PlanesDocument::parse(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_state(&cloud).unwrap(), state);
    }

    #[test]
    fn unknown_segment_is_reported() {
        let cloud = synth_cube(0.0, 0, 0);
        let doc = PlanesDocument {
            format: PLANES_FORMAT_TAG.into(),
            detected: None,
            planes: vec![PlaneRecord { normal: [0., 0., 1.], offset: 1.0, inliers: vec![99], structural: vec![] }],
        };
        assert_eq!(doc.to_state(&cloud), Err(SupportError::UnknownSegment(99)));
    }
}
