//! End-to-end reconstruction: detection, fusion, arrangement, labeling
//! energy, relaxation, rounding and surface extraction.

mod config;
mod repair;

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::arrangement::{build_complex_with_limit, scene_bbox, ArrangementError, CellComplex};
use crate::energy::{assemble, descend, round, solve_lp, to_lp, AssemblyReport, EnergyBreakdown, EnergyError, EnergyModel};
use crate::geom::{Point3, Segment3};
use crate::lineio::LineCloud;
use crate::ransac::{detect_planes_with_log, fuse_planes_with_log, PlanesDocument, SupportState};
use crate::surface::{extract_surface_with, validate, ExtractOptions, PolygonMesh, SurfaceError, ValidationReport};

pub use config::{ConfigError, PipelineConfig, Settings, CONFIG_KEYS};
pub use repair::{repair_labeling, RepairError, RepairReport};

pub const REPORT_FORMAT_TAG: &str = "report/1";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no segments to reconstruct from")]
    EmptyCloud,
    #[error("arrangement: {0}")]
    Arrangement(#[from] ArrangementError),
    #[error("energy: {0}")]
    Energy(#[from] EnergyError),
    #[error("surface: {0}")]
    Surface(#[from] SurfaceError),
    #[error("planes: {0}")]
    Planes(String),
}

impl From<RepairError> for PipelineError {
    fn from(e: RepairError) -> Self {
        match e {
            RepairError::Energy(e) => PipelineError::Energy(e),
            RepairError::Surface(e) => PipelineError::Surface(e),
        }
    }
}

/// Rounds of pinch repair before giving up.
const REPAIR_ROUNDS: usize = 64;
/// Sweeps of single-flip descent after rounding.
const POLISH_SWEEPS: usize = 100;

impl PipelineError {
    /// Name of the stage that failed.
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::EmptyCloud | PipelineError::Planes(_) => "detect",
            PipelineError::Arrangement(_) => "arrange",
            PipelineError::Energy(_) => "energy",
            PipelineError::Surface(_) => "extract",
        }
    }
}

/// Detection followed by fusion.
#[derive(Debug, Clone)]
pub struct Detection {
    pub state: SupportState,
    pub detected: usize,
}

impl Detection {
    pub fn to_document(&self) -> PlanesDocument {
        let mut doc = PlanesDocument::from_state(&self.state);
        doc.detected = Some(self.detected);
        doc
    }

    pub fn from_document(doc: &PlanesDocument, cloud: &LineCloud) -> Result<Self, PipelineError> {
        let state = doc.to_state(cloud).map_err(|e| PipelineError::Planes(e.to_string()))?;
        Ok(Detection { detected: doc.detected.unwrap_or(state.plane_count()), state })
    }
}

pub fn detect(cloud: &LineCloud, config: &PipelineConfig) -> Result<Detection, PipelineError> {
    if cloud.segments.is_empty() {
        return Err(PipelineError::EmptyCloud);
    }
    let segments: Vec<Segment3> = cloud.segments.iter().map(|s| s.geometry).collect();
    let (state, _) = detect_planes_with_log(cloud, &config.detect, config.seed);
    let detected = state.plane_count();
    let (state, _) = fuse_planes_with_log(state, &segments, &config.detect);
    Ok(Detection { state, detected })
}

/// Box around all segment endpoints and viewpoints.
pub fn pipeline_bbox(cloud: &LineCloud, margin: f64) -> crate::geom::Aabb {
    let pts: Vec<Point3> = cloud
        .segments
        .iter()
        .flat_map(|s| [s.geometry.p0, s.geometry.p1])
        .chain(cloud.viewpoints.iter().map(|v| v.position))
        .collect();
    scene_bbox(&pts, margin)
}

pub fn arrange(cloud: &LineCloud, state: &SupportState, config: &PipelineConfig) -> Result<CellComplex, PipelineError> {
    let limit = config.detect.n_max.max(state.plane_count());
    Ok(build_complex_with_limit(state.planes(), pipeline_bbox(cloud, config.bbox_margin), limit)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexStats {
    pub planes: usize,
    pub cells: usize,
    pub faces: usize,
    pub edges: usize,
    pub vertices: usize,
}

impl ComplexStats {
    pub fn of(c: &CellComplex) -> Self {
        ComplexStats {
            planes: c.scene_plane_count(),
            cells: c.cell_count(),
            faces: c.faces().len(),
            edges: c.edges().len(),
            vertices: c.vertices().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyStats {
    pub primitive_groups: usize,
    pub visibility_pairs: usize,
    pub edge_terms: usize,
    pub corner_terms: usize,
    pub hard_empty_cells: usize,
    pub lp_variables: usize,
    pub lp_constraints: usize,
    pub lp_objective: f64,
    /// Cells whose relaxed occupancy is not within the solver tolerance of 0 or 1.
    pub fractional_cells: usize,
    /// Energy of the final labeling, after rounding and repair.
    pub rounded: EnergyBreakdown,
    pub full_cells: usize,
    /// Cells flipped by the descent after rounding.
    pub polish_flips: usize,
    pub repair: RepairReport,
}

/// Deterministic summary of a run: identical inputs and seed give a
/// byte-identical document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub format: String,
    pub seed: u64,
    pub config: PipelineConfig,
    pub segments: usize,
    pub viewpoints: usize,
    pub planes_detected: usize,
    pub planes_fused: usize,
    /// Segments supporting 0, 1 and 2 planes.
    pub partition: [usize; 3],
    pub sub_segments: usize,
    pub complex: ComplexStats,
    pub assembly: AssemblyReport,
    pub energy: EnergyStats,
    pub validation: ValidationReport,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Wall-clock seconds per stage. Kept apart from the report, which must not
/// depend on timing.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub detect: f64,
    pub arrange: f64,
    pub energy: f64,
    pub solve: f64,
    pub extract: f64,
    pub total: f64,
}

impl StageTimings {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("timings serialize");
        s.push('\n');
        s
    }
}

pub struct Reconstruction {
    pub detection: Detection,
    pub complex: CellComplex,
    pub model: EnergyModel,
    /// Relaxed occupancy per cell.
    pub relaxed: Vec<f64>,
    pub labeling: Vec<bool>,
    /// Surface with box faces as configured.
    pub mesh: PolygonMesh,
    pub report: RunReport,
    pub timings: StageTimings,
}

impl Reconstruction {
    /// Surface without the faces on the bounding box.
    pub fn mesh_without_box(&self) -> PolygonMesh {
        extract_surface_with(&self.complex, &self.labeling, ExtractOptions { box_faces: false })
            .expect("labeling matches complex")
    }
}

/// Full run; planes are detected unless given.
pub fn reconstruct(
    cloud: &LineCloud,
    config: &PipelineConfig,
    planes: Option<Detection>,
) -> Result<Reconstruction, PipelineError> {
    let start = Instant::now();
    let mut timings = StageTimings::default();
    let mut lap = {
        let mut last = Instant::now();
        move || {
            let now = Instant::now();
            let d = (now - last).as_secs_f64();
            last = now;
            d
        }
    };
    let detection = match planes {
        Some(d) => d,
        None => detect(cloud, config)?,
    };
    timings.detect = lap();
    let state = &detection.state;
    let complex = arrange(cloud, state, config)?;
    timings.arrange = lap();
    let (model, assembly) = assemble(&complex, cloud, state, &config.energy)?;
    timings.energy = lap();
    let lp = to_lp(&model);
    let solution = solve_lp(&lp)?;
    let relaxed = lp.occupancies(&solution);
    let mut labeling = round(&relaxed, &model.hard_empty);
    let polish_flips = if config.polish { descend(&model, &mut labeling, POLISH_SWEEPS).len() } else { 0 };
    timings.solve = lap();
    let options = ExtractOptions { box_faces: !config.suppress_box_faces };
    let (mesh, repair) = repair_labeling(&complex, &model, &mut labeling, options, REPAIR_ROUNDS)?;
    let rounded = model.evaluate(&labeling)?;
    let validation = validate(&mesh)?;
    timings.extract = lap();
    timings.total = start.elapsed().as_secs_f64();

    let tol = config.solver_tolerance;
    let report = RunReport {
        format: REPORT_FORMAT_TAG.into(),
        seed: config.seed,
        config: config.clone(),
        segments: cloud.segments.len(),
        viewpoints: cloud.viewpoints.len(),
        planes_detected: detection.detected,
        planes_fused: state.plane_count(),
        partition: state.partition_sizes(),
        sub_segments: assembly.fragments,
        complex: ComplexStats::of(&complex),
        assembly,
        energy: EnergyStats {
            primitive_groups: model.primitive.len(),
            visibility_pairs: model.visibility.len(),
            edge_terms: model.edges.len(),
            corner_terms: model.corners.len(),
            hard_empty_cells: model.hard_empty.len(),
            lp_variables: lp.vars.len(),
            lp_constraints: lp.constraints.len(),
            lp_objective: solution.objective,
            fractional_cells: relaxed.iter().filter(|&&v| v > tol && v < 1.0 - tol).count(),
            rounded,
            full_cells: labeling.iter().filter(|&&b| b).count(),
            polish_flips,
            repair,
        },
        validation,
    };
    Ok(Reconstruction { detection, complex, model, relaxed, labeling, mesh, report, timings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineio::synth::synth_cube;
    use crate::ransac::SamplingMode;

    fn cube_config() -> PipelineConfig {
        let mut c = PipelineConfig::default();
        c.detect.epsilon = 0.06;
        c.detect.epsilon_fus = 0.18;
        c.detect.mode = SamplingMode::Exhaustive;
        c
    }

    #[test]
    fn clean_cube_end_to_end() {
        let cloud = synth_cube(0.0, 0, 0);
        let r = reconstruct(&cloud, &cube_config(), None).unwrap();
        assert_eq!(r.report.planes_fused, 6);
        assert_eq!(r.report.partition, [0, 0, 12]);
        assert!(r.report.validation.is_clean());
        assert!((r.report.validation.area - 24.0).abs() < 1e-9);
        assert_eq!(r.report.energy.full_cells, 1);
    }

    #[test]
    fn planes_document_reproduces_the_run() {
        let cloud = synth_cube(0.02, 5, 3);
        let config = cube_config();
        let one_shot = reconstruct(&cloud, &config, None).unwrap();
        let doc = PlanesDocument::parse(&one_shot.detection.to_document().to_json()).unwrap();
        let staged = reconstruct(&cloud, &config, Some(Detection::from_document(&doc, &cloud).unwrap())).unwrap();
        assert_eq!(staged.report.to_json(), one_shot.report.to_json());
        assert_eq!(staged.mesh, one_shot.mesh);
    }
}
