use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use super::{CornerTerm, EdgeTerm, EnergyError, EnergyModel, EnergyParams, PrimitiveGroup, VisibilityPair};
use crate::arrangement::{ArrangementError, CellComplex};
use crate::geom::{project_segment, Carrier, Segment3};
use crate::lineio::LineCloud;
use crate::ransac::SupportState;

/// Counts of skipped or degenerate contributions during assembly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AssemblyReport {
    pub fragments: usize,
    /// (segment, viewpoint) primitive contributions dropped because the
    /// viewpoint lies on a carrier plane.
    pub grazing_primitive: usize,
    /// (segment, viewpoint) visibility contributions dropped for the same reason.
    pub grazing_visibility: usize,
    /// Segments that could not be placed in the box.
    pub skipped_segments: usize,
    /// Viewpoints outside the box or on a plane, left unconstrained.
    pub unlocated_viewpoints: usize,
}

#[derive(Default)]
struct Partial {
    prim: Vec<(Vec<usize>, f64)>,
    vis: Vec<(usize, f64)>,
    fragments: usize,
    grazing_prim: usize,
    grazing_vis: usize,
    skipped: bool,
}

/// Parameter range of the segment inside the box.
fn clip_to_box(seg: &Segment3, complex: &CellComplex) -> Option<(f64, f64)> {
    let b = complex.bbox();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let d = seg.vector();
    for i in 0..3 {
        if d[i].abs() < 1e-15 {
            if seg.p0[i] < b.min[i] || seg.p0[i] > b.max[i] {
                return None;
            }
            continue;
        }
        let t0 = (b.min[i] - seg.p0[i]) / d[i];
        let t1 = (b.max[i] - seg.p0[i]) / d[i];
        lo = lo.max(t0.min(t1));
        hi = hi.min(t0.max(t1));
    }
    (hi - lo > 1e-12).then_some((lo, hi))
}

/// Segment geometry used for the energy: textural segments projected onto
/// their plane, structural ones onto the crease of their two planes.
pub(crate) fn energy_geometry(seg: &Segment3, planes: &[usize], complex: &CellComplex) -> Segment3 {
    let pl = complex.planes();
    let projected = match planes {
        [p] => project_segment(seg, Carrier::Plane(&pl[*p])).ok(),
        [p, q] => project_segment(seg, Carrier::Crease(&pl[*p], &pl[*q]))
            .or_else(|_| project_segment(seg, Carrier::Plane(&pl[*p])))
            .ok(),
        _ => None,
    };
    projected.filter(|s| s.length() > 1e-12).unwrap_or(*seg)
}

fn overlap(t0: f64, t1: f64, intervals: &[[f64; 2]]) -> f64 {
    intervals.iter().map(|&[a, b]| (t1.min(b) - t0.max(a)).max(0.0)).sum()
}

/// Builds the energy terms. Primitive groups come from segments supporting
/// at least one plane; visibility pairs from every segment. Terms are
/// merged by cell set and by face in a fixed order.
pub fn assemble(
    complex: &CellComplex,
    cloud: &LineCloud,
    support: &SupportState,
    params: &EnergyParams,
) -> Result<(EnergyModel, AssemblyReport), EnergyError> {
    for (p, plane) in support.planes().iter().enumerate() {
        if p >= complex.scene_plane_count() || complex.planes()[p] != *plane {
            return Err(EnergyError::MissingPlane(p));
        }
    }
    let vp_index = cloud.viewpoint_index();
    let partials: Vec<Partial> = cloud
        .segments
        .par_iter()
        .enumerate()
        .map(|(l, obs)| {
            let mut out = Partial::default();
            let geometry = energy_geometry(&obs.geometry, support.planes_of(l), complex);
            let Some((lo, hi)) = clip_to_box(&geometry, complex) else {
                out.skipped = true;
                return out;
            };
            let seg = if (lo, hi) == (0.0, 1.0) { geometry } else { geometry.sub(lo, hi) };
            let remap = |iv: &[[f64; 2]]| -> Vec<[f64; 2]> {
                iv.iter()
                    .filter_map(|&[a, b]| {
                        let (a, b) = (((a - lo) / (hi - lo)).max(0.0), ((b - lo) / (hi - lo)).min(1.0));
                        (b > a).then_some([a, b])
                    })
                    .collect()
            };
            let len = seg.length();
            let fragments = if support.class_of(l) > 0 {
                match complex.split_segment(&seg) {
                    Ok(f) => f,
                    Err(_) => {
                        out.skipped = true;
                        return out;
                    }
                }
            } else {
                Vec::new()
            };
            out.fragments = fragments.len();
            for view in &obs.views {
                let Some(&vi) = vp_index.get(&view.viewpoint) else { continue };
                let v = cloud.viewpoints[vi].position;
                let intervals = remap(&view.intervals);
                if intervals.is_empty() {
                    continue;
                }
                for fr in &fragments {
                    let visible = overlap(fr.t0, fr.t1, &intervals) * len;
                    if visible <= 0.0 {
                        continue;
                    }
                    match complex.behind_cells(&fr.carrier, &v) {
                        Ok(cells) if !cells.is_empty() => out.prim.push((cells, visible / params.sigma)),
                        Ok(_) => {}
                        Err(ArrangementError::GrazingViewpoint(_)) => out.grazing_prim += 1,
                        Err(_) => {}
                    }
                }
                match complex.sight_crossings(&v, &seg, &intervals) {
                    Ok(xs) => out
                        .vis
                        .extend(xs.into_iter().map(|c| (c.face, params.lambda_vis * c.length / params.sigma))),
                    Err(_) => out.grazing_vis += 1,
                }
            }
            out
        })
        .collect();

    let mut report = AssemblyReport::default();
    let mut prim: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut vis: BTreeMap<usize, f64> = BTreeMap::new();
    for p in partials {
        report.fragments += p.fragments;
        report.grazing_primitive += p.grazing_prim;
        report.grazing_visibility += p.grazing_vis;
        report.skipped_segments += p.skipped as usize;
        for (cells, w) in p.prim {
            *prim.entry(cells).or_insert(0.0) += w;
        }
        for (f, w) in p.vis {
            *vis.entry(f).or_insert(0.0) += w;
        }
    }

    let mut model = EnergyModel { cell_count: complex.cell_count(), ..Default::default() };
    model.primitive = prim.into_iter().map(|(cells, weight)| PrimitiveGroup { cells, weight }).collect();
    model.visibility = vis
        .into_iter()
        .filter_map(|(face, weight)| {
            let f = &complex.faces()[face];
            Some(VisibilityPair { face, a: f.negative?, b: f.positive?, weight })
        })
        .collect();

    let mut term_of_edge = vec![usize::MAX; complex.edges().len()];
    for e in complex.interior_edges() {
        let edge = &complex.edges()[e];
        if edge.ring.len() < 3 {
            continue;
        }
        term_of_edge[e] = model.edges.len();
        model.edges.push(EdgeTerm { edge: e, ring: edge.ring.clone(), weight: params.lambda_edge * edge.length });
    }
    for v in 0..complex.vertices().len() {
        if !complex.is_interior_vertex(v) {
            continue;
        }
        let inc: Vec<usize> = complex
            .vertex_edges(v)
            .iter()
            .copied()
            .filter(|&e| term_of_edge[e] != usize::MAX)
            .collect();
        let mut pairs = Vec::new();
        for (i, &a) in inc.iter().enumerate() {
            let da = complex.edge_direction(a).normalize();
            for &b in &inc[i + 1..] {
                let db = complex.edge_direction(b).normalize();
                if da.cross(&db).norm() > 1e-6 {
                    pairs.push((term_of_edge[a], term_of_edge[b]));
                }
            }
        }
        if !pairs.is_empty() {
            model.corners.push(CornerTerm { vertex: v, pairs, weight: params.lambda_corner });
        }
    }

    if params.hard_empty_viewpoints {
        let mut hard = BTreeSet::new();
        for vp in &cloud.viewpoints {
            match complex.locate(&vp.position) {
                Ok(c) => {
                    hard.insert(c);
                }
                Err(_) => report.unlocated_viewpoints += 1,
            }
        }
        model.hard_empty = hard;
    }
    Ok((model, report))
}
