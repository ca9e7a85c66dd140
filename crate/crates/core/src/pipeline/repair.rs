use serde::Serialize;

use crate::arrangement::CellComplex;
use crate::energy::{EnergyError, EnergyModel};
use crate::surface::{extract_surface_with, non_manifold_complex_edges, ExtractOptions, PolygonMesh, SurfaceError};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RepairReport {
    /// Cells whose label was changed.
    pub flipped: Vec<usize>,
    /// Non-manifold mesh edges left when the round limit was hit.
    pub remaining: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum RepairError {
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Flips cells around edges where the extracted surface pinches until every
/// mesh edge has at most two faces. Each round fixes one edge with the ring
/// cell whose flip costs the least energy; hard-empty cells stay empty.
pub fn repair_labeling(
    complex: &CellComplex,
    model: &EnergyModel,
    labeling: &mut [bool],
    options: ExtractOptions,
    max_rounds: usize,
) -> Result<(PolygonMesh, RepairReport), RepairError> {
    let mut report = RepairReport::default();
    for _ in 0..max_rounds {
        let mesh = extract_surface_with(complex, labeling, options)?;
        let bad = non_manifold_complex_edges(complex, &mesh);
        let Some(&e) = bad.first() else {
            return Ok((mesh, report));
        };
        let mut best: Option<(f64, usize)> = None;
        for &c in &complex.edges()[e].ring {
            if !labeling[c] && model.hard_empty.contains(&c) {
                continue;
            }
            labeling[c] = !labeling[c];
            let total = model.evaluate(labeling)?.total;
            labeling[c] = !labeling[c];
            if best.map_or(true, |(t, _)| total < t) {
                best = Some((total, c));
            }
        }
        match best {
            Some((_, c)) => {
                labeling[c] = !labeling[c];
                report.flipped.push(c);
            }
            None => break,
        }
    }
    let mesh = extract_surface_with(complex, labeling, options)?;
    report.remaining = crate::surface::validate(&mesh)?.non_manifold_edges;
    Ok((mesh, report))
}
