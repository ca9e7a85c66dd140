//! Occupancy labeling energy over the cells of a complex: primitive,
//! visibility and regularization terms, their linear-program relaxation,
//! exact evaluation and a brute-force oracle.

mod assemble;
mod descent;
mod exhaustive;
mod lp;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assemble::{assemble, AssemblyReport};
pub use descent::descend;
pub use exhaustive::{exhaustive_min, MAX_EXHAUSTIVE_CELLS};
pub use lp::{
    round, solve_lp, solve_lp_with, to_lp, Comparison, Constraint, LinearProgram, LpSolution,
    LpSolver, MicroLp, VarKind, Variable,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Length scale normalizing primitive and visibility weights, meters.
    pub sigma: f64,
    pub lambda_vis: f64,
    pub lambda_edge: f64,
    pub lambda_corner: f64,
    /// Force cells containing a viewpoint to be empty.
    pub hard_empty_viewpoints: bool,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            sigma: 1.0,
            lambda_vis: 0.1,
            lambda_edge: 0.01,
            lambda_corner: 0.01,
            hard_empty_viewpoints: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("support plane {0} is not a plane of the complex")]
    MissingPlane(usize),
    #[error("cell {0} must be empty")]
    HardConstraintViolated(usize),
    #[error("labeling has {got} cells, model has {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("{0} free cells exceed the exhaustive limit")]
    TooLarge(usize),
    #[error("LP solver failed: {0}")]
    SolverFailure(String),
}

/// `w * max(0, 1 - sum of x over cells)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimitiveGroup {
    pub cells: Vec<usize>,
    pub weight: f64,
}

/// `w * |x_a - x_b|`, one per crossed face.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityPair {
    pub face: usize,
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Crease cost around one edge: `w` per isolated position in the ring.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeTerm {
    pub edge: usize,
    pub ring: Vec<usize>,
    pub weight: f64,
}

/// Vertex cost `w` when two non-collinear incident edges are both creased.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerTerm {
    pub vertex: usize,
    /// Pairs of indices into `EnergyModel::edges`.
    pub pairs: Vec<(usize, usize)>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EnergyModel {
    pub cell_count: usize,
    pub primitive: Vec<PrimitiveGroup>,
    pub visibility: Vec<VisibilityPair>,
    pub edges: Vec<EdgeTerm>,
    pub corners: Vec<CornerTerm>,
    pub hard_empty: BTreeSet<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub prim: f64,
    pub vis: f64,
    pub reg: f64,
    pub total: f64,
}

/// Isolated ring positions: a full cell between two empty ones or an empty
/// cell between two full ones.
pub fn ring_crease_count(ring: &[usize], x: &[bool]) -> usize {
    let m = ring.len();
    (0..m)
        .filter(|&i| {
            let prev = x[ring[(i + m - 1) % m]];
            let next = x[ring[(i + 1) % m]];
            let cur = x[ring[i]];
            cur != prev && cur != next
        })
        .count()
}

impl EnergyModel {
    pub fn check_labeling(&self, x: &[bool]) -> Result<(), EnergyError> {
        if x.len() != self.cell_count {
            return Err(EnergyError::WrongLength { got: x.len(), expected: self.cell_count });
        }
        match self.hard_empty.iter().find(|&&c| x[c]) {
            Some(&c) => Err(EnergyError::HardConstraintViolated(c)),
            None => Ok(()),
        }
    }

    /// Exact energy of a binary labeling (`true` = full).
    pub fn evaluate(&self, x: &[bool]) -> Result<EnergyBreakdown, EnergyError> {
        self.check_labeling(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &[bool]) -> EnergyBreakdown {
        let prim = self
            .primitive
            .iter()
            .filter(|g| !g.cells.iter().any(|&c| x[c]))
            .map(|g| g.weight)
            .sum::<f64>();
        let vis = self.visibility.iter().filter(|p| x[p.a] != x[p.b]).map(|p| p.weight).sum::<f64>();
        let creased: Vec<bool> = self.edges.iter().map(|e| ring_crease_count(&e.ring, x) > 0).collect();
        let mut reg = self
            .edges
            .iter()
            .map(|e| e.weight * ring_crease_count(&e.ring, x) as f64)
            .sum::<f64>();
        reg += self
            .corners
            .iter()
            .filter(|c| c.pairs.iter().any(|&(a, b)| creased[a] && creased[b]))
            .map(|c| c.weight)
            .sum::<f64>();
        EnergyBreakdown { prim, vis, reg, total: prim + vis + reg }
    }
}
