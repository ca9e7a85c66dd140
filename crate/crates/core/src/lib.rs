//! Watertight piecewise-planar surface reconstruction from 3D line segments
//! observed from known viewpoints.

pub mod geom;
pub mod lineio;
pub mod ransac;
pub mod arrangement;
pub mod energy;
pub mod surface;
pub mod eval;
pub mod pipeline;
