//! Two-dimensional periodic Navier-Stokes toolkit for studying transition
//! through collapse of the velocity H1 norm.
//!
//! - [`field`]: grids, nodal fields, flow parameters
//! - [`snapshot`]: time-stamped state and the `NSSNAP01` file format
//! - [`solver`]: pseudo-spectral vorticity solver with RK4 stepping
//! - [`diagnostics`], [`regime`]: energy functionals, criticality, regime labels
//! - [`scaling`]: timescales, transition detection, Reynolds sweeps, power-law fits

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod field;
pub mod regime;
pub mod scaling;
pub mod snapshot;
pub mod solver;
pub mod spectral;
pub mod timeline;

pub use field::{divergence, taylor_green, FlowParams, Grid, ScalarField, VelocityField};
pub use snapshot::Snapshot;
pub use timeline::Timeline;
