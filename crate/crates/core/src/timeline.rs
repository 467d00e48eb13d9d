//! Ordered sequences of snapshots.

use thiserror::Error;

use crate::diagnostics::{h1_norm_sq, kinetic_energy};
use crate::field::{FieldError, FlowParams, Grid};
use crate::snapshot::Snapshot;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimelineError {
    #[error("timeline has no snapshots")]
    Empty,
    #[error("snapshot {index} at t = {time} does not follow t = {previous}")]
    NotIncreasing { index: usize, time: f64, previous: f64 },
    #[error("snapshot {0} is on a different grid")]
    MixedGrids(usize),
    #[error("{0} is not finite; the flow has left L-infinity(L2) / L2(H1)")]
    Unbounded(&'static str),
    #[error(transparent)]
    Params(#[from] FieldError),
}

/// Time-ordered snapshots on one grid together with the flow parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    snapshots: Vec<Snapshot>,
    params: FlowParams,
}

/// Bounds certifying the energy-class membership of a computed solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LerayBounds {
    /// `sup_t ||u(t)||_{L2}`.
    pub sup_l2: f64,
    /// Trapezoid-rule `int_0^T ||grad u||^2 dt`.
    pub h1_time_integral: f64,
}

impl Timeline {
    pub fn new(snapshots: Vec<Snapshot>, params: FlowParams) -> Result<Self, TimelineError> {
        params.validate()?;
        let first = snapshots.first().ok_or(TimelineError::Empty)?;
        let grid = *first.grid();
        for (k, pair) in snapshots.windows(2).enumerate() {
            if pair[1].grid() != &grid {
                return Err(TimelineError::MixedGrids(k + 1));
            }
            if !(pair[1].time() > pair[0].time()) {
                return Err(TimelineError::NotIncreasing {
                    index: k + 1,
                    time: pair[1].time(),
                    previous: pair[0].time(),
                });
            }
        }
        Ok(Self { snapshots, params })
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        self.snapshots[0].grid()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(Snapshot::time).collect()
    }

    pub fn into_snapshots(self) -> Vec<Snapshot> {
        self.snapshots
    }

    /// Check that the L2 norm stays bounded and the H1 norm is square-integrable in time.
    pub fn leray_bounds(&self) -> Result<LerayBounds, TimelineError> {
        let mut sup_l2: f64 = 0.0;
        let mut integral = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for s in &self.snapshots {
            let l2 = (2.0 * kinetic_energy(s.velocity())).sqrt();
            let h1 = h1_norm_sq(s.velocity());
            if !l2.is_finite() {
                return Err(TimelineError::Unbounded("L2 norm"));
            }
            sup_l2 = sup_l2.max(l2);
            if let Some((t0, h0)) = prev {
                integral += 0.5 * (s.time() - t0) * (h0 + h1);
            }
            prev = Some((s.time(), h1));
        }
        if !integral.is_finite() {
            return Err(TimelineError::Unbounded("time integral of H1 norm"));
        }
        Ok(LerayBounds { sup_l2, h1_time_integral: integral })
    }
}
