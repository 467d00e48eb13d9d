use crate::field::{taylor_green, FieldError, FlowParams, Grid, ScalarField};
use crate::snapshot::Snapshot;
use crate::timeline::{Timeline, TimelineError};

/// Exact Taylor-Green pressure `p/rho = A^2/4 (cos 2ax + (a/b)^2 cos 2by)`.
pub fn analytic_taylor_green_pressure(grid: &Grid, amplitude: f64) -> Result<ScalarField, FieldError> {
    let (a, b) = grid.fundamental_wavenumbers();
    let c = 0.25 * amplitude * amplitude;
    ScalarField::from_fn(*grid, |x, y| {
        c * ((2.0 * a * x).cos() + (a * a / (b * b)) * (2.0 * b * y).cos())
    })
}

/// Exact decaying Taylor-Green state at time `t`.
///
/// Velocity decays as `exp(-nu (a^2 + b^2) t)` and pressure as its square.
pub fn analytic_taylor_green(
    grid: &Grid,
    amplitude: f64,
    nu: f64,
    t: f64,
) -> Result<Snapshot, FieldError> {
    if !(t >= 0.0) {
        return Err(FieldError::InvalidParam { field: "t", reason: format!("must be >= 0, got {t}") });
    }
    let (a, b) = grid.fundamental_wavenumbers();
    let decay = (-nu * (a * a + b * b) * t).exp();
    let amp = amplitude * decay;
    Snapshot::new(t, taylor_green(grid, amp)?, analytic_taylor_green_pressure(grid, amp)?)
}

/// Exact solution sampled at the given increasing times.
pub fn analytic_taylor_green_timeline(
    grid: &Grid,
    amplitude: f64,
    params: &FlowParams,
    times: &[f64],
) -> Result<Timeline, TimelineError> {
    let snaps = times
        .iter()
        .map(|&t| analytic_taylor_green(grid, amplitude, params.nu, t))
        .collect::<Result<Vec<_>, _>>()?;
    Timeline::new(snaps, *params)
}
