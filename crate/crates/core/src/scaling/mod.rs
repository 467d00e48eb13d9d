//! Characteristic timescales, transition-time detection, Reynolds sweeps
//! and log-log power-law regression.

mod fit;
mod sweep;

use serde::Serialize;
use thiserror::Error;

pub use fit::{log_spaced, powerlaw_fit, read_fit_points, synth_sk_dataset, FitResult};
pub use sweep::{reynolds_sweep, write_sweep_csv, SweepConfig, SweepMode, SweepRow, Vary, SWEEP_HEADER};

use crate::diagnostics::{check_theta, h1_norm_sq, indicator_value, DiagnosticsError};
use crate::field::FlowParams;
use crate::timeline::Timeline;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("`{name}` must be positive and finite, got {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("all abscissae coincide in log space; slope undefined")]
    DegenerateDesign,
    #[error("sweep config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

fn positive(name: &'static str, value: f64) -> Result<f64, ScalingError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ScalingError::Domain { name, value })
    }
}

/// Convective time, viscous time and Reynolds number of a flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timescales {
    /// `L / U`
    pub t_c: f64,
    /// `L^2 / nu`
    pub t_nu: f64,
    /// `U L / nu`
    pub re: f64,
}

pub fn timescales(params: &FlowParams) -> Result<Timescales, ScalingError> {
    let u = positive("u_char", params.u_char)?;
    let l = positive("l_char", params.l_char)?;
    let nu = positive("nu", params.nu)?;
    Ok(Timescales { t_c: l / u, t_nu: l * l / nu, re: u * l / nu })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMethod {
    ThresholdCrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionResult {
    pub t_trans: Option<f64>,
    /// `t_trans / t_c`.
    pub tau_trans: Option<f64>,
    pub re: f64,
    pub hit: bool,
    pub method: DetectionMethod,
}

/// Crossing time of `theta` by a sampled indicator, linear in the indicator
/// between the bracketing samples.
pub fn crossing_time(times: &[f64], indicator: &[f64], theta: f64) -> Option<f64> {
    let k = indicator.iter().position(|&i| i <= theta)?;
    if k == 0 {
        return Some(times[0]);
    }
    let (i0, i1) = (indicator[k - 1], indicator[k]);
    let (t0, t1) = (times[k - 1], times[k]);
    Some(t0 + (i0 - theta) / (i0 - i1) * (t1 - t0))
}

/// First time the relative H1 indicator falls to `theta`.
pub fn detect_transition_time(timeline: &Timeline, theta: f64) -> Result<TransitionResult, ScalingError> {
    check_theta(theta)?;
    let ts = timescales(timeline.params())?;
    let h1: Vec<f64> = timeline.snapshots().iter().map(|s| h1_norm_sq(s.velocity())).collect();
    let indicator = h1
        .iter()
        .map(|&h| indicator_value(h, h1[0]))
        .collect::<Result<Vec<_>, _>>()?;
    let t_trans = crossing_time(&timeline.times(), &indicator, theta);
    Ok(TransitionResult {
        t_trans,
        tau_trans: t_trans.map(|t| t / ts.t_c),
        re: ts.re,
        hit: t_trans.is_some(),
        method: DetectionMethod::ThresholdCrossing,
    })
}
