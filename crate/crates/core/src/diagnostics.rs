//! Energy functionals of a velocity field and per-snapshot diagnostics.
//!
//! Norm conventions on the periodic box (uniform node weights `dx*dy`,
//! exact for band-limited periodic data):
//!
//! - `kinetic_energy(u) = 1/2 int |u|^2`
//! - `h1_norm_sq(u) = int grad u_i . grad u_i`
//!
//! The energy identity checked by [`energy_identity_residual`] is
//! `d/dt KE + nu * h1_norm_sq = 0`.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldError, FlowParams, ScalarField, VelocityField};
use crate::regime::{classify_records, RegimeConfig, RegimeInput, RegimeLabel};
use crate::spectral::Spectral2d;
use crate::timeline::Timeline;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("snapshot index {index} has no centred neighbours in a timeline of {len}")]
    Index { index: usize, len: usize },
    #[error("need at least {needed} snapshots, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("initial H1 norm is zero; relative indicator undefined")]
    UndefinedReference,
    #[error("threshold `{name}` = {value} outside {range}")]
    Threshold { name: &'static str, value: f64, range: &'static str },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `1/2 int |u|^2 dx`.
pub fn kinetic_energy(f: &VelocityField) -> f64 {
    let sum: f64 = f.u().iter().zip(f.v()).map(|(a, b)| a * a + b * b).sum();
    0.5 * sum * f.grid().cell_area()
}

/// `int |grad u|^2 dx` with spectral gradients.
pub fn h1_norm_sq(f: &VelocityField) -> f64 {
    let mut sp = Spectral2d::new(f.grid());
    let mut sum = 0.0;
    for comp in [f.u(), f.v()] {
        let hat = sp.forward(comp);
        let dx = sp.inverse(&sp.ddx(&hat));
        let dy = sp.inverse(&sp.ddy(&hat));
        sum += dx.iter().chain(&dy).map(|g| g * g).sum::<f64>();
    }
    sum * f.grid().cell_area()
}

fn same_grid(f: &VelocityField, s: &ScalarField) -> Result<(), FieldError> {
    if f.grid() != s.grid() {
        return Err(FieldError::GridMismatch);
    }
    Ok(())
}

/// Nodewise `E = p/rho + |u|^2/2 + g y`, with `y` the vertical coordinate.
pub fn mechanical_energy_field(
    f: &VelocityField,
    p_over_rho: &ScalarField,
    params: &FlowParams,
) -> Result<ScalarField, FieldError> {
    same_grid(f, p_over_rho)?;
    let grid = *f.grid();
    let dy = grid.dy();
    let data = (0..grid.len())
        .map(|k| {
            let y = (k / grid.nx()) as f64 * dy;
            p_over_rho.data()[k] + 0.5 * (f.u()[k].powi(2) + f.v()[k].powi(2)) + params.g * y
        })
        .collect();
    ScalarField::new(grid, data)
}

/// Gradient of `E` with the periodic part differentiated spectrally and the
/// (non-periodic) gravity ramp differentiated exactly.
pub fn mechanical_energy_gradient(
    f: &VelocityField,
    p_over_rho: &ScalarField,
    params: &FlowParams,
) -> Result<(ScalarField, ScalarField), FieldError> {
    same_grid(f, p_over_rho)?;
    let grid = *f.grid();
    let periodic: Vec<f64> = (0..grid.len())
        .map(|k| p_over_rho.data()[k] + 0.5 * (f.u()[k].powi(2) + f.v()[k].powi(2)))
        .collect();
    let mut sp = Spectral2d::new(&grid);
    let dedx = sp.derivative_x(&periodic);
    let dedy = sp.derivative_y(&periodic).into_iter().map(|d| d + params.g).collect();
    Ok((ScalarField::new(grid, dedx)?, ScalarField::new(grid, dedy)?))
}

/// `u . grad E` from a supplied gradient.
pub fn streamwise_derivative_from_gradient(
    f: &VelocityField,
    dedx: &ScalarField,
    dedy: &ScalarField,
) -> Result<ScalarField, FieldError> {
    same_grid(f, dedx)?;
    same_grid(f, dedy)?;
    let data = (0..f.grid().len())
        .map(|k| f.u()[k] * dedx.data()[k] + f.v()[k] * dedy.data()[k])
        .collect();
    ScalarField::new(*f.grid(), data)
}

/// `u . grad E` with spectral gradients of a periodic `E`.
pub fn streamwise_energy_derivative(
    f: &VelocityField,
    e: &ScalarField,
) -> Result<ScalarField, FieldError> {
    same_grid(f, e)?;
    let mut sp = Spectral2d::new(f.grid());
    let grid = *f.grid();
    let dedx = ScalarField::new(grid, sp.derivative_x(e.data()))?;
    let dedy = ScalarField::new(grid, sp.derivative_y(e.data()))?;
    streamwise_derivative_from_gradient(f, &dedx, &dedy)
}

/// Nodes where the energy gradient is (numerically) normal to the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSet {
    pub mask: Vec<bool>,
    pub critical_fraction: f64,
}

/// Absolute scale below which `|u . grad E|` counts as identically zero.
pub fn criticality_floor(params: &FlowParams) -> f64 {
    1e-14 * params.u_char.powi(3) / params.l_char
}

/// Threshold a streamwise-derivative field relative to its own maximum.
pub fn critical_set_from_derivative(
    d: &ScalarField,
    tol_rel: f64,
    params: &FlowParams,
) -> Result<CriticalSet, DiagnosticsError> {
    if !(tol_rel.is_finite() && tol_rel > 0.0) {
        return Err(DiagnosticsError::Threshold { name: "tol_rel", value: tol_rel, range: "(0, inf)" });
    }
    let peak = d.max_abs();
    let n = d.data().len();
    if peak < criticality_floor(params) {
        return Ok(CriticalSet { mask: vec![true; n], critical_fraction: 1.0 });
    }
    let scale = peak.max(f64::EPSILON);
    let mask: Vec<bool> = d.data().iter().map(|x| x.abs() <= tol_rel * scale).collect();
    let marked = mask.iter().filter(|&&m| m).count();
    Ok(CriticalSet { mask, critical_fraction: marked as f64 / n as f64 })
}

pub fn critical_set(
    f: &VelocityField,
    e: &ScalarField,
    tol_rel: f64,
    params: &FlowParams,
) -> Result<CriticalSet, DiagnosticsError> {
    let d = streamwise_energy_derivative(f, e)?;
    critical_set_from_derivative(&d, tol_rel, params)
}

/// Raw and normalised residual of the energy identity at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub raw: f64,
    pub normalized: f64,
}

const RESIDUAL_FLOOR: f64 = 1e-300;

fn residual_from(ke_prev: f64, ke_next: f64, dt: f64, nu: f64, h1: f64) -> IdentityResidual {
    let dissipation = nu * h1;
    let raw = (ke_next - ke_prev) / dt + dissipation;
    IdentityResidual { raw, normalized: raw / dissipation.max(RESIDUAL_FLOOR) }
}

/// Centred-difference residual of `d/dt KE + nu ||grad u||^2` at interior index `k`.
pub fn energy_identity_residual(
    timeline: &Timeline,
    k: usize,
) -> Result<IdentityResidual, DiagnosticsError> {
    let len = timeline.len();
    if len < 3 {
        return Err(DiagnosticsError::InsufficientData { needed: 3, got: len });
    }
    if k == 0 || k + 1 >= len {
        return Err(DiagnosticsError::Index { index: k, len });
    }
    let s = timeline.snapshots();
    Ok(residual_from(
        kinetic_energy(s[k - 1].velocity()),
        kinetic_energy(s[k + 1].velocity()),
        s[k + 1].time() - s[k - 1].time(),
        timeline.params().nu,
        h1_norm_sq(s[k].velocity()),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityIndicator {
    pub global_hit: bool,
    pub indicator: f64,
}

pub(crate) fn check_theta(theta: f64) -> Result<(), DiagnosticsError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(DiagnosticsError::Threshold { name: "theta", value: theta, range: "(0, 1]" });
    }
    Ok(())
}

/// `sqrt(h1(k) / h1(0))` clamped to `[0, 1]`.
pub(crate) fn indicator_value(h1_k: f64, h1_0: f64) -> Result<f64, DiagnosticsError> {
    if !(h1_0 > 0.0) {
        return Err(DiagnosticsError::UndefinedReference);
    }
    Ok((h1_k / h1_0).sqrt().clamp(0.0, 1.0))
}

/// Relative H1 collapse at snapshot `k`; a hit means the norm has fallen to
/// `theta` times its initial value or below.
pub fn singularity_indicator(
    timeline: &Timeline,
    k: usize,
    theta: f64,
) -> Result<SingularityIndicator, DiagnosticsError> {
    check_theta(theta)?;
    let s = timeline.snapshots();
    if k >= s.len() {
        return Err(DiagnosticsError::Index { index: k, len: s.len() });
    }
    let indicator = indicator_value(h1_norm_sq(s[k].velocity()), h1_norm_sq(s[0].velocity()))?;
    Ok(SingularityIndicator { global_hit: indicator <= theta, indicator })
}

/// One row of the diagnostics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRecord {
    pub time: f64,
    pub kinetic_energy: f64,
    pub h1_norm_sq: f64,
    pub identity_residual: Option<f64>,
    pub identity_residual_normalized: Option<f64>,
    pub critical_fraction: f64,
    /// `None` when the initial field has zero H1 norm.
    pub singularity_indicator: Option<f64>,
    pub regime_label: RegimeLabel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnoseOptions {
    pub critical_tol: f64,
    pub regime: RegimeConfig,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self { critical_tol: 1e-6, regime: RegimeConfig::default() }
    }
}

/// Evaluate every diagnostic on every snapshot and label the regimes.
pub fn diagnose(
    timeline: &Timeline,
    opts: &DiagnoseOptions,
) -> Result<Vec<DiagnosticRecord>, DiagnosticsError> {
    opts.regime.validate()?;
    let params = *timeline.params();
    let snaps = timeline.snapshots();
    let ke: Vec<f64> = snaps.iter().map(|s| kinetic_energy(s.velocity())).collect();
    let h1: Vec<f64> = snaps.iter().map(|s| h1_norm_sq(s.velocity())).collect();

    let mut records = Vec::with_capacity(snaps.len());
    for (k, s) in snaps.iter().enumerate() {
        let residual = (k > 0 && k + 1 < snaps.len()).then(|| {
            residual_from(ke[k - 1], ke[k + 1], snaps[k + 1].time() - snaps[k - 1].time(), params.nu, h1[k])
        });
        let (dedx, dedy) = mechanical_energy_gradient(s.velocity(), s.pressure(), &params)?;
        let d = streamwise_derivative_from_gradient(s.velocity(), &dedx, &dedy)?;
        let crit = critical_set_from_derivative(&d, opts.critical_tol, &params)?;
        records.push(DiagnosticRecord {
            time: s.time(),
            kinetic_energy: ke[k],
            h1_norm_sq: h1[k],
            identity_residual: residual.map(|r| r.raw),
            identity_residual_normalized: residual.map(|r| r.normalized),
            critical_fraction: crit.critical_fraction,
            singularity_indicator: indicator_value(h1[k], h1[0]).ok(),
            regime_label: RegimeLabel::Laminar,
        });
    }

    let inputs: Vec<RegimeInput> = records
        .iter()
        .map(|r| RegimeInput {
            indicator: r.singularity_indicator,
            critical_fraction: r.critical_fraction,
            h1_norm_sq: r.h1_norm_sq,
        })
        .collect();
    for (r, label) in records.iter_mut().zip(classify_records(&inputs, &opts.regime)?) {
        r.regime_label = label;
    }
    Ok(records)
}

pub const DIAGNOSTICS_HEADER: [&str; 8] = [
    "time",
    "kinetic_energy",
    "h1_norm_sq",
    "identity_residual_raw",
    "identity_residual_normalized",
    "critical_fraction",
    "singularity_indicator",
    "regime_label",
];

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// Write the diagnostics table as CSV; missing values are empty cells.
pub fn write_diagnostics_csv(
    out: impl Write,
    records: &[DiagnosticRecord],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DIAGNOSTICS_HEADER)?;
    for r in records {
        w.write_record([
            format!("{:e}", r.time),
            format!("{:e}", r.kinetic_energy),
            format!("{:e}", r.h1_norm_sq),
            cell(r.identity_residual),
            cell(r.identity_residual_normalized),
            format!("{:e}", r.critical_fraction),
            cell(r.singularity_indicator),
            r.regime_label.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
