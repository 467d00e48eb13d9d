//! Grids, discrete fields and physical parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::Spectral2d;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("shape mismatch: expected {expected} values, got {actual}")]
    Shape { expected: usize, actual: usize },
    #[error("grid mismatch between fields")]
    GridMismatch,
    #[error("non-finite value in `{0}`")]
    NonFinite(&'static str),
}

fn default_length() -> f64 {
    2.0 * PI
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    nx: usize,
    ny: usize,
    #[serde(default = "default_length")]
    lx: f64,
    #[serde(default = "default_length")]
    ly: f64,
}

/// Uniform doubly periodic lattice on `[0, lx) x [0, ly)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec")]
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = FieldError;

    fn try_from(s: GridSpec) -> Result<Self, Self::Error> {
        Grid::new(s.nx, s.ny, s.lx, s.ly)
    }
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self, FieldError> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 8 || n % 2 != 0 {
                return Err(FieldError::InvalidGrid(format!(
                    "{name} = {n} must be even and at least 8"
                )));
            }
        }
        for (name, l) in [("lx", lx), ("ly", ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(FieldError::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// `n x n` grid on `[0, 2pi)^2`.
    pub fn square(n: usize) -> Result<Self, FieldError> {
        Self::new(n, n, 2.0 * PI, 2.0 * PI)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// Quadrature weight of a single node.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Node coordinates `(x, y)` in row-major order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (dx, dy) = (self.dx(), self.dy());
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i as f64 * dx, j as f64 * dy)))
    }

    /// Lowest nonzero wavenumbers `(2pi/lx, 2pi/ly)`.
    pub fn fundamental_wavenumbers(&self) -> (f64, f64) {
        (2.0 * PI / self.lx, 2.0 * PI / self.ly)
    }
}

fn check_values(grid: &Grid, data: &[f64], name: &'static str) -> Result<(), FieldError> {
    if data.len() != grid.len() {
        return Err(FieldError::Shape { expected: grid.len(), actual: data.len() });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(FieldError::NonFinite(name));
    }
    Ok(())
}

/// Nodal velocity `(u, v)` stored row-major (`ny` rows of `nx`).
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: Grid,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl VelocityField {
    pub fn new(grid: Grid, u: Vec<f64>, v: Vec<f64>) -> Result<Self, FieldError> {
        check_values(&grid, &u, "u")?;
        check_values(&grid, &v, "v")?;
        Ok(Self { grid, u, v })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, u: vec![0.0; grid.len()], v: vec![0.0; grid.len()] }
    }

    pub fn uniform(grid: Grid, u0: f64, v0: f64) -> Result<Self, FieldError> {
        Self::new(grid, vec![u0; grid.len()], vec![v0; grid.len()])
    }

    /// Sample an analytic velocity at the nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> (f64, f64)) -> Result<Self, FieldError> {
        let (u, v): (Vec<f64>, Vec<f64>) = grid.nodes().map(|(x, y)| f(x, y)).unzip();
        Self::new(grid, u, v)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn scaled(&self, c: f64) -> Result<Self, FieldError> {
        Self::new(
            self.grid,
            self.u.iter().map(|x| c * x).collect(),
            self.v.iter().map(|x| c * x).collect(),
        )
    }

    pub fn max_speed(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max)
    }
}

/// Nodal scalar (pressure/rho, mechanical energy, vorticity, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self, FieldError> {
        check_values(&grid, &data, "scalar")?;
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Result<Self, FieldError> {
        let data = grid.nodes().map(|(x, y)| f(x, y)).collect();
        Self::new(grid, data)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, c: f64) -> Result<Self, FieldError> {
        Self::new(self.grid, self.data.iter().map(|x| c * x).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

fn default_rho() -> f64 {
    1.0
}

fn default_one() -> f64 {
    1.0
}

/// Physical constants and characteristic scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowParams {
    /// Kinematic viscosity.
    pub nu: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub g: f64,
    /// Characteristic velocity U.
    #[serde(default = "default_one")]
    pub u_char: f64,
    /// Characteristic length L.
    #[serde(default = "default_one")]
    pub l_char: f64,
}

impl FlowParams {
    /// Unit density, no gravity, `U = L = 1`.
    pub fn with_viscosity(nu: f64) -> Self {
        Self { nu, rho: 1.0, g: 0.0, u_char: 1.0, l_char: 1.0 }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        let positive = [
            ("nu", self.nu),
            ("rho", self.rho),
            ("u_char", self.u_char),
            ("l_char", self.l_char),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(FieldError::InvalidParam {
                    field,
                    reason: format!("must be positive, got {value}"),
                });
            }
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(FieldError::InvalidParam {
                field: "g",
                reason: format!("must be non-negative, got {}", self.g),
            });
        }
        Ok(())
    }
}

/// Taylor-Green vortex sampled at the nodes.
///
/// On a general box the fundamental wavenumbers `(a, b)` replace `(1, 1)`:
/// `u = A sin(ax) cos(by)`, `v = -A (a/b) cos(ax) sin(by)`, which is
/// divergence-free and reduces to the classic form on `[0, 2pi]^2`.
pub fn taylor_green(grid: &Grid, amplitude: f64) -> Result<VelocityField, FieldError> {
    if !amplitude.is_finite() {
        return Err(FieldError::InvalidParam {
            field: "amplitude",
            reason: "must be finite".into(),
        });
    }
    let (a, b) = grid.fundamental_wavenumbers();
    VelocityField::from_fn(*grid, |x, y| {
        (
            amplitude * (a * x).sin() * (b * y).cos(),
            -amplitude * (a / b) * (a * x).cos() * (b * y).sin(),
        )
    })
}

/// Spectral divergence `du/dx + dv/dy` at the nodes.
pub fn divergence(f: &VelocityField) -> ScalarField {
    let mut sp = Spectral2d::new(f.grid());
    let dudx = sp.derivative_x(f.u());
    let dvdy = sp.derivative_y(f.v());
    let data = dudx.iter().zip(&dvdy).map(|(a, b)| a + b).collect();
    ScalarField { grid: *f.grid(), data }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(Grid::new(7, 8, 1.0, 1.0).is_err());
        assert!(Grid::new(8, 9, 1.0, 1.0).is_err());
        assert!(Grid::new(6, 8, 1.0, 1.0).is_err());
        assert!(Grid::new(8, 8, 0.0, 1.0).is_err());
        assert!(Grid::new(8, 8, 1.0, f64::NAN).is_err());
        assert!(Grid::new(8, 8, 1.0, 1.0).is_ok());
    }

    #[test]
    fn grid_json_defaults_to_two_pi() {
        let g: Grid = serde_json::from_str(r#"{"nx": 16, "ny": 8}"#).unwrap();
        assert_eq!(g.lx(), 2.0 * PI);
        assert!(serde_json::from_str::<Grid>(r#"{"nx": 15, "ny": 8}"#).is_err());
        assert!(serde_json::from_str::<Grid>(r#"{"nx": 16, "ny": 8, "nz": 2}"#).is_err());
    }

    #[test]
    fn fields_reject_bad_input() {
        let g = Grid::square(8).unwrap();
        assert!(matches!(
            VelocityField::new(g, vec![0.0; 63], vec![0.0; 64]),
            Err(FieldError::Shape { .. })
        ));
        let mut u = vec![0.0; 64];
        u[5] = f64::INFINITY;
        assert_eq!(VelocityField::new(g, u, vec![0.0; 64]), Err(FieldError::NonFinite("u")));
    }

    #[test]
    fn params_validation_names_field() {
        let mut p = FlowParams::with_viscosity(-1.0);
        match p.validate() {
            Err(FieldError::InvalidParam { field, .. }) => assert_eq!(field, "nu"),
            other => panic!("unexpected {other:?}"),
        }
        p.nu = 0.1;
        p.g = -9.81;
        assert!(p.validate().is_err());
    }

    #[test]
    fn taylor_green_divergence_free() {
        let g = Grid::square(64).unwrap();
        let tg = taylor_green(&g, 1.0).unwrap();
        assert!(divergence(&tg).max_abs() < 1e-12);
        let g2 = Grid::new(32, 16, 3.0, 1.5).unwrap();
        assert!(divergence(&taylor_green(&g2, 2.5).unwrap()).max_abs() < 1e-12);
    }

    #[test]
    fn taylor_green_zero_amplitude() {
        let g = Grid::square(16).unwrap();
        assert_eq!(taylor_green(&g, 0.0).unwrap(), VelocityField::zeros(g));
        assert!(taylor_green(&g, f64::NAN).is_err());
    }

    #[test]
    fn divergence_of_sine_is_cosine() {
        let g = Grid::square(32).unwrap();
        let f = VelocityField::from_fn(g, |x, _| (x.sin(), 0.0)).unwrap();
        let d = divergence(&f);
        for ((x, _), val) in g.nodes().zip(d.data()) {
            assert!((val - x.cos()).abs() < 1e-12);
        }
        assert_eq!(divergence(&VelocityField::zeros(g)).max_abs(), 0.0);
    }
}
