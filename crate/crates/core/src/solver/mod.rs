//! Pseudo-spectral 2D incompressible Navier-Stokes in vorticity form.
//!
//! The prognostic variable is the vorticity `w = dv/dx - du/dy`, advanced by
//!
//! ```text
//! dw/dt + u . grad w = nu lap w,     lap psi = -w,     u = (dpsi/dy, -dpsi/dx) + U_mean
//! ```
//!
//! with classical RK4. The spatially uniform part of the velocity is carried
//! separately since the streamfunction cannot represent it; without forcing
//! it is constant in time.

mod analytic;
mod config;
mod pressure;

use std::ops::ControlFlow;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use analytic::{analytic_taylor_green, analytic_taylor_green_pressure, analytic_taylor_green_timeline};
pub use config::{InitialCondition, SolverConfig, TimeStep};
pub use pressure::pressure_from_velocity;

use crate::field::{taylor_green, FieldError, FlowParams, Grid, VelocityField};
use crate::snapshot::{Snapshot, SnapshotError};
use crate::spectral::Spectral2d;
use crate::timeline::{Timeline, TimelineError};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("non-finite state at t = {time}")]
    BlowUp {
        time: f64,
        /// Snapshots recorded before the failure.
        partial: Vec<Snapshot>,
    },
    #[error("initial condition: {0}")]
    Initial(#[from] SnapshotError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Timeline(#[from] TimelineError),
}

/// Spectral vorticity plus the mean velocity, at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub time: f64,
    pub vorticity: Vec<Complex64>,
    pub mean_velocity: (f64, f64),
}

/// RK4 integrator bound to one grid and parameter set.
pub struct VorticitySolver {
    grid: Grid,
    nu: f64,
    dealias: bool,
    sp: Spectral2d,
}

fn axpy(a: f64, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(y).map(|(xi, yi)| yi + xi * a).collect()
}

impl VorticitySolver {
    pub fn new(grid: Grid, params: &FlowParams, dealias: bool) -> Self {
        Self { grid, nu: params.nu, dealias, sp: Spectral2d::new(&grid) }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn state_from_velocity(&mut self, f: &VelocityField, time: f64) -> SpectralState {
        let n = self.grid.len() as f64;
        let mean = (f.u().iter().sum::<f64>() / n, f.v().iter().sum::<f64>() / n);
        let u_hat = self.sp.forward(f.u());
        let v_hat = self.sp.forward(f.v());
        let dvdx = self.sp.ddx(&v_hat);
        let dudy = self.sp.ddy(&u_hat);
        let mut w: Vec<Complex64> = dvdx.iter().zip(&dudy).map(|(a, b)| a - b).collect();
        if self.dealias {
            self.sp.dealias(&mut w);
        }
        SpectralState { time, vorticity: w, mean_velocity: mean }
    }

    fn streamfunction(&self, w: &[Complex64]) -> Vec<Complex64> {
        let nx = self.grid.nx();
        w.iter()
            .enumerate()
            .map(|(idx, c)| {
                let k2 = self.sp.k2(idx % nx, idx / nx);
                if k2 > 0.0 {
                    c / k2
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    fn velocity_arrays(&mut self, w: &[Complex64], mean: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
        let psi = self.streamfunction(w);
        let u_hat = self.sp.ddy(&psi);
        let v_hat: Vec<Complex64> = self.sp.ddx(&psi).into_iter().map(|c| -c).collect();
        let mut u = self.sp.inverse(&u_hat);
        let mut v = self.sp.inverse(&v_hat);
        u.iter_mut().for_each(|x| *x += mean.0);
        v.iter_mut().for_each(|x| *x += mean.1);
        (u, v)
    }

    pub fn velocity(&mut self, state: &SpectralState) -> Result<VelocityField, FieldError> {
        let (u, v) = self.velocity_arrays(&state.vorticity, state.mean_velocity);
        VelocityField::new(self.grid, u, v)
    }

    fn rhs(&mut self, w: &[Complex64], mean: (f64, f64)) -> Vec<Complex64> {
        let (u, v) = self.velocity_arrays(w, mean);
        let wx = self.sp.inverse(&self.sp.ddx(w));
        let wy = self.sp.inverse(&self.sp.ddy(w));
        let advection: Vec<f64> = (0..u.len()).map(|k| -(u[k] * wx[k] + v[k] * wy[k])).collect();
        let mut n_hat = self.sp.forward(&advection);
        if self.dealias {
            self.sp.dealias(&mut n_hat);
        }
        let nx = self.grid.nx();
        n_hat
            .iter()
            .zip(w)
            .enumerate()
            .map(|(idx, (n, wk))| n - wk * (self.nu * self.sp.k2(idx % nx, idx / nx)))
            .collect()
    }

    /// One classical RK4 step of size `dt`.
    pub fn step(&mut self, state: &SpectralState, dt: f64) -> Result<SpectralState, SolverError> {
        if dt == 0.0 {
            return Ok(state.clone());
        }
        let mean = state.mean_velocity;
        let w0 = &state.vorticity;
        let k1 = self.rhs(w0, mean);
        let k2 = self.rhs(&axpy(0.5 * dt, &k1, w0), mean);
        let k3 = self.rhs(&axpy(0.5 * dt, &k2, w0), mean);
        let k4 = self.rhs(&axpy(dt, &k3, w0), mean);
        let w: Vec<Complex64> = (0..w0.len())
            .map(|i| w0[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0))
            .collect();
        let time = state.time + dt;
        if w.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(SolverError::BlowUp { time, partial: Vec::new() });
        }
        Ok(SpectralState { time, vorticity: w, mean_velocity: mean })
    }

    /// Advective CFL step capped by the explicit viscous limit.
    pub fn stable_dt(&self, max_speed: f64, cfl: f64) -> f64 {
        let h = self.grid.dx().min(self.grid.dy());
        let viscous = h * h / (4.0 * self.nu);
        if max_speed > 0.0 {
            (cfl * h / max_speed).min(viscous)
        } else {
            viscous
        }
    }
}

/// Band-limited random streamfunction flow, `max|u| = amplitude`.
pub fn random_shear(grid: &Grid, seed: u64, amplitude: f64) -> Result<VelocityField, FieldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (bx, by) = grid.fundamental_wavenumbers();
    let mut modes = Vec::new();
    for mx in 0i32..=4 {
        for my in -4i32..=4 {
            if mx * mx + my * my > 16 || (mx == 0 && my <= 0) {
                continue;
            }
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            modes.push((mx as f64 * bx, my as f64 * by, a, b));
        }
    }
    let raw = VelocityField::from_fn(*grid, |x, y| {
        modes.iter().fold((0.0, 0.0), |(u, v), &(kx, ky, a, b)| {
            let phase = kx * x + ky * y;
            // psi = a cos + b sin; u = dpsi/dy, v = -dpsi/dx
            let dpsi = -a * phase.sin() + b * phase.cos();
            (u + ky * dpsi, v - kx * dpsi)
        })
    })?;
    let peak = raw.max_speed();
    if peak == 0.0 {
        return Ok(raw);
    }
    raw.scaled(amplitude / peak)
}

pub fn initial_velocity(config: &SolverConfig) -> Result<VelocityField, SolverError> {
    let grid = config.grid;
    Ok(match &config.initial_condition {
        InitialCondition::TaylorGreen { amplitude } => taylor_green(&grid, *amplitude)?,
        InitialCondition::RandomShear { seed, amplitude } => random_shear(&grid, *seed, *amplitude)?,
        InitialCondition::File { path } => {
            let snap = Snapshot::read(path)?;
            if snap.grid() != &grid {
                return Err(SolverError::Config {
                    field: "initial_condition.path".into(),
                    reason: "snapshot grid differs from config grid".into(),
                });
            }
            snap.velocity().clone()
        }
    })
}

/// Run the configured simulation, recording a snapshot at every sample time.
pub fn simulate(config: &SolverConfig) -> Result<Timeline, SolverError> {
    simulate_with(config, |_| ControlFlow::Continue(()))
}

/// As [`simulate`], but `observe` sees each recorded snapshot and may stop
/// the run early by returning `ControlFlow::Break`.
pub fn simulate_with(
    config: &SolverConfig,
    mut observe: impl FnMut(&Snapshot) -> ControlFlow<()>,
) -> Result<Timeline, SolverError> {
    config.validate()?;
    let mut solver = VorticitySolver::new(config.grid, &config.params, config.dealias);
    let init = initial_velocity(config)?;
    let mut state = solver.state_from_velocity(&init, 0.0);

    let times = config.sample_times();
    let mut snapshots = Vec::with_capacity(times.len());
    let record = |solver: &mut VorticitySolver, state: &SpectralState| -> Result<Snapshot, SolverError> {
        let vel = solver.velocity(state)?;
        let p = pressure_from_velocity(&vel);
        Ok(Snapshot::new(state.time, vel, p)?)
    };

    let first = record(&mut solver, &state)?;
    let mut stop = observe(&first).is_break();
    snapshots.push(first);

    for &target in &times[1..] {
        if stop {
            break;
        }
        while state.time < target {
            let remaining = target - state.time;
            let mut dt = match config.dt {
                TimeStep::Fixed(dt) => dt,
                TimeStep::Auto => {
                    let speed = solver.velocity(&state).map(|v| v.max_speed()).unwrap_or(f64::INFINITY);
                    solver.stable_dt(speed, config.cfl)
                }
            };
            let landing = dt >= remaining * (1.0 - 1e-12);
            if landing {
                dt = remaining;
            }
            state = match solver.step(&state, dt) {
                Ok(s) => s,
                Err(SolverError::BlowUp { time, .. }) => {
                    return Err(SolverError::BlowUp { time, partial: snapshots })
                }
                Err(e) => return Err(e),
            };
            if landing {
                state.time = target;
            }
        }
        let snap = record(&mut solver, &state)?;
        stop = observe(&snap).is_break();
        snapshots.push(snap);
    }

    let timeline = Timeline::new(snapshots, config.params)?;
    timeline.leray_bounds()?;
    Ok(timeline)
}
