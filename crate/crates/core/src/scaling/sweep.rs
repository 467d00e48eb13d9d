use std::io::Write;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{crossing_time, detect_transition_time, timescales, ScalingError};
use crate::diagnostics::h1_norm_sq;
use crate::field::FlowParams;
use crate::solver::{analytic_taylor_green_timeline, simulate_with, InitialCondition, SolverConfig};

/// Which dimensional parameter carries the Reynolds-number variation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vary {
    /// `nu = U L / Re` at fixed `U`, `L`.
    #[default]
    Viscosity,
    /// `U = Re nu / L` at fixed `nu`, `L`; the initial amplitude scales with `U`.
    Velocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Run the spectral solver.
    #[default]
    Simulate,
    /// Sample the exact Taylor-Green decay instead (template must use it).
    Analytic,
}

fn default_theta() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub template: SolverConfig,
    pub re_values: Vec<f64>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub vary: Vary,
    #[serde(default)]
    pub mode: SweepMode,
    /// End each simulated run at the first snapshot past the threshold.
    #[serde(default = "default_true")]
    pub stop_on_transition: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ScalingError> {
        if self.re_values.is_empty() {
            return Err(ScalingError::Config("re_values is empty".into()));
        }
        for &re in &self.re_values {
            if !(re.is_finite() && re > 0.0) {
                return Err(ScalingError::Config(format!("re_values contains {re}")));
            }
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(ScalingError::Config(format!("theta = {} outside (0, 1]", self.theta)));
        }
        if self.mode == SweepMode::Analytic
            && !matches!(self.template.initial_condition, InitialCondition::TaylorGreen { .. })
        {
            return Err(ScalingError::Config(
                "analytic mode requires a taylor_green initial condition".into(),
            ));
        }
        self.template.validate().map_err(|e| ScalingError::Config(format!("template: {e}")))
    }

    /// Solver config for one Reynolds number.
    pub fn run_config(&self, re: f64) -> SolverConfig {
        let mut cfg = self.template.clone();
        let base: FlowParams = self.template.params;
        match self.vary {
            Vary::Viscosity => cfg.params.nu = base.u_char * base.l_char / re,
            Vary::Velocity => {
                let u = re * base.nu / base.l_char;
                cfg.params.u_char = u;
                let scale = u / base.u_char;
                match &mut cfg.initial_condition {
                    InitialCondition::TaylorGreen { amplitude }
                    | InitialCondition::RandomShear { amplitude, .. } => *amplitude *= scale,
                    InitialCondition::File { .. } => {}
                }
            }
        }
        cfg
    }
}

/// One line of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub re: f64,
    pub nu: f64,
    pub u_char: f64,
    pub t_trans: Option<f64>,
    pub tau_trans: Option<f64>,
    pub hit: bool,
    /// Solver or diagnostic failure that ended the run.
    pub failure: Option<String>,
}

fn run_one(cfg: &SweepConfig, re: f64) -> SweepRow {
    let run = cfg.run_config(re);
    let mut row = SweepRow {
        re,
        nu: run.params.nu,
        u_char: run.params.u_char,
        t_trans: None,
        tau_trans: None,
        hit: false,
        failure: None,
    };
    let t_c = match timescales(&run.params) {
        Ok(ts) => ts.t_c,
        Err(e) => {
            row.failure = Some(e.to_string());
            return row;
        }
    };

    let detected = match cfg.mode {
        SweepMode::Analytic => {
            let amplitude = match run.initial_condition {
                InitialCondition::TaylorGreen { amplitude } => amplitude,
                _ => unreachable!("validated"),
            };
            analytic_taylor_green_timeline(&run.grid, amplitude, &run.params, &run.sample_times())
                .map_err(|e| e.to_string())
                .and_then(|tl| detect_transition_time(&tl, cfg.theta).map_err(|e| e.to_string()))
                .map(|r| r.t_trans)
        }
        SweepMode::Simulate => {
            let (mut times, mut indicator) = (Vec::new(), Vec::new());
            let mut reference = None;
            let theta = cfg.theta;
            let stop = cfg.stop_on_transition;
            let result = simulate_with(&run, |snap| {
                let h1 = h1_norm_sq(snap.velocity());
                let h0 = *reference.get_or_insert(h1);
                let ind = if h0 > 0.0 { (h1 / h0).sqrt().clamp(0.0, 1.0) } else { f64::NAN };
                times.push(snap.time());
                indicator.push(ind);
                if (stop && ind <= theta) || ind.is_nan() {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            match result {
                Err(e) => Err(e.to_string()),
                Ok(_) if indicator.first().is_some_and(|i| i.is_nan()) => {
                    Err("initial H1 norm is zero".to_string())
                }
                Ok(_) => Ok(crossing_time(&times, &indicator, theta)),
            }
        }
    };
    match detected {
        Ok(t) => {
            row.t_trans = t;
            row.tau_trans = t.map(|t| t / t_c);
            row.hit = t.is_some();
        }
        Err(msg) => row.failure = Some(msg),
    }
    row
}

/// One simulation and detection per Reynolds number, run in parallel on the
/// current rayon pool; rows come back sorted by Re.
pub fn reynolds_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, ScalingError> {
    cfg.validate()?;
    let mut rows: Vec<SweepRow> = cfg.re_values.par_iter().map(|&re| run_one(cfg, re)).collect();
    rows.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(rows)
}

pub const SWEEP_HEADER: [&str; 5] = ["re", "nu", "t_trans", "tau_trans", "hit"];

pub fn write_sweep_csv(out: impl Write, rows: &[SweepRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    let cell = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            format!("{:e}", r.re),
            format!("{:e}", r.nu),
            cell(r.t_trans),
            cell(r.tau_trans),
            r.hit.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
