use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::field::{FieldError, FlowParams, Grid};

/// Explicit step size or CFL-controlled adaptive stepping.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TimeStep {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for TimeStep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TimeStep::Auto => s.serialize_str("auto"),
            TimeStep::Fixed(dt) => s.serialize_f64(*dt),
        }
    }
}

impl<'de> Deserialize<'de> for TimeStep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Fixed(f64),
            Keyword(String),
        }
        match Repr::deserialize(d)? {
            Repr::Fixed(dt) => Ok(TimeStep::Fixed(dt)),
            Repr::Keyword(k) if k == "auto" => Ok(TimeStep::Auto),
            Repr::Keyword(k) => Err(serde::de::Error::custom(format!(
                "dt must be a number or \"auto\", got \"{k}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    TaylorGreen { amplitude: f64 },
    File { path: PathBuf },
    /// Band-limited random streamfunction, modes `|k| <= 4`, scaled so `max|u| = amplitude`.
    RandomShear { seed: u64, amplitude: f64 },
}

fn default_cfl() -> f64 {
    0.4
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub grid: Grid,
    pub params: FlowParams,
    #[serde(default)]
    pub dt: TimeStep,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    pub snapshot_interval: f64,
    pub initial_condition: InitialCondition,
}

fn bad(field: &str, reason: impl Into<String>) -> SolverError {
    SolverError::Config { field: field.to_string(), reason: reason.into() }
}

impl SolverConfig {
    /// Taylor-Green run with CFL stepping and default numerics.
    pub fn taylor_green(grid: Grid, params: FlowParams, amplitude: f64, t_end: f64, interval: f64) -> Self {
        Self {
            grid,
            params,
            dt: TimeStep::Auto,
            t_end,
            cfl: default_cfl(),
            dealias: true,
            snapshot_interval: interval,
            initial_condition: InitialCondition::TaylorGreen { amplitude },
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SolverError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| SolverError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.params.validate().map_err(|e| match e {
            FieldError::InvalidParam { field, reason } => bad(field, reason),
            other => bad("params", other.to_string()),
        })?;
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(bad("t_end", format!("must be positive, got {}", self.t_end)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(bad("cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.snapshot_interval.is_finite() && self.snapshot_interval > 0.0) {
            return Err(bad(
                "snapshot_interval",
                format!("must be positive, got {}", self.snapshot_interval),
            ));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(bad("dt", format!("must be positive or \"auto\", got {dt}")));
            }
        }
        match &self.initial_condition {
            InitialCondition::TaylorGreen { amplitude } | InitialCondition::RandomShear { amplitude, .. } => {
                if !amplitude.is_finite() {
                    return Err(bad("amplitude", "must be finite"));
                }
            }
            InitialCondition::File { .. } => {}
        }
        Ok(())
    }

    /// Output times: multiples of the interval, with `t_end` as the last entry.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_end / self.snapshot_interval + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * self.snapshot_interval).collect();
        let last = *times.last().unwrap();
        if (self.t_end - last).abs() <= 1e-9 * self.t_end {
            *times.last_mut().unwrap() = self.t_end;
        } else {
            times.push(self.t_end);
        }
        times
    }
}
