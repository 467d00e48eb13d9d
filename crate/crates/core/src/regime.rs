//! Five-stage regime labelling over a diagnostics time series.
//!
//! Rules, applied left to right:
//!
//! 1. Before onset: `Laminar` while the indicator is above `theta_hi` and
//!    fewer than half the nodes are critical, `CriticalEquilibrium` otherwise.
//! 2. The first snapshot with indicator `<= theta` is `SingularityOnset`.
//! 3. The next `transition_window` snapshots are `TransitionInstant`.
//! 4. Afterwards `FullyTurbulent` once the rolling `variance / mean^2` of
//!    the H1 norm over `variance_window` snapshots exceeds `variance_ratio`;
//!    until then the previous label persists.
//!
//! Labels never move backwards in stage order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{check_theta, diagnose, DiagnoseOptions, DiagnosticsError};
use crate::timeline::Timeline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    Laminar,
    CriticalEquilibrium,
    SingularityOnset,
    TransitionInstant,
    FullyTurbulent,
}

impl RegimeLabel {
    pub const ALL: [RegimeLabel; 5] = [
        RegimeLabel::Laminar,
        RegimeLabel::CriticalEquilibrium,
        RegimeLabel::SingularityOnset,
        RegimeLabel::TransitionInstant,
        RegimeLabel::FullyTurbulent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::Laminar => "Laminar",
            RegimeLabel::CriticalEquilibrium => "CriticalEquilibrium",
            RegimeLabel::SingularityOnset => "SingularityOnset",
            RegimeLabel::TransitionInstant => "TransitionInstant",
            RegimeLabel::FullyTurbulent => "FullyTurbulent",
        }
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeConfig {
    pub theta: f64,
    pub theta_hi: f64,
    pub critical_fraction_threshold: f64,
    pub transition_window: usize,
    pub variance_window: usize,
    pub variance_ratio: f64,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        Self {
            theta: 0.5,
            theta_hi: 0.9,
            critical_fraction_threshold: 0.5,
            transition_window: 3,
            variance_window: 5,
            variance_ratio: 0.01,
        }
    }
}

impl RegimeConfig {
    pub fn validate(&self) -> Result<(), DiagnosticsError> {
        check_theta(self.theta)?;
        if !(self.theta_hi > 0.0 && self.theta_hi <= 1.0) {
            return Err(DiagnosticsError::Threshold {
                name: "theta_hi",
                value: self.theta_hi,
                range: "(0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&self.critical_fraction_threshold) {
            return Err(DiagnosticsError::Threshold {
                name: "critical_fraction_threshold",
                value: self.critical_fraction_threshold,
                range: "[0, 1]",
            });
        }
        if !(self.variance_ratio > 0.0) {
            return Err(DiagnosticsError::Threshold {
                name: "variance_ratio",
                value: self.variance_ratio,
                range: "(0, inf)",
            });
        }
        if self.variance_window < 2 {
            return Err(DiagnosticsError::Threshold {
                name: "variance_window",
                value: self.variance_window as f64,
                range: "[2, inf)",
            });
        }
        Ok(())
    }
}

/// Per-snapshot quantities the classifier looks at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeInput {
    /// Relative H1 indicator; `None` when the reference norm is zero, which
    /// never triggers onset.
    pub indicator: Option<f64>,
    pub critical_fraction: f64,
    pub h1_norm_sq: f64,
}

fn variance_ratio(window: &[f64]) -> Option<f64> {
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    if !(mean.abs() > 0.0) {
        return None;
    }
    let var = window.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some(var / (mean * mean))
}

pub fn classify_records(
    inputs: &[RegimeInput],
    cfg: &RegimeConfig,
) -> Result<Vec<RegimeLabel>, DiagnosticsError> {
    cfg.validate()?;
    let mut labels = Vec::with_capacity(inputs.len());
    let mut onset: Option<usize> = None;
    let mut prev = RegimeLabel::Laminar;

    for (k, input) in inputs.iter().enumerate() {
        let candidate = match onset {
            None => {
                let ind = input.indicator.unwrap_or(1.0);
                if input.indicator.is_some() && ind <= cfg.theta {
                    onset = Some(k);
                    RegimeLabel::SingularityOnset
                } else if ind > cfg.theta_hi
                    && input.critical_fraction < cfg.critical_fraction_threshold
                {
                    RegimeLabel::Laminar
                } else {
                    RegimeLabel::CriticalEquilibrium
                }
            }
            Some(o) if k - o <= cfg.transition_window => RegimeLabel::TransitionInstant,
            Some(_) => {
                let turbulent = k + 1 >= cfg.variance_window
                    && variance_ratio(
                        &inputs[k + 1 - cfg.variance_window..=k]
                            .iter()
                            .map(|r| r.h1_norm_sq)
                            .collect::<Vec<_>>(),
                    )
                    .is_some_and(|r| r > cfg.variance_ratio);
                if turbulent {
                    RegimeLabel::FullyTurbulent
                } else {
                    prev
                }
            }
        };
        prev = candidate.max(prev);
        labels.push(prev);
    }
    Ok(labels)
}

/// Label every snapshot of a timeline; `critical_tol` is the relative
/// threshold used for the critical fraction.
pub fn classify_regime(
    timeline: &Timeline,
    cfg: &RegimeConfig,
    critical_tol: f64,
) -> Result<Vec<RegimeLabel>, DiagnosticsError> {
    let opts = DiagnoseOptions { critical_tol, regime: *cfg };
    Ok(diagnose(timeline, &opts)?.into_iter().map(|r| r.regime_label).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inp(indicator: f64, cf: f64, h1: f64) -> RegimeInput {
        RegimeInput { indicator: Some(indicator), critical_fraction: cf, h1_norm_sq: h1 }
    }

    #[test]
    fn constant_high_norm_is_laminar() {
        let inputs = vec![inp(1.0, 0.1, 4.0); 12];
        let labels = classify_records(&inputs, &RegimeConfig::default()).unwrap();
        assert!(labels.iter().all(|&l| l == RegimeLabel::Laminar));
    }

    #[test]
    fn single_snapshot() {
        let labels = classify_records(&[inp(1.0, 0.0, 1.0)], &RegimeConfig::default()).unwrap();
        assert_eq!(labels, vec![RegimeLabel::Laminar]);
        assert!(classify_records(&[], &RegimeConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn slow_decay_crossing_at_ten_persists() {
        // indicator falls linearly 1.0 -> crosses 0.5 exactly at index 10; slow
        // enough that the 5-window variance ratio stays below 0.01
        let inputs: Vec<RegimeInput> = (0..20)
            .map(|k| {
                let ind = 1.0 - 0.05 * k as f64;
                inp(ind, 0.0, 100.0 * (1.0 + 0.001 * (20 - k) as f64))
            })
            .collect();
        let labels = classify_records(&inputs, &RegimeConfig::default()).unwrap();
        use RegimeLabel::*;
        // 1 - 0.05k > 0.9 for k < 2
        assert_eq!(&labels[..2], &[Laminar, Laminar]);
        assert!(labels[2..10].iter().all(|&l| l == CriticalEquilibrium));
        assert_eq!(labels[10], SingularityOnset);
        assert_eq!(&labels[11..14], &[TransitionInstant; 3]);
        assert!(labels[14..].iter().all(|&l| l == TransitionInstant));
    }

    #[test]
    fn critical_fraction_drives_equilibrium_without_regression() {
        let inputs = vec![inp(1.0, 0.1, 1.0), inp(1.0, 0.8, 1.0), inp(1.0, 0.1, 1.0)];
        let labels = classify_records(&inputs, &RegimeConfig::default()).unwrap();
        assert_eq!(
            labels,
            vec![RegimeLabel::Laminar, RegimeLabel::CriticalEquilibrium, RegimeLabel::CriticalEquilibrium]
        );
    }

    #[test]
    fn undefined_indicator_never_onsets() {
        let inputs = vec![
            RegimeInput { indicator: None, critical_fraction: 1.0, h1_norm_sq: 0.0 };
            4
        ];
        let labels = classify_records(&inputs, &RegimeConfig::default()).unwrap();
        assert!(labels.iter().all(|&l| l == RegimeLabel::CriticalEquilibrium));
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = RegimeConfig { theta: 1.5, ..Default::default() };
        assert!(classify_records(&[], &cfg).is_err());
        let cfg = RegimeConfig { variance_window: 1, ..Default::default() };
        assert!(classify_records(&[], &cfg).is_err());
    }
}
