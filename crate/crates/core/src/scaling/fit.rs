use std::io::Read;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{positive, ScalingError};

/// Result of an ordinary least-squares fit of `ln y = ln k1 + exponent * ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub prefactor_k1: f64,
    /// Coefficient of determination in log space.
    pub r_squared: f64,
    pub n_points: usize,
    /// Standard deviation of the log residuals (`n - 2` dof); 0 for two points.
    pub residual_std: f64,
}

impl FitResult {
    /// Fewer than five points: the fit is reported but should not be trusted.
    pub fn is_underdetermined(&self) -> bool {
        self.n_points < 5
    }
}

pub fn powerlaw_fit(points: &[(f64, f64)]) -> Result<FitResult, ScalingError> {
    for &(x, y) in points {
        positive("x", x)?;
        positive("y", y)?;
    }
    if points.len() < 2 {
        return Err(ScalingError::InsufficientData { needed: 2, got: points.len() });
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > f64::EPSILON * lx.iter().map(|x| x * x).sum::<f64>()) {
        return Err(ScalingError::DegenerateDesign);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    let residual_std = if points.len() > 2 { (ss_res / (n - 2.0)).sqrt() } else { 0.0 };
    Ok(FitResult {
        exponent: slope,
        prefactor_k1: intercept.exp(),
        r_squared,
        n_points: points.len(),
        residual_std,
    })
}

/// `n` values geometrically spaced from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Synthetic `(Re, tau)` pairs with `tau = k1 / Re * exp(eps)`, `eps ~ N(0, noise_rel)`.
pub fn synth_sk_dataset(
    k1: f64,
    noise_rel: f64,
    re_values: &[f64],
    seed: u64,
) -> Result<Vec<(f64, f64)>, ScalingError> {
    positive("k1", k1)?;
    if !(noise_rel.is_finite() && noise_rel >= 0.0) {
        return Err(ScalingError::Domain { name: "noise_rel", value: noise_rel });
    }
    for &re in re_values {
        positive("re", re)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_rel).map_err(|_| ScalingError::Domain {
        name: "noise_rel",
        value: noise_rel,
    })?;
    Ok(re_values
        .iter()
        .map(|&re| {
            let eps = if noise_rel > 0.0 { normal.sample(&mut rng) } else { 0.0 };
            (re, k1 / re * eps.exp())
        })
        .collect())
}

/// Read `(re, tau_trans)` pairs from a sweep-style CSV.
///
/// Rows whose `hit` column is `false` or whose `tau_trans` cell is empty are
/// skipped; other columns are ignored.
pub fn read_fit_points(reader: impl Read) -> Result<Vec<(f64, f64)>, ScalingError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| ScalingError::Csv(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ScalingError::Csv(format!("missing column `{name}`")))
    };
    let re_col = col("re")?;
    let tau_col = col("tau_trans")?;
    let hit_col = headers.iter().position(|h| h == "hit");

    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ScalingError::Csv(e.to_string()))?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        if let Some(h) = hit_col {
            match field(h) {
                "true" => {}
                "false" => continue,
                other => {
                    return Err(ScalingError::Csv(format!(
                        "row {}: hit must be true/false, got `{other}`",
                        line + 2
                    )))
                }
            }
        }
        if field(tau_col).is_empty() {
            continue;
        }
        let parse = |c: usize, name: &str| {
            field(c).parse::<f64>().map_err(|e| {
                ScalingError::Csv(format!("row {}: bad {name} `{}`: {e}", line + 2, field(c)))
            })
        };
        points.push((parse(re_col, "re")?, parse(tau_col, "tau_trans")?));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [500.0, 1000.0, 2000.0, 4000.0]
            .iter()
            .map(|&re| (re, 1.45 / re))
            .collect();
        let f = powerlaw_fit(&pts).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-12);
        assert!((f.prefactor_k1 - 1.45).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(f.n_points, 4);
        assert!(f.residual_std < 1e-12);
        assert!(f.is_underdetermined());
    }

    #[test]
    fn fit_errors() {
        assert_eq!(
            powerlaw_fit(&[(1000.0, 0.001)]),
            Err(ScalingError::InsufficientData { needed: 2, got: 1 })
        );
        assert!(matches!(powerlaw_fit(&[(1.0, 1.0), (-2.0, 1.0)]), Err(ScalingError::Domain { .. })));
        assert!(matches!(powerlaw_fit(&[(1.0, 0.0), (2.0, 1.0)]), Err(ScalingError::Domain { .. })));
        assert_eq!(powerlaw_fit(&[(3.0, 1.0), (3.0, 2.0)]), Err(ScalingError::DegenerateDesign));
    }

    #[test]
    fn two_points_give_exact_line() {
        let f = powerlaw_fit(&[(1.0, 2.0), (10.0, 20.0)]).unwrap();
        assert!((f.exponent - 1.0).abs() < 1e-12);
        assert!((f.prefactor_k1 - 2.0).abs() < 1e-12);
        assert_eq!(f.residual_std, 0.0);
    }

    #[test]
    fn synth_noiseless_and_deterministic() {
        let re = log_spaced(1e3, 1e5, 20);
        assert_eq!(re.len(), 20);
        assert!((re[0] - 1e3).abs() < 1e-9 && (re[19] - 1e5).abs() < 1e-6);
        let exact = synth_sk_dataset(1.3, 0.0, &re, 9).unwrap();
        for &(r, t) in &exact {
            assert_eq!(t, 1.3 / r);
        }
        let a = synth_sk_dataset(1.3, 0.01, &re, 9).unwrap();
        let b = synth_sk_dataset(1.3, 0.01, &re, 9).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| p.1.to_bits() == q.1.to_bits()));
        assert_ne!(a, synth_sk_dataset(1.3, 0.01, &re, 10).unwrap());
        assert!(synth_sk_dataset(0.0, 0.01, &re, 1).is_err());
        assert!(synth_sk_dataset(1.0, -0.01, &re, 1).is_err());
        assert!(synth_sk_dataset(1.0, 0.01, &[0.0], 1).is_err());
    }

    #[test]
    fn reads_sweep_csv_skipping_misses() {
        let text = "re,nu,t_trans,tau_trans,hit\n100,0.01,3.0,3.0,true\n200,0.005,,,false\n400,0.0025,1.5,1.5,true\n";
        let pts = read_fit_points(text.as_bytes()).unwrap();
        assert_eq!(pts, vec![(100.0, 3.0), (400.0, 1.5)]);
        assert!(read_fit_points("re,nu\n1,2\n".as_bytes()).is_err());
        assert!(read_fit_points("re,tau_trans\n1,abc\n".as_bytes()).is_err());
        assert!(read_fit_points("re,tau_trans\n".as_bytes()).unwrap().is_empty());
    }
}
