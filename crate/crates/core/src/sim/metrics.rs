use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::Dof;

/// Mean over replications of the per-replication RMSE of `β̂`, optionally
/// skipping the first (intercept) coordinate.
pub fn rmse_beta(estimates: &[Vec<f64>], truth: &[f64], exclude_intercept: bool) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::InvalidSpec { field: "estimates".into(), reason: "no estimates".into() });
    }
    let start = usize::from(exclude_intercept);
    if truth.len() <= start {
        return Err(Error::Dimension("no coefficients left after excluding the intercept".into()));
    }
    let k = (truth.len() - start) as f64;
    let mut total = 0.0;
    for est in estimates {
        if est.len() != truth.len() {
            return Err(Error::Dimension(format!("estimate has {} entries, truth has {}", est.len(), truth.len())));
        }
        let ss: f64 = est[start..].iter().zip(&truth[start..]).map(|(a, b)| (a - b).powi(2)).sum();
        total += (ss / k).sqrt();
    }
    Ok(total / estimates.len() as f64)
}

/// Treatment of Gaussian-limit estimates in `ν` summaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerPolicy {
    /// Replace the marker by this value (tables use 1000).
    Cap(f64),
    Exclude,
}

/// Accuracy of `ν̂` over replications. Fields are `None` when undefined
/// (no usable estimate, or fewer than two for `se`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuMetrics {
    pub rmse: Option<f64>,
    pub bias: Option<f64>,
    /// Sample standard deviation, divisor `count − 1`.
    pub se: Option<f64>,
    /// Estimates entering the summaries.
    pub count: usize,
    /// Gaussian-limit markers seen (capped or excluded).
    pub markers: usize,
}

pub fn nu_metrics(estimates: &[Dof], truth: f64, policy: MarkerPolicy) -> NuMetrics {
    let markers = estimates.iter().filter(|d| d.is_gaussian()).count();
    let values: Vec<f64> = estimates
        .iter()
        .filter_map(|d| match (d, policy) {
            (Dof::Finite(nu), _) => Some(*nu),
            (Dof::Gaussian, MarkerPolicy::Cap(c)) => Some(c),
            (Dof::Gaussian, MarkerPolicy::Exclude) => None,
        })
        .collect();
    let count = values.len();
    if count == 0 {
        return NuMetrics { rmse: None, bias: None, se: None, count, markers };
    }
    let n = count as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mse = values.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / n;
    let se = (count > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    NuMetrics { rmse: Some(mse.sqrt()), bias: Some(mean - truth), se, count, markers }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_normal, RngStream};

    #[test]
    fn rmse_examples() {
        let truth = vec![1.0, 2.0, 3.0];
        assert_eq!(rmse_beta(&[truth.clone(), truth.clone()], &truth, true).unwrap(), 0.0);
        let est = vec![7.0, 5.0, 7.0];
        let v = rmse_beta(&[est], &truth, true).unwrap();
        assert!((v - 12.5f64.sqrt()).abs() < 1e-15);
        assert!(rmse_beta(&[vec![1.0]], &[1.0], true).is_err());
        assert!(rmse_beta(&[], &truth, true).is_err());
    }

    #[test]
    fn rmse_matches_double_loop() {
        let mut rng = RngStream::new(6, 0).rng();
        let truth = sample_normal(5, &mut rng);
        let est: Vec<Vec<f64>> = (0..40).map(|_| sample_normal(5, &mut rng)).collect();
        for exclude in [true, false] {
            let start = if exclude { 1 } else { 0 };
            let mut acc = 0.0;
            for e in &est {
                let mut ss = 0.0;
                for j in start..5 {
                    ss += (e[j] - truth[j]) * (e[j] - truth[j]);
                }
                acc += (ss / (5 - start) as f64).sqrt();
            }
            let naive = acc / 40.0;
            assert!((rmse_beta(&est, &truth, exclude).unwrap() - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn nu_metric_examples() {
        let m = nu_metrics(&[Dof::Finite(2.0); 3], 2.0, MarkerPolicy::Exclude);
        assert_eq!((m.rmse, m.bias, m.se), (Some(0.0), Some(0.0), Some(0.0)));
        let m = nu_metrics(&[Dof::Finite(1.0), Dof::Finite(3.0)], 2.0, MarkerPolicy::Exclude);
        assert_eq!(m.bias, Some(0.0));
        assert_eq!(m.rmse, Some(1.0));
        assert!((m.se.unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let m = nu_metrics(&[Dof::Gaussian, Dof::Gaussian], 2.0, MarkerPolicy::Exclude);
        assert_eq!((m.rmse, m.count, m.markers), (None, 0, 2));
        let m = nu_metrics(&[Dof::Gaussian, Dof::Finite(2.0)], 2.0, MarkerPolicy::Cap(1000.0));
        assert_eq!((m.bias, m.markers), (Some(499.0), 1));
        let single = nu_metrics(&[Dof::Finite(2.5)], 2.0, MarkerPolicy::Exclude);
        assert!(single.se.is_none());
    }

    #[test]
    fn tally_identity() {
        let mut rng = RngStream::new(3, 0).rng();
        let est: Vec<Dof> = sample_normal(57, &mut rng).into_iter().map(|v| Dof::Finite(2.0 + v.abs())).collect();
        let m = nu_metrics(&est, 2.0, MarkerPolicy::Exclude);
        let n = 57.0;
        let (se, bias, rmse) = (m.se.unwrap(), m.bias.unwrap(), m.rmse.unwrap());
        assert!((se * se * (n - 1.0) / n + bias * bias - rmse * rmse).abs() < 1e-10);
    }
}
