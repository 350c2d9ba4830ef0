use serde::{Deserialize, Serialize};

use super::fit::{FitDiagnostics, FitMethod, FitResult};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::{residuals, Dof};
use crate::linalg::{solve_least_squares, Matrix};
use crate::optimizer::FitContext;

/// Normal-consistency constant of the median absolute residual.
const MAD_SCALE: f64 = 0.6745;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HuberTuning {
    Fixed(f64),
    /// Picks `c` from `0.7, 0.8, …, 2.5` by the smallest estimated
    /// asymptotic variance `ŝ²·mean(ψ²)/mean(ψ′)²`.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HuberConfig {
    pub tuning: HuberTuning,
    pub max_iterations: usize,
    /// Relative change in `β` that ends the reweighting.
    pub tolerance: f64,
}

impl Default for HuberConfig {
    fn default() -> Self {
        Self { tuning: HuberTuning::Fixed(1.345), max_iterations: 100, tolerance: 1e-9 }
    }
}

/// `ρ_c(u)`: `u²/2` for `|u| ≤ c`, `c|u| − c²/2` beyond.
pub fn huber_rho(u: f64, c: f64) -> f64 {
    if u.abs() <= c {
        0.5 * u * u
    } else {
        c * u.abs() - 0.5 * c * c
    }
}

fn median_abs(r: &[f64]) -> f64 {
    let mut a: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    a.sort_by(f64::total_cmp);
    let m = a.len();
    if m % 2 == 1 {
        a[m / 2]
    } else {
        0.5 * (a[m / 2 - 1] + a[m / 2])
    }
}

struct Irls {
    beta: Vec<f64>,
    scale: f64,
    iterations: usize,
    converged: bool,
}

fn irls(data: &Dataset, start: &[f64], c: f64, cfg: &HuberConfig) -> Result<Irls> {
    let (n, p) = (data.n(), data.p());
    let mut beta = start.to_vec();
    let mut scale = 0.0;
    for it in 1..=cfg.max_iterations {
        let r = residuals(data, &beta);
        scale = median_abs(&r) / MAD_SCALE;
        if !(scale > 0.0) {
            return Ok(Irls { beta, scale, iterations: it, converged: false });
        }
        let mut xw = Vec::with_capacity(n * p);
        let mut yw = Vec::with_capacity(n);
        for (i, ri) in r.iter().enumerate() {
            let u = (ri / scale).abs();
            let w = if u <= c { 1.0 } else { c / u };
            let sw = w.sqrt();
            xw.extend(data.x().row(i).iter().map(|v| v * sw));
            yw.push(data.y()[i] * sw);
        }
        let next = solve_least_squares(&Matrix::new(n, p, xw)?, &yw)?.coef;
        let change = next.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let size = next.iter().map(|v| v.abs()).fold(1.0, f64::max);
        beta = next;
        if change <= cfg.tolerance * size {
            return Ok(Irls { beta, scale, iterations: it, converged: true });
        }
    }
    Ok(Irls { beta, scale, iterations: cfg.max_iterations, converged: false })
}

/// `ŝ²·mean(ψ_c(u)²)/mean(ψ_c′(u))²`, or `None` when no residual is inside `c`.
fn asymptotic_variance(data: &Dataset, fit: &Irls, c: f64) -> Option<f64> {
    let r = residuals(data, &fit.beta);
    let n = r.len() as f64;
    let (mut psi2, mut dpsi) = (0.0, 0.0);
    for ri in &r {
        let u = ri / fit.scale;
        if u.abs() <= c {
            psi2 += u * u;
            dpsi += 1.0;
        } else {
            psi2 += c * c;
        }
    }
    (dpsi > 0.0).then(|| fit.scale * fit.scale * (psi2 / n) / (dpsi / n).powi(2))
}

/// Huber M-estimate by iteratively reweighted least squares, with the scale
/// re-estimated as `median|r|/0.6745` at every sweep.
pub fn fit_huber(data: &Dataset, cfg: &HuberConfig) -> Result<FitResult> {
    let ctx = FitContext::new(data)?;
    fit_huber_in(&ctx, cfg)
}

pub(crate) fn fit_huber_in(ctx: &FitContext<'_>, cfg: &HuberConfig) -> Result<FitResult> {
    let data = ctx.data;
    let grid: Vec<f64> = match cfg.tuning {
        HuberTuning::Fixed(c) => {
            if !(c > 0.0) {
                return Err(Error::InvalidSpec { field: "huber.c".into(), reason: format!("must be positive, got {c}") });
            }
            vec![c]
        }
        HuberTuning::Auto => (7..=25).map(|k| k as f64 / 10.0).collect(),
    };
    let mut best: Option<(f64, Irls, f64)> = None;
    for &c in &grid {
        let fit = irls(data, &ctx.ols.coef, c, cfg)?;
        let var = if grid.len() == 1 { Some(0.0) } else { asymptotic_variance(data, &fit, c) };
        if let Some(v) = var {
            if best.as_ref().is_none_or(|b| v < b.2) {
                best = Some((c, fit, v));
            }
        }
    }
    let (c, fit) = match best {
        Some((c, fit, _)) => (c, fit),
        None => (grid[0], irls(data, &ctx.ols.coef, grid[0], cfg)?),
    };
    let degenerate = !(fit.scale > 0.0);
    let mut warnings = Vec::new();
    if degenerate {
        warnings.push("median absolute residual is zero".into());
    } else if !fit.converged {
        warnings.push(format!("reweighting did not converge in {} sweeps", fit.iterations));
    }
    Ok(FitResult {
        method: FitMethod::Huber { c },
        beta: fit.beta,
        sigma: fit.scale,
        nu_used: Dof::Gaussian,
        loglik: None,
        std_errors: None,
        diagnostics: FitDiagnostics {
            iterations: fit.iterations,
            converged: fit.converged,
            gradient_norm: 0.0,
            degenerate,
            trace: Vec::new(),
            warnings,
        },
        nu_estimate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::fit_ols;

    #[test]
    fn rho_values() {
        assert_eq!(huber_rho(1.0, 1.5), 0.5);
        assert_eq!(huber_rho(3.0, 1.5), 3.375);
        assert_eq!(huber_rho(-3.0, 1.5), 3.375);
    }

    #[test]
    fn huge_c_is_ols() {
        let d = Dataset::stackloss();
        let h = fit_huber(&d, &HuberConfig { tuning: HuberTuning::Fixed(1e6), ..Default::default() }).unwrap();
        let o = fit_ols(&d).unwrap();
        for (a, b) in h.beta.iter().zip(&o.beta) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn matches_brute_force_slope() {
        let x = Matrix::new(5, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let d = Dataset::new(x, vec![1.1, 1.9, 3.2, 3.9, 12.0]).unwrap();
        let c = 1.345;
        let fit = fit_huber(&d, &HuberConfig::default()).unwrap();
        assert!(fit.diagnostics.converged);
        let s = fit.sigma;
        let objective = |b: f64| -> f64 { (0..5).map(|i| huber_rho((d.y()[i] - b * (i + 1) as f64) / s, c)).sum() };
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=400_000 {
            let b = 0.0 + k as f64 * 1e-5;
            let v = objective(b);
            if v < best.0 {
                best = (v, b);
            }
        }
        assert!((fit.beta[0] - best.1).abs() < 1e-4, "{} vs {}", fit.beta[0], best.1);
    }

    #[test]
    fn weights_within_unit_interval() {
        let d = Dataset::stackloss();
        let fit = fit_huber(&d, &HuberConfig { tuning: HuberTuning::Auto, ..Default::default() }).unwrap();
        let FitMethod::Huber { c } = fit.method else { panic!() };
        assert!((0.7..=2.5).contains(&c));
        for r in residuals(&d, &fit.beta) {
            let u = (r / fit.sigma).abs();
            let w = if u <= c { 1.0 } else { c / u };
            assert!(w > 0.0 && w <= 1.0);
        }
    }
}
