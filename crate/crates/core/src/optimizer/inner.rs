use serde::{Deserialize, Serialize};

use super::{quasi_newton_maximize, Objective, OptimControl, QuasiNewtonOptions};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::{kernel, log_norm_const, Dof};
use crate::linalg::{axpy, dot, solve_least_squares, Cholesky, LeastSquares, Matrix};

/// Per-dataset quantities reused by every inner fit: the OLS solution and
/// `(XᵀX)⁻¹`, which seeds the quasi-Newton curvature.
#[derive(Debug, Clone)]
pub struct FitContext<'a> {
    pub data: &'a Dataset,
    pub ols: LeastSquares,
    pub xtx_inv: Matrix,
}

impl<'a> FitContext<'a> {
    pub fn new(data: &'a Dataset) -> Result<Self> {
        let ols = solve_least_squares(data.x(), data.y())?;
        let xtx = data.x().weighted_gram(None);
        let xtx_inv = Cholesky::new(&xtx)
            .ok_or(Error::Singular { deficient: 1, cols: data.p() })?
            .inverse();
        Ok(Self { data, ols, xtx_inv })
    }

    /// The OLS residuals vanish up to rounding.
    pub fn is_exact_fit(&self) -> bool {
        let yy: f64 = self.data.y().iter().map(|v| v * v).sum();
        !(self.ols.rss > 1e-24 * yy.max(f64::MIN_POSITIVE))
    }

    /// ML scale of the OLS fit, `√(RSS/n)`.
    pub fn ols_ml_sigma(&self) -> f64 {
        (self.ols.rss / self.data.n() as f64).sqrt()
    }

    /// Block-diagonal inverse of the expected information in `(β, log σ)`.
    pub(crate) fn initial_inverse_hessian(&self, sigma: f64, omega: f64, extra: usize) -> Matrix {
        let p = self.data.p();
        let n = self.data.n() as f64;
        let mut h = Matrix::zeros(p + 1 + extra, p + 1 + extra);
        let beta_scale = sigma * sigma * (1.0 + 3.0 * omega) / (1.0 + omega);
        for r in 0..p {
            for c in 0..p {
                h[(r, c)] = beta_scale * self.xtx_inv[(r, c)];
            }
        }
        h[(p, p)] = (1.0 + 3.0 * omega) / (2.0 * n);
        h
    }
}

/// Constrained maximizer `(β̂_ν, σ̂_ν)` at a fixed `ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerFit {
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    /// Log-likelihood after every accepted step.
    pub trace: Vec<f64>,
}

/// `ℓ(β, e^s, ω)` over `θ = (β, s)`, with the analytic gradient.
pub(crate) struct BetaLogSigma<'a> {
    pub data: &'a Dataset,
    pub omega: f64,
    pub norm_const: f64,
    /// Added to `∂ℓ/∂s`; `−1` turns the objective into `ℓ − ln σ`.
    pub sigma_power: f64,
}

impl<'a> BetaLogSigma<'a> {
    pub fn new(data: &'a Dataset, omega: f64) -> Self {
        Self { data, omega, norm_const: log_norm_const(omega), sigma_power: 0.0 }
    }

    /// Returns the value and, when `grad` is given, fills `(∂/∂β, ∂/∂s)`.
    pub fn eval(&self, theta: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let p = self.data.p();
        let (beta, s) = (&theta[..p], theta[p]);
        let sigma = s.exp();
        if !(sigma > 0.0 && sigma.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let n = self.data.n() as f64;
        let x = self.data.x();
        let w = self.omega;
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut kern = 0.0;
        let mut s_grad = -n + self.sigma_power;
        for (i, yi) in self.data.y().iter().enumerate() {
            let xi = x.row(i);
            let z = (yi - dot(xi, beta)) / sigma;
            let z2 = z * z;
            kern += kernel(z2, w);
            if let Some(g) = grad.as_deref_mut() {
                let u = (1.0 + w) / (1.0 + w * z2);
                axpy(u * z / sigma, xi, &mut g[..p]);
                s_grad += u * z2;
            }
        }
        if let Some(g) = grad {
            g[p] = s_grad;
        }
        n * (self.norm_const - s) + kern + self.sigma_power * s
    }
}

impl Objective for BetaLogSigma<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x, None)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        Some(self.eval(x, Some(grad)))
    }
}

/// Maximizes the log-likelihood over `(β, log σ)` at fixed degrees of freedom.
///
/// Starts from `warm_start` when given, otherwise from OLS `β` with the
/// residual-mean-square `σ`. The Gaussian marker returns the closed form
/// (OLS `β`, `σ² = RSS/n`). An exact fit (`RSS = 0`) is a degeneracy error.
pub fn inner_maximize_beta_sigma(
    ctx: &FitContext<'_>,
    dof: Dof,
    warm_start: Option<(&[f64], f64)>,
    ctl: &OptimControl,
) -> Result<InnerFit> {
    inner_maximize_with(ctx, dof, warm_start, ctl, 0.0)
}

/// As [`inner_maximize_beta_sigma`] for `ℓ + sigma_power·ln σ`; `loglik`
/// then holds that objective.
pub(crate) fn inner_maximize_with(
    ctx: &FitContext<'_>,
    dof: Dof,
    warm_start: Option<(&[f64], f64)>,
    ctl: &OptimControl,
    sigma_power: f64,
) -> Result<InnerFit> {
    let data = ctx.data;
    let nu_label = dof.nu().unwrap_or(f64::INFINITY);
    if ctx.is_exact_fit() {
        return Err(Error::Degenerate { nu: nu_label });
    }
    let omega = dof.omega();
    if dof.is_gaussian() {
        let sigma = (ctx.ols.rss / (data.n() as f64 - sigma_power)).sqrt();
        let mut obj = BetaLogSigma::new(data, 0.0);
        obj.sigma_power = sigma_power;
        let mut theta = ctx.ols.coef.clone();
        theta.push(sigma.ln());
        let loglik = obj.value(&theta);
        return Ok(InnerFit {
            beta: ctx.ols.coef.clone(),
            sigma,
            loglik,
            iterations: 0,
            converged: true,
            gradient_norm: 0.0,
            trace: vec![loglik],
        });
    }
    let (beta0, sigma0) = match warm_start {
        Some((b, s)) if b.len() == data.p() && s > 0.0 && s.is_finite() => (b.to_vec(), s),
        _ => (ctx.ols.coef.clone(), ctx.ols.residual_mean_square.sqrt()),
    };
    let mut obj = BetaLogSigma::new(data, omega);
    obj.sigma_power = sigma_power;
    let mut start = beta0;
    start.push(sigma0.ln());
    let opts = QuasiNewtonOptions { initial_inverse_hessian: Some(ctx.initial_inverse_hessian(sigma0, omega, 0)) };
    let res = quasi_newton_maximize(&obj, &start, ctl, &opts);
    if !res.value.is_finite() {
        return Err(Error::Degenerate { nu: nu_label });
    }
    let p = data.p();
    Ok(InnerFit {
        beta: res.argmax[..p].to_vec(),
        sigma: res.argmax[p].exp(),
        loglik: res.value,
        iterations: res.iterations,
        converged: res.converged,
        gradient_norm: res.gradient_norm,
        trace: res.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::{t_log_likelihood, ModelParams};
    use crate::rng::{sample_normal, RngStream};

    /// 10 points, one slope, no intercept.
    pub(crate) fn grid_dataset() -> Dataset {
        let x = vec![0.3, -1.1, 0.8, 1.7, -0.4, 2.2, -1.9, 0.5, 1.1, -0.7];
        let y = vec![0.9, -1.5, 0.2, 3.9, -0.1, 2.8, -2.6, 4.1, 1.0, -1.3];
        Dataset::new(Matrix::new(10, 1, x).unwrap(), y).unwrap()
    }

    #[test]
    fn gaussian_marker_is_closed_form() {
        let d = Dataset::stackloss();
        let ctx = FitContext::new(&d).unwrap();
        let fit = inner_maximize_beta_sigma(&ctx, Dof::Gaussian, None, &OptimControl::default()).unwrap();
        assert_eq!(fit.beta, ctx.ols.coef);
        assert_eq!(fit.sigma, (ctx.ols.rss / 21.0).sqrt());
    }

    #[test]
    fn matches_grid_oracle() {
        // dense (β, σ) grid followed by Nelder-Mead refinement, ν = 2
        let d = grid_dataset();
        let ctx = FitContext::new(&d).unwrap();
        let fit = inner_maximize_beta_sigma(&ctx, Dof::Finite(2.0), None, &OptimControl::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.beta[0] - GRID_BETA).abs() < 1e-4, "{fit:?}");
        assert!((fit.sigma - GRID_SIGMA).abs() < 1e-4, "{fit:?}");
        assert!((fit.loglik - GRID_LOGLIK).abs() < 1e-8);
    }

    pub(crate) const GRID_BETA: f64 = 1.330_306_622_382_54;
    pub(crate) const GRID_SIGMA: f64 = 0.549_445_927_874_345_3;
    pub(crate) const GRID_LOGLIK: f64 = -14.434_703_372_732_834;

    #[test]
    fn warm_start_at_solution() {
        let d = grid_dataset();
        let ctx = FitContext::new(&d).unwrap();
        let ctl = OptimControl::default();
        let fit = inner_maximize_beta_sigma(&ctx, Dof::Finite(2.0), None, &ctl).unwrap();
        let again = inner_maximize_beta_sigma(&ctx, Dof::Finite(2.0), Some((&fit.beta, fit.sigma)), &ctl).unwrap();
        assert!(again.converged && again.iterations <= 2);
    }

    #[test]
    fn dominates_start_and_trace_is_monotone() {
        let d = Dataset::stackloss();
        let ctx = FitContext::new(&d).unwrap();
        let fit = inner_maximize_beta_sigma(&ctx, Dof::Finite(2.0), None, &OptimControl::default()).unwrap();
        let start = ModelParams::new(ctx.ols.coef.clone(), ctx.ols.residual_mean_square.sqrt(), Dof::Finite(2.0)).unwrap();
        assert!(fit.loglik >= t_log_likelihood(&start, &d).unwrap());
        assert!(fit.trace.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs()));
    }

    #[test]
    fn gradient_matches_score() {
        let mut rng = RngStream::new(3, 0).rng();
        let x = Matrix::new(30, 3, sample_normal(90, &mut rng)).unwrap();
        let d = Dataset::new(x, sample_normal(30, &mut rng)).unwrap();
        let obj = BetaLogSigma::new(&d, 0.4);
        let theta = [0.1, -0.2, 0.3, 0.2f64];
        let mut g = [0.0; 4];
        let v = obj.eval(&theta, Some(&mut g));
        let params = ModelParams::new(theta[..3].to_vec(), theta[3].exp(), Dof::Finite(2.5)).unwrap();
        assert!((v - t_log_likelihood(&params, &d).unwrap()).abs() < 1e-12);
        let score = crate::likelihood::score_beta_sigma(&params, &d).unwrap();
        for k in 0..3 {
            assert!((g[k] - score[k]).abs() < 1e-12);
        }
        assert!((g[3] - score[3] * params.sigma).abs() < 1e-12);
    }

    #[test]
    fn exact_fit_is_degenerate() {
        let x = Matrix::new(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        let d = Dataset::new(x, vec![2.0, 4.0, 6.0]).unwrap();
        let ctx = FitContext::new(&d).unwrap();
        let err = inner_maximize_beta_sigma(&ctx, Dof::Finite(2.0), None, &OptimControl::default()).unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
    }
}
