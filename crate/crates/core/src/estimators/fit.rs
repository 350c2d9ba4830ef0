use serde::{Deserialize, Serialize};

use super::{estimate_nu_in, NuEstimationResult, NuMethod};
use crate::data::Dataset;
use crate::error::Result;
use crate::likelihood::{observed_info_from_z, residuals, Dof};
use crate::linalg::Cholesky;
use crate::optimizer::{inner_maximize_beta_sigma, FitContext, InnerFit, OptimControl};

/// Which procedure produced a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FitMethod {
    /// t likelihood at a `ν` chosen by `nu_method`.
    StudentT { nu_method: NuMethod },
    Ols,
    Huber { c: f64 },
}

impl FitMethod {
    pub fn label(&self) -> String {
        match self {
            FitMethod::StudentT { nu_method } => nu_method.label(),
            FitMethod::Ols => "ols".into(),
            FitMethod::Huber { .. } => "huber".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    /// Zero scale or a non-positive-definite information matrix.
    pub degenerate: bool,
    /// Objective value after every accepted step.
    pub trace: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Estimated regression with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: FitMethod,
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub nu_used: Dof,
    /// Maximized log-likelihood; absent for Huber and for exact fits.
    pub loglik: Option<f64>,
    /// Standard errors of `(β, σ)`, present when the information is positive definite.
    pub std_errors: Option<Vec<f64>>,
    pub diagnostics: FitDiagnostics,
    /// The `ν` estimation that fed a two-stage fit.
    pub nu_estimate: Option<NuEstimationResult>,
}

/// Maximizes the t likelihood over `(β, σ)` at fixed `ν` (the Gaussian
/// marker gives OLS `β` with the ML scale). Standard errors come from the
/// inverse observed information.
pub fn fit_t_regression(data: &Dataset, nu: Dof, ctl: &OptimControl) -> Result<FitResult> {
    let ctx = FitContext::new(data)?;
    fit_t_in(&ctx, nu, None, ctl)
}

pub(crate) fn fit_t_in(
    ctx: &FitContext<'_>,
    nu: Dof,
    warm: Option<(&[f64], f64)>,
    ctl: &OptimControl,
) -> Result<FitResult> {
    let fit = inner_maximize_beta_sigma(ctx, nu, warm, ctl)?;
    Ok(t_result(ctx.data, fit, nu, NuMethod::Fixed(nu.nu().unwrap_or(f64::INFINITY))))
}

fn t_result(data: &Dataset, fit: InnerFit, nu: Dof, nu_method: NuMethod) -> FitResult {
    let z: Vec<f64> = residuals(data, &fit.beta).into_iter().map(|r| r / fit.sigma).collect();
    let info = observed_info_from_z(data, &z, fit.sigma, nu.omega());
    let std_errors = Cholesky::new(&info).map(|c| {
        let inv = c.inverse();
        (0..inv.rows()).map(|i| inv[(i, i)].sqrt()).collect::<Vec<_>>()
    });
    let mut warnings = Vec::new();
    if !fit.converged {
        warnings.push(format!("inner fit stopped with gradient norm {:.3e}", fit.gradient_norm));
    }
    if std_errors.is_none() {
        warnings.push("observed information is not positive definite; standard errors omitted".into());
    }
    FitResult {
        method: FitMethod::StudentT { nu_method },
        beta: fit.beta,
        sigma: fit.sigma,
        nu_used: nu,
        loglik: Some(fit.loglik),
        diagnostics: FitDiagnostics {
            iterations: fit.iterations,
            converged: fit.converged,
            gradient_norm: fit.gradient_norm,
            degenerate: std_errors.is_none(),
            trace: fit.trace,
            warnings,
        },
        std_errors,
        nu_estimate: None,
    }
}

/// Estimates `ν`, then maximizes the t likelihood over `(β, σ)` at `ν̂`.
pub fn two_stage_fit(method: NuMethod, data: &Dataset, ctl: &OptimControl) -> Result<FitResult> {
    let ctx = FitContext::new(data)?;
    two_stage_in(&ctx, method, ctl)
}

pub(crate) fn two_stage_in(ctx: &FitContext<'_>, method: NuMethod, ctl: &OptimControl) -> Result<FitResult> {
    let est = estimate_nu_in(ctx, method, ctl)?;
    let fit = inner_maximize_beta_sigma(ctx, est.nu_hat, Some((&est.beta, est.sigma)), ctl)?;
    let mut res = t_result(ctx.data, fit, est.nu_hat, method);
    if est.flatness_detected {
        res.diagnostics.warnings.push(format!(
            "flat likelihood: sum (z^2 - 1)^2 = {:.4} is below 2n; the nu estimate is unreliable",
            est.flatness_statistic
        ));
    }
    if est.nu_hat.is_gaussian() {
        res.diagnostics.warnings.push("nu estimate exceeds the cap; the Gaussian limit is used".into());
    }
    if !est.converged {
        res.diagnostics.warnings.push("nu estimation did not converge".into());
        res.diagnostics.converged = false;
    }
    res.nu_estimate = Some(est);
    Ok(res)
}

/// Ordinary least squares. `sigma` is the residual-mean-square scale and the
/// log-likelihood is the maximized Gaussian one. An exact fit is flagged as
/// degenerate.
pub fn fit_ols(data: &Dataset) -> Result<FitResult> {
    let ctx = FitContext::new(data)?;
    Ok(fit_ols_in(&ctx))
}

pub(crate) fn fit_ols_in(ctx: &FitContext<'_>) -> FitResult {
    let data = ctx.data;
    let (n, p) = (data.n() as f64, data.p());
    let s2 = ctx.ols.residual_mean_square;
    let sigma = s2.sqrt();
    let degenerate = ctx.is_exact_fit();
    let (loglik, std_errors, warnings) = if degenerate {
        (None, None, vec!["exact fit: residual scale is zero".to_string()])
    } else {
        let ml_sigma = ctx.ols_ml_sigma();
        let loglik = -0.5 * n * (2.0 * std::f64::consts::PI * ml_sigma * ml_sigma).ln() - 0.5 * n;
        let mut se: Vec<f64> = (0..p).map(|j| (s2 * ctx.xtx_inv[(j, j)]).sqrt()).collect();
        se.push(sigma / (2.0 * (n - p as f64)).sqrt());
        (Some(loglik), Some(se), Vec::new())
    };
    FitResult {
        method: FitMethod::Ols,
        beta: ctx.ols.coef.clone(),
        sigma,
        nu_used: Dof::Gaussian,
        loglik,
        std_errors,
        diagnostics: FitDiagnostics { converged: true, degenerate, warnings, ..Default::default() },
        nu_estimate: None,
    }
}
