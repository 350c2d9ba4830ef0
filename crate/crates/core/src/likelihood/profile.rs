//! Profile, adjusted profile and profile information for `ν`.

use serde::{Deserialize, Serialize};

use super::{
    nu_second_derivatives, observed_info_beta_sigma, observed_info_from_z, residuals, score_beta_sigma, t_log_likelihood,
    Dof, ModelParams,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky};
use crate::optimizer::{inner_maximize_beta_sigma, FitContext, InnerFit, OptimControl};

/// `ℓ_p(ν)` with the constrained maximizer that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub value: f64,
    pub beta: Vec<f64>,
    pub sigma: f64,
}

fn converged_fit(ctx: &FitContext<'_>, dof: Dof, ctl: &OptimControl) -> Result<InnerFit> {
    let fit = inner_maximize_beta_sigma(ctx, dof, None, ctl)?;
    if !fit.converged {
        return Err(Error::NonConvergence { iterations: fit.iterations, gradient_norm: fit.gradient_norm });
    }
    Ok(fit)
}

/// `ℓ(β̂_ν, σ̂_ν, ν)`; an inner fit that fails to converge is an error.
pub fn profile_log_lik(dof: Dof, data: &Dataset, ctl: &OptimControl) -> Result<ProfilePoint> {
    let ctx = FitContext::new(data)?;
    let fit = converged_fit(&ctx, dof, ctl)?;
    Ok(ProfilePoint { value: fit.loglik, beta: fit.beta, sigma: fit.sigma })
}

/// Newton steps on `(β, σ)` with the analytic information. The log-det term
/// is not stationary at the inner optimum, so quasi-Newton slack would leak
/// into it at first order.
fn newton_polish(data: &Dataset, fit: &mut InnerFit, omega: f64) {
    let p = data.p();
    let dof = Dof::from_omega(omega);
    for _ in 0..4 {
        let Ok(params) = ModelParams::new(fit.beta.clone(), fit.sigma, dof) else { return };
        let (Ok(g), Ok(j)) = (score_beta_sigma(&params, data), observed_info_beta_sigma(&params, data)) else { return };
        let Some(chol) = Cholesky::new(&j) else { return };
        let step = chol.solve(&g);
        let sigma = fit.sigma + step[p];
        if !(sigma > 0.0) {
            return;
        }
        let beta: Vec<f64> = fit.beta.iter().zip(&step).map(|(b, s)| b + s).collect();
        let Ok(ll) = ModelParams::new(beta.clone(), sigma, dof).and_then(|m| t_log_likelihood(&m, data)) else { return };
        if !(ll >= fit.loglik - 1e-12 * fit.loglik.abs()) {
            return;
        }
        let small = step.iter().all(|s| s.abs() <= 1e-15 * (1.0 + s.abs()));
        fit.beta = beta;
        fit.sigma = sigma;
        fit.loglik = ll;
        if small {
            return;
        }
    }
}

/// `−½ log|j_λλ|` at a constrained fit, from a Cholesky factorization, after
/// polishing the fit in place. A non-positive-definite information is
/// reported as a degeneracy at `ν`.
pub(crate) fn log_det_adjustment(data: &Dataset, fit: &mut InnerFit, omega: f64) -> Result<f64> {
    if omega > 0.0 {
        newton_polish(data, fit, omega);
    }
    let z: Vec<f64> = residuals(data, &fit.beta).into_iter().map(|r| r / fit.sigma).collect();
    let j = observed_info_from_z(data, &z, fit.sigma, omega);
    let chol = Cholesky::new(&j).ok_or(Error::Degenerate { nu: Dof::from_omega(omega).nu().unwrap_or(f64::INFINITY) })?;
    Ok(-0.5 * chol.log_det())
}

/// `ℓ_p(ν) − ½ log|j_λλ(ν, λ̂_ν)|`.
pub fn adjusted_profile_log_lik(dof: Dof, data: &Dataset, ctl: &OptimControl) -> Result<f64> {
    let ctx = FitContext::new(data)?;
    let mut fit = converged_fit(&ctx, dof, ctl)?;
    let adj = log_det_adjustment(data, &mut fit, dof.omega())?;
    Ok(fit.loglik + adj)
}

/// `j_p(ν) = −ℓ_νν − ℓ_νλ j_λλ⁻¹ ℓ_λν` at a constrained fit.
pub(crate) fn profile_info_at(data: &Dataset, beta: &[f64], sigma: f64, nu: f64) -> Result<f64> {
    let z: Vec<f64> = residuals(data, beta).into_iter().map(|r| r / sigma).collect();
    let j = observed_info_from_z(data, &z, sigma, 1.0 / nu);
    let chol = Cholesky::new(&j).ok_or(Error::Degenerate { nu })?;
    let (l_nn, l_nl) = nu_second_derivatives(data, &z, sigma, nu);
    let info = -l_nn - dot(&l_nl, &chol.solve(&l_nl));
    if info > 0.0 && info.is_finite() {
        Ok(info)
    } else {
        Err(Error::Degenerate { nu })
    }
}

/// Observed profile information for `ν`; `1/√j_p(ν̂)` is the Wald standard
/// error of `ν̂`. A non-positive value signals a flat profile.
pub fn profile_info_nu(nu: f64, data: &Dataset, ctl: &OptimControl) -> Result<f64> {
    let dof = Dof::new(nu)?;
    let Some(nu) = dof.nu() else {
        return Err(Error::Domain { function: "profile_info_nu", value: nu, reason: "requires finite nu" });
    };
    let ctx = FitContext::new(data)?;
    let fit = converged_fit(&ctx, dof, ctl)?;
    profile_info_at(data, &fit.beta, fit.sigma, nu)
}
