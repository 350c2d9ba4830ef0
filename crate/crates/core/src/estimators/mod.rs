//! Degrees-of-freedom estimators, the two-stage t fit and the OLS/Huber
//! baselines.

mod fit;
mod huber;
mod jeffreys;

pub use fit::{fit_ols, fit_t_regression, two_stage_fit, FitDiagnostics, FitMethod, FitResult};
pub use huber::{fit_huber, huber_rho, HuberConfig, HuberTuning};
pub use jeffreys::jeffreys_map;

pub(crate) use fit::{fit_ols_in, two_stage_in};
pub(crate) use huber::fit_huber_in;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::profile::profile_info_at;
use crate::likelihood::Dof;
use crate::optimizer::{inner_maximize_beta_sigma, outer_maximize_in, FitContext, ObjectiveKind, OptimControl};

/// How `ν` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuMethod {
    Profile,
    AdjustedProfile,
    JeffreysMap,
    PseudoPosteriorMap,
    /// A known `ν`; nothing is estimated.
    Fixed(f64),
}

impl NuMethod {
    /// The four data-driven estimators.
    pub const ESTIMATED: [NuMethod; 4] =
        [NuMethod::Profile, NuMethod::AdjustedProfile, NuMethod::JeffreysMap, NuMethod::PseudoPosteriorMap];

    /// Short name used on the command line and in tables.
    pub fn label(&self) -> String {
        match self {
            NuMethod::Profile => "profile".into(),
            NuMethod::AdjustedProfile => "adjusted".into(),
            NuMethod::JeffreysMap => "jeffreys".into(),
            NuMethod::PseudoPosteriorMap => "pseudo".into(),
            NuMethod::Fixed(nu) => format!("fixed:{nu}"),
        }
    }
}

impl fmt::Display for NuMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for NuMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidSpec { field: "method".into(), reason };
        match s {
            "profile" => Ok(NuMethod::Profile),
            "adjusted" => Ok(NuMethod::AdjustedProfile),
            "jeffreys" => Ok(NuMethod::JeffreysMap),
            "pseudo" => Ok(NuMethod::PseudoPosteriorMap),
            other => match other.strip_prefix("fixed:") {
                Some(v) => {
                    let nu: f64 = v.parse().map_err(|_| invalid(format!("cannot parse `{v}` as nu")))?;
                    if nu > 0.0 && nu.is_finite() {
                        Ok(NuMethod::Fixed(nu))
                    } else {
                        Err(invalid(format!("fixed nu must be positive, got {nu}")))
                    }
                }
                None => Err(invalid(format!("unknown method `{other}`"))),
            },
        }
    }
}

/// Outcome of a degrees-of-freedom estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuEstimationResult {
    pub method: NuMethod,
    pub nu_hat: Dof,
    /// Maximizing `ω`; may be positive but below the cap when `nu_hat` is
    /// the Gaussian marker.
    pub omega_hat: f64,
    pub objective_value: f64,
    pub converged: bool,
    pub flatness_detected: bool,
    pub flatness_statistic: f64,
    /// `1/√j_p(ν̂)` when `ν̂` is finite and the profile information is positive.
    pub wald_se: Option<f64>,
    /// Nuisance estimates at `ω̂` (joint mode for the Jeffreys method).
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub evaluations: usize,
    pub inner_iterations: usize,
}

/// Estimates `ν` by the chosen method. Convergence failures and flat data
/// are reported in the result; only invalid input is an error.
pub fn estimate_nu(method: NuMethod, data: &Dataset, ctl: &OptimControl) -> Result<NuEstimationResult> {
    let ctx = FitContext::new(data)?;
    estimate_nu_in(&ctx, method, ctl)
}

pub(crate) fn estimate_nu_in(ctx: &FitContext<'_>, method: NuMethod, ctl: &OptimControl) -> Result<NuEstimationResult> {
    let mut res = match method {
        NuMethod::Profile => outer_maximize_in(ctx, ObjectiveKind::Profile, ctl)?,
        NuMethod::AdjustedProfile => outer_maximize_in(ctx, ObjectiveKind::AdjustedProfile, ctl)?,
        NuMethod::PseudoPosteriorMap => outer_maximize_in(ctx, ObjectiveKind::PseudoPosterior, ctl)?,
        NuMethod::JeffreysMap => jeffreys::jeffreys_map_in(ctx, ctl)?,
        NuMethod::Fixed(nu) => return fixed(ctx, nu, ctl),
    };
    res.wald_se = wald_se(ctx, &res, ctl);
    Ok(res)
}

fn fixed(ctx: &FitContext<'_>, nu: f64, ctl: &OptimControl) -> Result<NuEstimationResult> {
    let dof = Dof::new(nu)?;
    let (flat, statistic) = crate::optimizer::flatness_in(ctx)?;
    let fit = inner_maximize_beta_sigma(ctx, dof, None, ctl)?;
    Ok(NuEstimationResult {
        method: NuMethod::Fixed(nu),
        nu_hat: dof,
        omega_hat: dof.omega(),
        objective_value: fit.loglik,
        converged: fit.converged,
        flatness_detected: flat,
        flatness_statistic: statistic,
        wald_se: None,
        beta: fit.beta,
        sigma: fit.sigma,
        evaluations: 1,
        inner_iterations: fit.iterations,
    })
}

fn wald_se(ctx: &FitContext<'_>, res: &NuEstimationResult, ctl: &OptimControl) -> Option<f64> {
    let nu = res.nu_hat.nu()?;
    let fit = inner_maximize_beta_sigma(ctx, res.nu_hat, Some((&res.beta, res.sigma)), ctl).ok()?;
    let info = profile_info_at(ctx.data, &fit.beta, fit.sigma, nu).ok()?;
    Some(1.0 / info.sqrt())
}
