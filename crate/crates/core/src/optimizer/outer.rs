use std::cell::{Cell, RefCell};

use serde::{Deserialize, Serialize};

use super::inner::inner_maximize_with;
use super::{bracket_and_maximize, FitContext, InnerFit, OptimControl};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{NuEstimationResult, NuMethod};
use crate::likelihood::prior::{omega_jeffreys_log_prior, omega_nu_block_log_prior};
use crate::likelihood::profile::log_det_adjustment;
use crate::likelihood::Dof;

/// Initial step of the uphill walk in `ω`.
const BRACKET_STEP: f64 = 0.05;

/// Which function of `ω` the outer search maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// `ℓ_p(ν)`.
    Profile,
    /// `ℓ_p(ν) − ½ log|j_λλ|`.
    AdjustedProfile,
    /// `ℓ_p` times the `ν`-block prior, as a density in `ω`.
    PseudoPosterior,
    /// Joint posterior under the independence-Jeffreys prior, maximized
    /// over `(β, σ)` at each `ω`; its maximizer is the joint mode.
    JointPosterior,
}

impl ObjectiveKind {
    pub fn method(self) -> NuMethod {
        match self {
            ObjectiveKind::Profile => NuMethod::Profile,
            ObjectiveKind::AdjustedProfile => NuMethod::AdjustedProfile,
            ObjectiveKind::PseudoPosterior => NuMethod::PseudoPosteriorMap,
            ObjectiveKind::JointPosterior => NuMethod::JeffreysMap,
        }
    }
}

/// `Σ(ẑᵢ² − 1)²`.
pub fn flatness_statistic(z: &[f64]) -> f64 {
    z.iter().map(|zi| (zi * zi - 1.0).powi(2)).sum()
}

/// Flags data whose profile likelihood keeps increasing towards `ν = ∞`.
///
/// `ẑ` are OLS residuals over the ML scale `√(RSS/n)`; the profile slope at
/// `ω = 0` is `(Σ(ẑ²−1)² − 2n)/4`, so the data are flat when the statistic is
/// below `2n`. Returns `(flat, statistic)`.
pub fn flatness_check(data: &Dataset) -> Result<(bool, f64)> {
    let ctx = FitContext::new(data)?;
    flatness_in(&ctx)
}

pub(crate) fn flatness_in(ctx: &FitContext<'_>) -> Result<(bool, f64)> {
    let sigma = ctx.ols_ml_sigma();
    if !(sigma > 0.0) {
        return Err(Error::Degenerate { nu: f64::INFINITY });
    }
    let z: Vec<f64> = ctx.ols.residuals.iter().map(|r| r / sigma).collect();
    let stat = flatness_statistic(&z);
    Ok((stat < 2.0 * ctx.data.n() as f64, stat))
}

/// One evaluation of the outer objective.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaEvaluation {
    pub omega: f64,
    pub value: f64,
    pub fit: InnerFit,
}

/// The outer objective as a function of `ω`, with warm-started inner fits.
///
/// Remembers the best evaluation seen, so a search never loses the point
/// it reports.
pub struct OmegaObjective<'c, 'd> {
    ctx: &'c FitContext<'d>,
    kind: ObjectiveKind,
    ctl: &'c OptimControl,
    warm: RefCell<Option<(Vec<f64>, f64)>>,
    best: RefCell<Option<OmegaEvaluation>>,
    evaluations: Cell<usize>,
    inner_iterations: Cell<usize>,
}

impl<'c, 'd> OmegaObjective<'c, 'd> {
    pub fn new(ctx: &'c FitContext<'d>, kind: ObjectiveKind, ctl: &'c OptimControl) -> Self {
        Self {
            ctx,
            kind,
            ctl,
            warm: RefCell::new(None),
            best: RefCell::new(None),
            evaluations: Cell::new(0),
            inner_iterations: Cell::new(0),
        }
    }

    /// Evaluates the objective at `ω ≥ 0`; `ω = 0` takes the Gaussian branch.
    pub fn evaluate(&self, omega: f64) -> Result<OmegaEvaluation> {
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::Domain { function: "OmegaObjective::evaluate", value: omega, reason: "omega must be >= 0" });
        }
        self.evaluations.set(self.evaluations.get() + 1);
        let dof = Dof::from_omega(omega);
        let warm = if self.ctl.warm_start { self.warm.borrow().clone() } else { None };
        // the σ factor of the Jeffreys prior is folded into the inner fit
        let sigma_power = if self.kind == ObjectiveKind::JointPosterior { -1.0 } else { 0.0 };
        let mut fit = inner_maximize_with(
            self.ctx,
            dof,
            warm.as_ref().map(|(b, s)| (b.as_slice(), *s)),
            self.ctl,
            sigma_power,
        )?;
        self.inner_iterations.set(self.inner_iterations.get() + fit.iterations);
        if !dof.is_gaussian() {
            *self.warm.borrow_mut() = Some((fit.beta.clone(), fit.sigma));
        }
        let value = match self.kind {
            ObjectiveKind::Profile => fit.loglik,
            ObjectiveKind::AdjustedProfile => {
                let adj = log_det_adjustment(self.ctx.data, &mut fit, omega)?;
                fit.loglik + adj
            }
            ObjectiveKind::PseudoPosterior => fit.loglik + omega_nu_block_log_prior(omega),
            ObjectiveKind::JointPosterior => fit.loglik + omega_jeffreys_log_prior(1.0, omega),
        };
        let eval = OmegaEvaluation { omega, value, fit };
        let mut best = self.best.borrow_mut();
        if best.as_ref().is_none_or(|b| value > b.value) {
            *best = Some(eval.clone());
        }
        Ok(eval)
    }

    /// Objective value, `−∞` outside the domain or at degenerate points.
    pub fn value(&self, omega: f64) -> f64 {
        if omega < 0.0 {
            return f64::NEG_INFINITY;
        }
        self.evaluate(omega).map_or(f64::NEG_INFINITY, |e| e.value)
    }

    pub fn best(&self) -> Option<OmegaEvaluation> {
        self.best.borrow().clone()
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.get()
    }

    pub fn inner_iterations(&self) -> usize {
        self.inner_iterations.get()
    }
}

/// Maximizes the chosen objective over `ω ∈ [0, ω_max]`.
///
/// Each entry of `ctl.omega_init` seeds a bracketed search; the boundary
/// `ω = 0` is always evaluated as a candidate. An `ω̂` at or below
/// `ctl.omega_cap` is reported as the Gaussian limit. Flat data are flagged
/// in the result, not rejected.
pub fn outer_maximize_omega(kind: ObjectiveKind, data: &Dataset, ctl: &OptimControl) -> Result<NuEstimationResult> {
    let ctx = FitContext::new(data)?;
    outer_maximize_in(&ctx, kind, ctl)
}

pub(crate) fn outer_maximize_in(ctx: &FitContext<'_>, kind: ObjectiveKind, ctl: &OptimControl) -> Result<NuEstimationResult> {
    ctl.validate()?;
    let (flat, statistic) = flatness_in(ctx)?;
    let obj = OmegaObjective::new(ctx, kind, ctl);
    obj.evaluate(0.0)?;

    let mut searches_converged = true;
    let mut best_value = f64::NEG_INFINITY;
    for &start in &ctl.omega_init {
        let ls = bracket_and_maximize(|w| obj.value(w), start, 0.0, ctl.omega_max, BRACKET_STEP, ctl.omega_tolerance);
        if ls.value > best_value {
            best_value = ls.value;
            searches_converged = ls.converged;
        }
    }
    let best = obj.best().expect("boundary evaluation succeeded");
    let converged = (best.omega == 0.0 || searches_converged) && best.fit.converged;
    let nu_hat = if best.omega <= ctl.omega_cap { Dof::Gaussian } else { Dof::from_omega(best.omega) };
    Ok(NuEstimationResult {
        method: kind.method(),
        nu_hat,
        omega_hat: best.omega,
        objective_value: best.value,
        converged,
        flatness_detected: flat,
        flatness_statistic: statistic,
        wald_se: None,
        beta: best.fit.beta,
        sigma: best.fit.sigma,
        evaluations: obj.evaluations(),
        inner_iterations: obj.inner_iterations(),
    })
}
