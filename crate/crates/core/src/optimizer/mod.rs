//! Maximization machinery: a BFGS quasi-Newton ascent for the nuisance
//! parameters, a bracketed one-dimensional search over `ω = 1/ν`, and the
//! flatness diagnostic that flags likelihoods increasing without bound in `ν`.

mod bfgs;
mod brent;
mod inner;
mod outer;

pub use bfgs::{quasi_newton_maximize, QuasiNewtonOptions};
pub use brent::{bracket_and_maximize, LineSearch1d};
pub use inner::{inner_maximize_beta_sigma, FitContext, InnerFit};
pub use outer::{
    flatness_check, flatness_statistic, outer_maximize_omega, ObjectiveKind, OmegaEvaluation, OmegaObjective,
};

pub(crate) use outer::{flatness_in, outer_maximize_in};

use serde::{Deserialize, Serialize};

/// Tolerances and starting values for the nested optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimControl {
    /// Convergence threshold on the Euclidean norm of the gradient.
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    /// Relative step for central-difference gradients.
    pub fd_step: f64,
    /// Starting values for `ω`; every entry is tried and the best kept.
    pub omega_init: Vec<f64>,
    /// `ω̂` at or below this is reported as the Gaussian limit.
    pub omega_cap: f64,
    /// Upper end of the `ω` search interval.
    pub omega_max: f64,
    /// Absolute tolerance of the one-dimensional `ω` search.
    pub omega_tolerance: f64,
    /// Start each inner fit from the previous `ω` evaluation's solution.
    pub warm_start: bool,
}

impl Default for OptimControl {
    fn default() -> Self {
        Self {
            gradient_tolerance: 1e-6,
            max_iterations: 200,
            fd_step: 1e-6,
            omega_init: vec![0.5, 0.2, 0.1],
            omega_cap: 1e-3,
            omega_max: 1.5,
            omega_tolerance: 1e-7,
            warm_start: true,
        }
    }
}

impl OptimControl {
    /// Same control with a single `ω` starting value.
    pub fn with_omega_init(&self, omega: f64) -> Self {
        Self { omega_init: vec![omega], ..self.clone() }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let positive = [
            ("gradient_tolerance", self.gradient_tolerance),
            ("fd_step", self.fd_step),
            ("omega_cap", self.omega_cap),
            ("omega_max", self.omega_max),
            ("omega_tolerance", self.omega_tolerance),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(crate::Error::InvalidSpec { field: field.into(), reason: format!("must be positive, got {v}") });
            }
        }
        if self.max_iterations == 0 {
            return Err(crate::Error::InvalidSpec { field: "max_iterations".into(), reason: "must be positive".into() });
        }
        if self.omega_init.is_empty() || self.omega_init.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(crate::Error::InvalidSpec {
                field: "omega_init".into(),
                reason: "needs at least one finite value >= 0".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
    NonFiniteStart,
}

/// Outcome of a quasi-Newton run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub termination: Termination,
    /// Objective value after every accepted step, starting point first.
    pub trace: Vec<f64>,
}

/// A function to maximize.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;

    /// Writes the gradient into `grad` and returns the value, or `None` when
    /// no analytic gradient exists (central differences are used instead).
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let _ = (x, grad);
        None
    }
}

/// Adapts a closure without an analytic gradient.
pub struct FnObjective<F>(pub F);

impl<F: Fn(&[f64]) -> f64> Objective for FnObjective<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

/// Central differences with step `h·max(1, |xᵢ|)`; falls back to a one-sided
/// difference when a neighbour is outside the objective's domain.
pub(crate) fn fd_gradient<O: Objective + ?Sized>(obj: &O, x: &[f64], f0: f64, h: f64, grad: &mut [f64]) {
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let step = h * x[i].abs().max(1.0);
        probe[i] = x[i] + step;
        let up = obj.value(&probe);
        probe[i] = x[i] - step;
        let down = obj.value(&probe);
        probe[i] = x[i];
        grad[i] = match (up.is_finite(), down.is_finite()) {
            (true, true) => (up - down) / (2.0 * step),
            (true, false) => (up - f0) / step,
            (false, true) => (f0 - down) / step,
            (false, false) => 0.0,
        };
    }
}
