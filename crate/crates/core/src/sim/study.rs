use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::design::{design_hash, generate_design, DesignMode};
use super::metrics::{nu_metrics, rmse_beta, MarkerPolicy, NuMetrics};
use super::responses::{generate_responses, ErrorSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{fit_huber_in, fit_ols_in, two_stage_in, HuberConfig, HuberTuning, NuMethod};
use crate::likelihood::Dof;
use crate::linalg::Matrix;
use crate::optimizer::{FitContext, OptimControl};
use crate::rng::RngStream;

/// One estimator run in every replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StudyMethod {
    /// Two-stage t fit with `ν` from the given method.
    Nu(NuMethod),
    Ols,
    Huber(HuberTuning),
}

impl StudyMethod {
    pub fn label(&self) -> String {
        match self {
            StudyMethod::Nu(m) => m.label(),
            StudyMethod::Ols => "ols".into(),
            StudyMethod::Huber(HuberTuning::Auto) => "huber:auto".into(),
            StudyMethod::Huber(HuberTuning::Fixed(c)) => format!("huber:{c}"),
        }
    }

    /// Whether this method produces an estimate of `ν`.
    pub fn estimates_nu(&self) -> bool {
        matches!(self, StudyMethod::Nu(m) if !matches!(m, NuMethod::Fixed(_)))
    }
}

impl fmt::Display for StudyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for StudyMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ols" => Ok(StudyMethod::Ols),
            "huber" => Ok(StudyMethod::Huber(HuberConfig::default().tuning)),
            "huber:auto" => Ok(StudyMethod::Huber(HuberTuning::Auto)),
            other => match other.strip_prefix("huber:") {
                Some(v) => match v.parse::<f64>() {
                    Ok(c) if c > 0.0 && c.is_finite() => Ok(StudyMethod::Huber(HuberTuning::Fixed(c))),
                    _ => Err(Error::InvalidSpec { field: "methods".into(), reason: format!("bad huber constant `{v}`") }),
                },
                None => other.parse().map(StudyMethod::Nu).map_err(|e| match e {
                    Error::InvalidSpec { reason, .. } => Error::InvalidSpec { field: "methods".into(), reason },
                    e => e,
                }),
            },
        }
    }
}

impl TryFrom<String> for StudyMethod {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StudyMethod> for String {
    fn from(m: StudyMethod) -> String {
        m.label()
    }
}

/// Starting values of `ω` used inside a study.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaInit {
    /// `1/ν` of the generating distribution; falls back to the control's
    /// starts when the errors are not t.
    Truth,
    /// The starts listed in `control.omega_init`.
    #[default]
    MultiStart,
    Values(Vec<f64>),
}

fn default_true() -> bool {
    true
}

fn default_nu_cap() -> f64 {
    1000.0
}

/// A Monte Carlo study: a fixed design, a response model and the estimators
/// to compare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    #[serde(default)]
    pub name: String,
    pub design: DesignMode,
    pub true_beta: Vec<f64>,
    pub true_sigma: f64,
    pub errors: ErrorSpec,
    pub replications: usize,
    pub master_seed: u64,
    pub methods: Vec<StudyMethod>,
    #[serde(default = "default_true")]
    pub exclude_intercept_in_rmse: bool,
    #[serde(default)]
    pub omega_init: OmegaInit,
    #[serde(default)]
    pub control: OptimControl,
    /// Value substituted for Gaussian-limit estimates in the capped `ν` summary.
    #[serde(default = "default_nu_cap")]
    pub nu_cap: f64,
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &str, reason: String| Err(Error::InvalidSpec { field: field.into(), reason });
        self.design.validate()?;
        self.errors.validate()?;
        self.control.validate()?;
        let (_, p) = self.design.dims();
        if self.true_beta.len() != p {
            return invalid("true_beta", format!("has {} entries, design has p = {p}", self.true_beta.len()));
        }
        if self.true_beta.iter().any(|b| !b.is_finite()) {
            return invalid("true_beta", "entries must be finite".into());
        }
        if !(self.true_sigma > 0.0 && self.true_sigma.is_finite()) {
            return invalid("true_sigma", format!("must be positive, got {}", self.true_sigma));
        }
        if self.replications == 0 {
            return invalid("replications", "must be at least 1".into());
        }
        if self.methods.is_empty() {
            return invalid("methods", "at least one method is required".into());
        }
        if !(self.nu_cap > 0.0) {
            return invalid("nu_cap", format!("must be positive, got {}", self.nu_cap));
        }
        if let OmegaInit::Values(v) = &self.omega_init {
            if v.is_empty() || v.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
                return invalid("omega_init", "values must be finite and >= 0".into());
            }
        }
        Ok(())
    }

    /// Control actually passed to the estimators.
    pub fn effective_control(&self) -> OptimControl {
        match (&self.omega_init, self.errors.true_nu()) {
            (OmegaInit::Truth, Some(nu)) => self.control.with_omega_init(1.0 / nu),
            (OmegaInit::Values(v), _) => OptimControl { omega_init: v.clone(), ..self.control.clone() },
            _ => self.control.clone(),
        }
    }
}

/// How a method fared in one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    /// Estimation error or an optimizer that did not converge.
    Failure,
    /// The flatness condition held for the generated data.
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReplicate {
    pub outcome: Outcome,
    pub beta: Option<Vec<f64>>,
    pub nu: Option<Dof>,
}

/// Summary of one method over all replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub method: String,
    /// Over every replication that produced `β̂`; `None` when undefined.
    pub rmse_beta: Option<f64>,
    pub beta_count: usize,
    /// `ν̂` accuracy with Gaussian-limit estimates replaced by `nu_cap`.
    pub nu: Option<NuMetrics>,
    /// `ν̂` accuracy over finite estimates only.
    pub nu_finite: Option<NuMetrics>,
    pub successes: usize,
    pub failures: usize,
    pub flat: usize,
    pub gaussian_markers: usize,
}

/// Wall-clock details; excluded from result comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub elapsed_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub nu_true: Option<f64>,
    pub replications: usize,
    pub design_hash: u64,
    pub methods: Vec<MethodMetrics>,
    pub metadata: RunMetadata,
}

impl MetricsReport {
    pub fn method(&self, label: &str) -> Option<&MethodMetrics> {
        self.methods.iter().find(|m| m.method == label)
    }
}

/// How replications are scheduled. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon pool of default width. Without the `parallel` feature this and
    /// `Threads` run sequentially.
    #[default]
    Parallel,
    Threads(usize),
}

/// Runs a study with the default execution.
pub fn run_study(spec: &SimulationSpec) -> Result<MetricsReport> {
    run_study_with(spec, Execution::default())
}

/// Raw per-replication results, indexed `[replication][method]`.
pub fn run_replicates(spec: &SimulationSpec, exec: Execution) -> Result<(Matrix, Vec<Vec<MethodReplicate>>, usize)> {
    spec.validate()?;
    let x = generate_design(&spec.design, &RngStream::new(spec.master_seed, u64::MAX))?;
    let ctl = spec.effective_control();
    let run = |r: usize| replicate(spec, &x, &ctl, r);
    let (results, threads) = schedule(spec.replications, exec, run)?;
    Ok((x, results, threads))
}

pub fn run_study_with(spec: &SimulationSpec, exec: Execution) -> Result<MetricsReport> {
    let start = Instant::now();
    let (x, results, threads) = run_replicates(spec, exec)?;
    // only a genuine intercept column is dropped from the β RMSE
    let exclude = spec.exclude_intercept_in_rmse && x.cols() > 1 && x.column(0).iter().all(|&v| v == 1.0);
    let methods = spec
        .methods
        .iter()
        .enumerate()
        .map(|(k, m)| summarize(spec, m, exclude, results.iter().map(|r| &r[k])))
        .collect();
    Ok(MetricsReport {
        name: spec.name.clone(),
        n: x.rows(),
        p: x.cols(),
        nu_true: spec.errors.true_nu(),
        replications: spec.replications,
        design_hash: design_hash(&x),
        methods,
        metadata: RunMetadata { elapsed_seconds: start.elapsed().as_secs_f64(), threads },
    })
}

#[cfg(feature = "parallel")]
fn schedule<T, F>(count: usize, exec: Execution, run: F) -> Result<(Vec<T>, usize)>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    use rayon::prelude::*;
    let width = match exec {
        Execution::Sequential => return Ok(((0..count).map(&run).collect(), 1)),
        Execution::Parallel => None,
        Execution::Threads(t) => Some(t.max(1)),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = width {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidSpec { field: "threads".into(), reason: e.to_string() })?;
    let results = pool.install(|| (0..count).into_par_iter().map(&run).collect());
    Ok((results, pool.current_num_threads()))
}

#[cfg(not(feature = "parallel"))]
fn schedule<T, F>(count: usize, _exec: Execution, run: F) -> Result<(Vec<T>, usize)>
where
    F: Fn(usize) -> T,
{
    Ok(((0..count).map(run).collect(), 1))
}

fn replicate(spec: &SimulationSpec, x: &Matrix, ctl: &OptimControl, r: usize) -> Vec<MethodReplicate> {
    let failed = || vec![MethodReplicate { outcome: Outcome::Failure, beta: None, nu: None }; spec.methods.len()];
    let mut rng = RngStream::new(spec.master_seed, r as u64).rng();
    let Ok(y) = generate_responses(x, &spec.true_beta, spec.true_sigma, &spec.errors, &mut rng) else {
        return failed();
    };
    let Ok(data) = Dataset::new(x.clone(), y) else {
        return failed();
    };
    let Ok(ctx) = FitContext::new(&data) else {
        return failed();
    };
    spec.methods.iter().map(|m| run_method(&ctx, m, ctl)).collect()
}

fn run_method(ctx: &FitContext<'_>, method: &StudyMethod, ctl: &OptimControl) -> MethodReplicate {
    let fit = match method {
        StudyMethod::Nu(nu) => two_stage_in(ctx, *nu, ctl),
        StudyMethod::Ols => Ok(fit_ols_in(ctx)),
        StudyMethod::Huber(tuning) => fit_huber_in(ctx, &HuberConfig { tuning: *tuning, ..Default::default() }),
    };
    let Ok(fit) = fit else {
        return MethodReplicate { outcome: Outcome::Failure, beta: None, nu: None };
    };
    let flat = fit.nu_estimate.as_ref().is_some_and(|e| e.flatness_detected);
    let outcome = if flat && method.estimates_nu() {
        Outcome::Flat
    } else if fit.diagnostics.converged && !fit.diagnostics.degenerate {
        Outcome::Success
    } else {
        Outcome::Failure
    };
    let beta = fit.beta.iter().all(|b| b.is_finite()).then_some(fit.beta);
    let nu = method.estimates_nu().then_some(fit.nu_used);
    MethodReplicate { outcome, beta, nu }
}

fn summarize<'a>(
    spec: &SimulationSpec,
    method: &StudyMethod,
    exclude_intercept: bool,
    reps: impl Iterator<Item = &'a MethodReplicate>,
) -> MethodMetrics {
    let reps: Vec<&MethodReplicate> = reps.collect();
    let count = |o: Outcome| reps.iter().filter(|r| r.outcome == o).count();
    let betas: Vec<Vec<f64>> = reps.iter().filter_map(|r| r.beta.clone()).collect();
    let rmse = if betas.is_empty() {
        None
    } else {
        rmse_beta(&betas, &spec.true_beta, exclude_intercept).ok()
    };
    let nus: Vec<Dof> = reps.iter().filter_map(|r| r.nu).collect();
    let gaussian_markers = nus.iter().filter(|d| d.is_gaussian()).count();
    let (nu, nu_finite) = match spec.errors.true_nu() {
        Some(truth) if method.estimates_nu() => (
            Some(nu_metrics(&nus, truth, MarkerPolicy::Cap(spec.nu_cap))),
            Some(nu_metrics(&nus, truth, MarkerPolicy::Exclude)),
        ),
        _ => (None, None),
    };
    MethodMetrics {
        method: method.label(),
        rmse_beta: rmse,
        beta_count: betas.len(),
        nu,
        nu_finite,
        successes: count(Outcome::Success),
        failures: count(Outcome::Failure),
        flat: count(Outcome::Flat),
        gaussian_markers,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::responses::BaseError;

    fn small_spec() -> SimulationSpec {
        SimulationSpec {
            name: "unit".into(),
            design: DesignMode::GaussianIid { n: 60, p: 2, intercept: true },
            true_beta: vec![1.0, 2.0],
            true_sigma: 1.0,
            errors: ErrorSpec { base: BaseError::StudentT(3.0), contamination: Default::default() },
            replications: 6,
            master_seed: 11,
            methods: ["profile", "fixed:3", "ols", "huber"].iter().map(|s| s.parse().unwrap()).collect(),
            exclude_intercept_in_rmse: true,
            omega_init: OmegaInit::Truth,
            control: OptimControl::default(),
            nu_cap: 1000.0,
        }
    }

    #[test]
    fn method_labels_round_trip() {
        for s in ["profile", "adjusted", "jeffreys", "pseudo", "fixed:2.5", "ols", "huber:auto", "huber:1.5"] {
            assert_eq!(s.parse::<StudyMethod>().unwrap().label(), s);
        }
        assert_eq!("huber".parse::<StudyMethod>().unwrap().label(), "huber:1.345");
        assert!("huber:-1".parse::<StudyMethod>().is_err());
        assert!("lasso".parse::<StudyMethod>().is_err());
    }

    #[test]
    fn tallies_add_up_and_fields_present() {
        let spec = small_spec();
        let report = run_study_with(&spec, Execution::Sequential).unwrap();
        assert_eq!(report.methods.len(), 4);
        for m in &report.methods {
            assert_eq!(m.successes + m.failures + m.flat, spec.replications, "{}", m.method);
            assert!(m.rmse_beta.is_some());
        }
        assert!(report.method("profile").unwrap().nu.is_some());
        assert!(report.method("ols").unwrap().nu.is_none());
    }

    #[test]
    fn single_replication_leaves_se_undefined() {
        let spec = SimulationSpec { replications: 1, ..small_spec() };
        let report = run_study(&spec).unwrap();
        let nu = report.method("profile").unwrap().nu.unwrap();
        assert!(nu.se.is_none());
        assert!(nu.rmse.is_some());
    }

    #[test]
    fn invalid_specs_name_the_field() {
        let bad = SimulationSpec { true_beta: vec![1.0], ..small_spec() };
        match bad.validate() {
            Err(Error::InvalidSpec { field, .. }) => assert_eq!(field, "true_beta"),
            other => panic!("{other:?}"),
        }
        let bad = SimulationSpec { replications: 0, ..small_spec() };
        assert!(run_study(&bad).is_err());
    }

    #[test]
    fn truth_init_uses_generating_nu() {
        assert_eq!(small_spec().effective_control().omega_init, vec![1.0 / 3.0]);
        let normal = SimulationSpec {
            errors: ErrorSpec { base: BaseError::Normal01, contamination: Default::default() },
            ..small_spec()
        };
        assert_eq!(normal.effective_control().omega_init, OptimControl::default().omega_init);
    }
}
