//! Named study configurations.
//!
//! Desk runs use 200 replications; `full` switches to 500.

use super::design::{DesignMode, HYBRID_P};
use super::responses::{BaseError, ContaminationKind, ContaminationSpec, ErrorSpec};
use super::study::{OmegaInit, SimulationSpec, StudyMethod};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{fit_ols, HuberTuning, NuMethod};
use crate::optimizer::OptimControl;

pub const DESK_REPLICATIONS: usize = 200;
pub const FULL_REPLICATIONS: usize = 500;
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Fixed `ν` values compared against the estimated ones.
pub const FIXED_NU_GRID: [f64; 12] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 20.0, 30.0];
/// Dimensions of the `ν`-accuracy tables.
pub const NU_TABLE_P: [usize; 8] = [1, 2, 5, 10, 20, 40, 60, 80];
/// Scale of the stack-loss studies: the residual-mean-square root of the
/// OLS fit to the bundled data.
pub const STACKLOSS_SIGMA: f64 = 3.243_363_9;

const CONTAMINATION: [(&str, ContaminationKind); 4] = [
    ("norm9", ContaminationKind::NormalVar9),
    ("chisq4", ContaminationKind::ChiSq4Centered),
    ("t2", ContaminationKind::T2),
    ("twopoint", ContaminationKind::TwoPoint),
];
const RATES: [u32; 3] = [10, 20, 30];

fn t_errors(nu: f64) -> ErrorSpec {
    ErrorSpec { base: BaseError::StudentT(nu), contamination: ContaminationSpec::default() }
}

fn normal_errors() -> ErrorSpec {
    ErrorSpec { base: BaseError::Normal01, contamination: ContaminationSpec::default() }
}

fn estimated_methods() -> Vec<StudyMethod> {
    NuMethod::ESTIMATED.iter().copied().map(StudyMethod::Nu).collect()
}

/// Estimated `ν` (profile, adjusted, Jeffreys), the fixed grid, OLS and Huber.
fn beta_methods() -> Vec<StudyMethod> {
    let mut m: Vec<StudyMethod> = [NuMethod::Profile, NuMethod::AdjustedProfile, NuMethod::JeffreysMap]
        .into_iter()
        .map(StudyMethod::Nu)
        .collect();
    m.extend(FIXED_NU_GRID.iter().map(|&nu| StudyMethod::Nu(NuMethod::Fixed(nu))));
    m.push(StudyMethod::Ols);
    m.push(StudyMethod::Huber(HuberTuning::Auto));
    m
}

fn stackloss_beta() -> Vec<f64> {
    fit_ols(&Dataset::stackloss()).expect("stack-loss design has full rank").beta
}

fn base(name: &str, design: DesignMode, true_beta: Vec<f64>, errors: ErrorSpec, reps: usize) -> SimulationSpec {
    SimulationSpec {
        name: name.into(),
        design,
        true_beta,
        true_sigma: 1.0,
        errors,
        replications: reps,
        master_seed: DEFAULT_SEED,
        methods: beta_methods(),
        exclude_intercept_in_rmse: true,
        omega_init: OmegaInit::Truth,
        control: OptimControl::default(),
        nu_cap: 1000.0,
    }
}

fn nu_table(name: &str, nu: f64, n: usize, p: usize, reps: usize) -> SimulationSpec {
    SimulationSpec {
        methods: estimated_methods(),
        exclude_intercept_in_rmse: false,
        ..base(name, DesignMode::GaussianIid { n, p, intercept: false }, vec![1.0; p], t_errors(nu), reps)
    }
}

fn parse_suffix<'a>(name: &'a str, prefix: &str) -> Option<&'a str> {
    name.strip_prefix(prefix)
}

fn error_by_tag(tag: &str) -> Option<ErrorSpec> {
    match tag {
        "t2" => Some(t_errors(2.0)),
        "norm" => Some(normal_errors()),
        _ => None,
    }
}

/// Every preset name.
pub fn preset_names() -> Vec<String> {
    let mut names = vec!["smoke".to_string()];
    names.extend(NU_TABLE_P.iter().map(|p| format!("table1-p{p}")));
    for nu in ["nu5", "nu10"] {
        names.extend(NU_TABLE_P.iter().map(|p| format!("supp-{nu}-p{p}")));
    }
    names.extend(["method1-t2", "method1-norm"].map(String::from));
    names.extend(HYBRID_P.iter().map(|p| format!("method2-p{p}")));
    for dims in ["n20-p4", "n500-p4", "n100-p50"] {
        for e in ["t2", "norm"] {
            names.push(format!("method3-{dims}-{e}"));
        }
    }
    for dims in ["n100-p3", "n300-p80"] {
        for (tag, _) in CONTAMINATION {
            for rate in RATES {
                names.push(format!("fig-robust-{dims}-{tag}-{rate}"));
            }
        }
    }
    names
}

/// Builds a named study. `full` selects 500 replications instead of 200
/// (the smoke preset always runs 2).
pub fn preset(name: &str, full: bool) -> Result<SimulationSpec> {
    let reps = if full { FULL_REPLICATIONS } else { DESK_REPLICATIONS };
    let unknown = || Error::InvalidSpec { field: "preset".into(), reason: format!("unknown preset `{name}`") };
    if name == "smoke" {
        return Ok(SimulationSpec {
            methods: ["profile", "adjusted", "fixed:3", "ols", "huber"].iter().map(|s| s.parse().unwrap()).collect(),
            ..base(name, DesignMode::GaussianIid { n: 50, p: 2, intercept: true }, vec![1.0, 2.0], t_errors(3.0), 2)
        });
    }
    if let Some(p) = parse_suffix(name, "table1-p") {
        let p: usize = p.parse().map_err(|_| unknown())?;
        return NU_TABLE_P.contains(&p).then(|| nu_table(name, 2.0, 300, p, reps)).ok_or_else(unknown);
    }
    for (tag, nu, n) in [("supp-nu5-p", 5.0, 2500), ("supp-nu10-p", 10.0, 4500)] {
        if let Some(p) = parse_suffix(name, tag) {
            let p: usize = p.parse().map_err(|_| unknown())?;
            return NU_TABLE_P.contains(&p).then(|| nu_table(name, nu, n, p, reps)).ok_or_else(unknown);
        }
    }
    if let Some(e) = parse_suffix(name, "method1-") {
        let errors = error_by_tag(e).ok_or_else(unknown)?;
        return Ok(SimulationSpec {
            true_sigma: STACKLOSS_SIGMA,
            ..base(name, DesignMode::StacklossOriginal, stackloss_beta(), errors, reps)
        });
    }
    if let Some(p) = parse_suffix(name, "method2-p") {
        let p: usize = p.parse().map_err(|_| unknown())?;
        if !HYBRID_P.contains(&p) {
            return Err(unknown());
        }
        let mut beta = stackloss_beta();
        beta.resize(p, 0.0);
        return Ok(SimulationSpec {
            true_sigma: STACKLOSS_SIGMA,
            ..base(name, DesignMode::StacklossHybrid { p }, beta, t_errors(2.0), reps)
        });
    }
    if let Some(rest) = parse_suffix(name, "method3-") {
        let (dims, e) = rest.rsplit_once('-').ok_or_else(unknown)?;
        let (n, p) = match dims {
            "n20-p4" => (20, 4),
            "n500-p4" => (500, 4),
            "n100-p50" => (100, 50),
            _ => return Err(unknown()),
        };
        let errors = error_by_tag(e).ok_or_else(unknown)?;
        return Ok(base(name, DesignMode::GaussianIid { n, p, intercept: true }, vec![1.0; p], errors, reps));
    }
    if let Some(rest) = parse_suffix(name, "fig-robust-") {
        let mut parts = rest.splitn(3, '-').collect::<Vec<_>>();
        if parts.len() != 3 {
            return Err(unknown());
        }
        let tail = parts.pop().unwrap();
        let dims = parts.join("-");
        let (tag, rate) = tail.rsplit_once('-').ok_or_else(unknown)?;
        let kind = CONTAMINATION.iter().find(|(t, _)| *t == tag).map(|(_, k)| *k).ok_or_else(unknown)?;
        let rate: u32 = rate.parse().map_err(|_| unknown())?;
        if !RATES.contains(&rate) {
            return Err(unknown());
        }
        let (design, beta) = match dims.as_str() {
            "n100-p3" => (DesignMode::GaussianIid { n: 100, p: 3, intercept: true }, vec![1.0, 5.0, 10.0]),
            "n300-p80" => (DesignMode::GaussianIid { n: 300, p: 80, intercept: true }, vec![0.0; 80]),
            _ => return Err(unknown()),
        };
        let errors = ErrorSpec {
            base: BaseError::Normal01,
            contamination: ContaminationSpec { kind, rate: f64::from(rate) / 100.0 },
        };
        return Ok(SimulationSpec { omega_init: OmegaInit::MultiStart, ..base(name, design, beta, errors, reps) });
    }
    Err(unknown())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_preset_builds_and_validates() {
        for name in preset_names() {
            let spec = preset(&name, false).unwrap_or_else(|e| panic!("{name}: {e}"));
            spec.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(spec.name, name);
        }
        assert_eq!(preset_names().len(), 1 + 8 * 3 + 2 + 3 + 6 + 24);
    }

    #[test]
    fn named_examples() {
        let t = preset("table1-p1", false).unwrap();
        assert_eq!(t.design, DesignMode::GaussianIid { n: 300, p: 1, intercept: false });
        assert_eq!(t.errors.true_nu(), Some(2.0));
        assert_eq!(t.replications, 200);
        assert_eq!(preset("table1-p1", true).unwrap().replications, 500);
        let f = preset("fig-robust-n100-p3-norm9-20", false).unwrap();
        assert_eq!(f.errors.contamination, ContaminationSpec { kind: ContaminationKind::NormalVar9, rate: 0.2 });
        assert_eq!(f.true_beta, vec![1.0, 5.0, 10.0]);
        let m2 = preset("method2-p80", false).unwrap();
        assert_eq!(m2.true_beta.len(), 80);
        assert!(m2.true_beta[4..].iter().all(|&b| b == 0.0));
        assert_eq!(preset("smoke", true).unwrap().replications, 2);
        for bad in ["table1-p3", "method2-p50", "fig-robust-n100-p3-norm9-15", "nope"] {
            assert!(preset(bad, false).is_err(), "{bad}");
        }
    }
}
