//! Reference-type priors for the degrees of freedom.
//!
//! Both brackets are differences of trigammas that cancel to `O(ν⁻⁴)`, so
//! for large `ν` they are evaluated from their expansions in `ω = 1/ν`.
//! The `omega_*` variants are the densities after the change of variable
//! `π(ω) = p(1/ω)/ω²`, which stay finite at `ω = 0`.

use crate::error::{Error, Result};
use crate::special::psi1;

/// Below this `ω` the series expansions are used.
const SERIES_OMEGA: f64 = 0.01;

/// Coefficients of `B(1/ω)/ω⁴` in powers of `ω`.
const NU_BLOCK_SERIES: [f64; 12] = [
    14.0, -52.0, 158.0, -476.0, 1454.0, -4404.0, 13118.0, -39052.0, 118_094.0, -358_436.0, 1_062_878.0, -3_112_188.0,
];
const JEFFREYS_SERIES: [f64; 12] = [6.0, -12.0, 14.0, -12.0, 22.0, -60.0, 30.0, 276.0, 38.0, -4188.0, 46.0, 76404.0];

fn horner(coefs: &[f64], w: f64) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, c| acc * w + c)
}

/// `ψ′(ν/2) − ψ′((ν+1)/2) − 2(ν+5)/(ν(ν+1)(ν+3))`, the `νν` information per
/// observation times four.
pub(crate) fn nu_block_bracket(nu: f64) -> f64 {
    if 1.0 / nu < SERIES_OMEGA {
        let w = 1.0 / nu;
        horner(&NU_BLOCK_SERIES, w) * w.powi(4)
    } else {
        psi1(nu / 2.0) - psi1((nu + 1.0) / 2.0) - 2.0 * (nu + 5.0) / (nu * (nu + 1.0) * (nu + 3.0))
    }
}

/// `ψ′(ν/2) − ψ′((ν+1)/2) − 2(ν+3)/(ν(ν+1)²)`, from the determinant of the
/// `(σ, ν)` information block.
pub(crate) fn jeffreys_bracket(nu: f64) -> f64 {
    if 1.0 / nu < SERIES_OMEGA {
        let w = 1.0 / nu;
        horner(&JEFFREYS_SERIES, w) * w.powi(4)
    } else {
        psi1(nu / 2.0) - psi1((nu + 1.0) / 2.0) - 2.0 * (nu + 3.0) / (nu * (nu + 1.0) * (nu + 1.0))
    }
}

fn scaled(bracket: fn(f64) -> f64, series: &[f64], omega: f64) -> f64 {
    if omega < SERIES_OMEGA {
        horner(series, omega)
    } else {
        let nu = 1.0 / omega;
        bracket(nu) * nu.powi(4)
    }
}

fn check_positive(function: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { function, value: v, reason: "expected a finite positive real" })
    }
}

/// Log of the independence-Jeffreys prior for `(σ, ν)`, up to a constant;
/// the flat prior on `β` contributes nothing.
pub fn jeffreys_independence_log_prior(sigma: f64, nu: f64) -> Result<f64> {
    check_positive("jeffreys_independence_log_prior", sigma)?;
    check_positive("jeffreys_independence_log_prior", nu)?;
    let b = jeffreys_bracket(nu);
    if !(b > 0.0) {
        return Err(Error::Domain { function: "jeffreys_independence_log_prior", value: nu, reason: "non-positive bracket" });
    }
    Ok(-sigma.ln() + 0.5 * (nu / (nu + 3.0)).ln() + 0.5 * b.ln())
}

/// Log of the `I_νν^{1/2}` prior for `ν`, up to a constant.
pub fn nu_block_log_prior(nu: f64) -> Result<f64> {
    check_positive("nu_block_log_prior", nu)?;
    let b = nu_block_bracket(nu);
    if !(b > 0.0) {
        return Err(Error::Domain { function: "nu_block_log_prior", value: nu, reason: "non-positive bracket" });
    }
    Ok(0.5 * b.ln())
}

/// `ν`-block prior as a density in `ω`: `nu_block_log_prior(1/ω) − 2 ln ω`.
/// Equals `½ ln 14` at `ω = 0`.
pub fn omega_nu_block_log_prior(omega: f64) -> f64 {
    0.5 * scaled(nu_block_bracket, &NU_BLOCK_SERIES, omega).ln()
}

/// Independence-Jeffreys prior as a density in `(σ, ω)`.
/// Equals `−ln σ + ½ ln 6` at `ω = 0`.
pub fn omega_jeffreys_log_prior(sigma: f64, omega: f64) -> f64 {
    -sigma.ln() - 0.5 * (3.0 * omega).ln_1p() + 0.5 * scaled(jeffreys_bracket, &JEFFREYS_SERIES, omega).ln()
}
