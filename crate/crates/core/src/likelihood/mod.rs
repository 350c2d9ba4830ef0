//! Student-t regression likelihood and its derivatives.
//!
//! Everything is evaluated in terms of `ω = 1/ν` so that `ω = 0` is the
//! Gaussian model itself rather than a limit reached through huge floats.
//! Writing `u = (1+ω)/(1+ωz²)` (which is `(ν+1)/(ν+z²)`), the per-observation
//! kernel is `−(1+ω)/(2ω) · ln(1 + ωz²)`, tending to `−z²/2`.

pub mod prior;
pub mod profile;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::special::{ln_gamma_half_excess, psi1};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Degrees of freedom: a finite `ν > 0` or the Gaussian limit (`ω = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dof {
    Finite(f64),
    Gaussian,
}

impl Dof {
    pub fn new(nu: f64) -> Result<Self> {
        if nu > 0.0 && nu.is_finite() {
            Ok(Dof::Finite(nu))
        } else if nu == f64::INFINITY {
            Ok(Dof::Gaussian)
        } else {
            Err(Error::Domain { function: "Dof::new", value: nu, reason: "nu must be positive" })
        }
    }

    pub fn from_omega(omega: f64) -> Self {
        if omega <= 0.0 {
            Dof::Gaussian
        } else {
            Dof::Finite(1.0 / omega)
        }
    }

    pub fn omega(&self) -> f64 {
        match *self {
            Dof::Finite(nu) => 1.0 / nu,
            Dof::Gaussian => 0.0,
        }
    }

    pub fn nu(&self) -> Option<f64> {
        match *self {
            Dof::Finite(nu) => Some(nu),
            Dof::Gaussian => None,
        }
    }

    /// `ν`, with the Gaussian limit replaced by `cap`.
    pub fn capped(&self, cap: f64) -> f64 {
        self.nu().map_or(cap, |nu| nu.min(cap))
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, Dof::Gaussian)
    }
}

impl std::fmt::Display for Dof {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dof::Finite(nu) => write!(f, "{nu}"),
            Dof::Gaussian => f.write_str("gaussian"),
        }
    }
}

/// `(β, σ, ν)`; the nuisance part `(β, σ)` is what profiling removes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub dof: Dof,
}

impl ModelParams {
    pub fn new(beta: Vec<f64>, sigma: f64, dof: Dof) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain { function: "ModelParams::new", value: sigma, reason: "sigma must be positive" });
        }
        if let Some(k) = beta.iter().position(|b| !b.is_finite()) {
            return Err(Error::Domain { function: "ModelParams::new", value: beta[k], reason: "beta must be finite" });
        }
        Ok(Self { beta, sigma, dof })
    }

    fn check(&self, data: &Dataset) -> Result<()> {
        if self.beta.len() != data.p() {
            return Err(Error::Dimension(format!("beta has {} entries, design has {} columns", self.beta.len(), data.p())));
        }
        Ok(())
    }
}

/// Raw residuals `r = y − Xβ` and their standardized form `z = r/σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedResiduals {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
}

impl StandardizedResiduals {
    pub fn new(data: &Dataset, beta: &[f64], sigma: f64) -> Self {
        let r = residuals(data, beta);
        let z = r.iter().map(|ri| ri / sigma).collect();
        Self { r, z }
    }
}

pub(crate) fn residuals(data: &Dataset, beta: &[f64]) -> Vec<f64> {
    let x = data.x();
    data.y().iter().enumerate().map(|(i, yi)| yi - crate::linalg::dot(x.row(i), beta)).collect()
}

/// Per-observation log normalizing constant `ln Γ((ν+1)/2) − ln Γ(ν/2) − ½ ln(πν)`.
pub(crate) fn log_norm_const(omega: f64) -> f64 {
    if omega == 0.0 {
        -HALF_LN_2PI
    } else {
        ln_gamma_half_excess(0.5 / omega) - HALF_LN_2PI
    }
}

/// `−(ν+1)/2 · ln(1 + z²/ν)` written in `ω`.
#[inline]
pub(crate) fn kernel(z2: f64, omega: f64) -> f64 {
    if omega == 0.0 {
        -0.5 * z2
    } else {
        -(1.0 + omega) / (2.0 * omega) * (omega * z2).ln_1p()
    }
}

/// Log-likelihood from precomputed standardized residuals.
#[cfg(test)]
pub(crate) fn loglik_from_z(z: &[f64], sigma: f64, omega: f64) -> f64 {
    let n = z.len() as f64;
    let kern: f64 = z.iter().map(|zi| kernel(zi * zi, omega)).sum();
    n * (log_norm_const(omega) - sigma.ln()) + kern
}

/// Student-t regression log-likelihood. The Gaussian marker evaluates the
/// normal model.
pub fn t_log_likelihood(params: &ModelParams, data: &Dataset) -> Result<f64> {
    params.check(data)?;
    let omega = params.dof.omega();
    let res = StandardizedResiduals::new(data, &params.beta, params.sigma);
    let mut kern = 0.0;
    for (index, zi) in res.z.iter().enumerate() {
        let k = kernel(zi * zi, omega);
        if !k.is_finite() {
            return Err(Error::NumericOverflow { index });
        }
        kern += k;
    }
    let n = data.n() as f64;
    Ok(n * (log_norm_const(omega) - params.sigma.ln()) + kern)
}

/// `−(n/2) ln(2πσ²) − RSS/(2σ²)`.
pub fn gaussian_log_likelihood(beta: &[f64], sigma: f64, data: &Dataset) -> Result<f64> {
    let params = ModelParams::new(beta.to_vec(), sigma, Dof::Gaussian)?;
    t_log_likelihood(&params, data)
}

/// Gradient of the log-likelihood in `(β, σ)`.
pub fn score_beta_sigma(params: &ModelParams, data: &Dataset) -> Result<Vec<f64>> {
    params.check(data)?;
    let omega = params.dof.omega();
    let sigma = params.sigma;
    let res = StandardizedResiduals::new(data, &params.beta, sigma);
    let p = data.p();
    let mut score = vec![0.0; p + 1];
    let mut s_sigma = -(data.n() as f64);
    for (i, &z) in res.z.iter().enumerate() {
        let u = (1.0 + omega) / (1.0 + omega * z * z);
        crate::linalg::axpy(u * z / sigma, data.x().row(i), &mut score[..p]);
        s_sigma += u * z * z;
    }
    score[p] = s_sigma / sigma;
    Ok(score)
}

/// Observed information `−∂²ℓ/∂λ∂λᵀ` for the nuisance block `λ = (β, σ)`.
pub fn observed_info_beta_sigma(params: &ModelParams, data: &Dataset) -> Result<Matrix> {
    params.check(data)?;
    let res = StandardizedResiduals::new(data, &params.beta, params.sigma);
    Ok(observed_info_from_z(data, &res.z, params.sigma, params.dof.omega()))
}

pub(crate) fn observed_info_from_z(data: &Dataset, z: &[f64], sigma: f64, omega: f64) -> Matrix {
    let p = data.p();
    let s2 = sigma * sigma;
    let a = 1.0 + omega;
    let mut w11 = Vec::with_capacity(z.len());
    let mut j12 = vec![0.0; p];
    let mut j22 = -(z.len() as f64);
    for (i, &zi) in z.iter().enumerate() {
        let z2 = zi * zi;
        let d = 1.0 + omega * z2;
        let d2 = d * d;
        w11.push(a * (1.0 - omega * z2) / d2);
        crate::linalg::axpy(2.0 * a * zi / d2, data.x().row(i), &mut j12);
        j22 += a * z2 / d + 2.0 * a * z2 / d2;
    }
    let g = data.x().weighted_gram(Some(&w11));
    let mut info = Matrix::zeros(p + 1, p + 1);
    for r in 0..p {
        for c in 0..p {
            info[(r, c)] = g[(r, c)] / s2;
        }
        info[(r, p)] = j12[r] / s2;
        info[(p, r)] = j12[r] / s2;
    }
    info[(p, p)] = j22 / s2;
    info
}

/// Expected Fisher information for `(β, σ, ν)`, a `(p+2) × (p+2)` matrix
/// whose `β`–`σ` and `β`–`ν` blocks vanish.
pub fn expected_fisher_info(params: &ModelParams, data: &Dataset) -> Result<Matrix> {
    params.check(data)?;
    let nu = params.dof.nu().ok_or(Error::Domain {
        function: "expected_fisher_info",
        value: f64::INFINITY,
        reason: "requires finite nu",
    })?;
    let (n, p) = (data.n() as f64, data.p());
    let sigma = params.sigma;
    let xtx = data.x().weighted_gram(None);
    let mut info = Matrix::zeros(p + 2, p + 2);
    let beta_scale = (nu + 1.0) / (nu + 3.0) / (sigma * sigma);
    for r in 0..p {
        for c in 0..p {
            info[(r, c)] = beta_scale * xtx[(r, c)];
        }
    }
    info[(p, p)] = 2.0 * n / (sigma * sigma) * nu / (nu + 3.0);
    let cross = -2.0 * n / sigma / ((nu + 1.0) * (nu + 3.0));
    info[(p, p + 1)] = cross;
    info[(p + 1, p)] = cross;
    info[(p + 1, p + 1)] = n / 4.0 * prior::nu_block_bracket(nu);
    Ok(info)
}

/// Second derivatives involving `ν` at `(β, σ, ν)`: returns `(ℓ_νν, ℓ_νλ)`
/// with `ℓ_νλ = (∂²ℓ/∂ν∂β, ∂²ℓ/∂ν∂σ)`.
pub(crate) fn nu_second_derivatives(data: &Dataset, z: &[f64], sigma: f64, nu: f64) -> (f64, Vec<f64>) {
    let p = data.p();
    let n = z.len() as f64;
    let mut l_nn = n / 4.0 * (psi1((nu + 1.0) / 2.0) - psi1(nu / 2.0));
    let mut l_nl = vec![0.0; p + 1];
    for (i, &zi) in z.iter().enumerate() {
        let z2 = zi * zi;
        let d = nu + z2;
        l_nn += 0.5 * (z2 / (nu * d) - (z2 - 1.0) / (d * d));
        let c = (z2 - 1.0) / (sigma * d * d);
        crate::linalg::axpy(zi * c, data.x().row(i), &mut l_nl[..p]);
        l_nl[p] += z2 * c;
    }
    (l_nn, l_nl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_normal, RngStream};
    use std::f64::consts::PI;

    #[test]
    fn cauchy_density_at_mode() {
        // a Dataset needs n >= p + 1, so single observations go through loglik_from_z
        let d = Dataset::new(Matrix::new(2, 1, vec![1.0, 1.0]).unwrap(), vec![0.0, 0.0]).unwrap();
        let ll = loglik_from_z(&[0.0], 1.0, 1.0);
        assert!((ll + PI.ln()).abs() < 1e-14);
        let ll2 = loglik_from_z(&[0.0], 2.0, 1.0);
        assert!((ll2 + PI.ln() + 2f64.ln()).abs() < 1e-14);
        let params = ModelParams::new(vec![0.0], 1.0, Dof::Finite(1.0)).unwrap();
        assert!((t_log_likelihood(&params, &d).unwrap() + 2.0 * PI.ln()).abs() < 1e-13);
    }

    #[test]
    fn gaussian_reference_values() {
        assert!((loglik_from_z(&[0.0], 1.0, 0.0) + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        let d = Dataset::new(Matrix::new(3, 1, vec![0.0, 0.0, 1.0]).unwrap(), vec![1.0, -1.0, 0.0]).unwrap();
        // third point has zero residual at beta = 0; remove its contribution
        let ll = gaussian_log_likelihood(&[0.0], 1.0, &d).unwrap() + 0.5 * (2.0 * PI).ln();
        assert!((ll - (-(2.0 * PI).ln() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn tiny_dataset_matches_density_sum() {
        let x = Matrix::new(5, 1, vec![0.5, -1.2, 2.0, 0.3, -0.7]).unwrap();
        let d = Dataset::new(x, vec![0.9, -0.1, 1.4, -2.5, 0.2]).unwrap();
        let params = ModelParams::new(vec![0.3], 1.2, Dof::Finite(3.0)).unwrap();
        // 50-digit per-point density summation
        let expected = -8.418_941_040_768_038_834_1;
        assert!((t_log_likelihood(&params, &d).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn gaussian_limit_of_t() {
        let mut rng = RngStream::new(21, 0).rng();
        let x = Matrix::new(20, 2, sample_normal(40, &mut rng)).unwrap();
        let d = Dataset::new(x, sample_normal(20, &mut rng)).unwrap();
        let beta = vec![0.2, -0.1];
        let t = t_log_likelihood(&ModelParams::new(beta.clone(), 1.1, Dof::Finite(1e6)).unwrap(), &d).unwrap();
        let g = gaussian_log_likelihood(&beta, 1.1, &d).unwrap();
        assert!((t - g).abs() < 1e-3);
    }

    #[test]
    fn overflow_reports_index() {
        let d = Dataset::new(Matrix::new(3, 1, vec![1.0, 1.0, 1.0]).unwrap(), vec![0.0, 1e300, 0.0]).unwrap();
        let params = ModelParams::new(vec![0.0], 1e-300, Dof::Gaussian).unwrap();
        assert_eq!(t_log_likelihood(&params, &d), Err(Error::NumericOverflow { index: 1 }));
    }

    #[test]
    fn expected_info_entries() {
        let x = Matrix::new(4, 1, vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        let d = Dataset::new(x, vec![0.0; 4]).unwrap();
        let info = expected_fisher_info(&ModelParams::new(vec![0.0], 1.0, Dof::Finite(2.0)).unwrap(), &d).unwrap();
        // (n/4)[ψ′(1) − ψ′(1.5) − 14/30], evaluated to 40 digits
        assert!((info[(2, 2)] - 0.243_465_199_636_880_460_388_503).abs() < 1e-13);
        assert_eq!(info[(0, 1)], 0.0);
        assert_eq!(info[(0, 2)], 0.0);
        assert_eq!(info[(2, 0)], 0.0);
        assert!(expected_fisher_info(&ModelParams::new(vec![0.0], 1.0, Dof::Gaussian).unwrap(), &d).is_err());
    }

    #[test]
    fn symmetric_data_has_zero_beta_score() {
        let x = Matrix::new(4, 1, vec![1.0, 2.0, 1.0, 2.0]).unwrap();
        let beta = [0.7];
        let y = vec![0.7 + 1.3, 1.4 + 0.4, 0.7 - 1.3, 1.4 - 0.4];
        let d = Dataset::new(x, y).unwrap();
        let s = score_beta_sigma(&ModelParams::new(beta.to_vec(), 0.8, Dof::Finite(3.0)).unwrap(), &d).unwrap();
        assert!(s[0].abs() < 1e-14);
    }
}
