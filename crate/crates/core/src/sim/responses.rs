use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{sample_centered_chi_square, sample_normal, sample_student_t};

/// Distribution of the uncontaminated errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseError {
    StudentT(f64),
    Normal01,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContaminationKind {
    #[default]
    None,
    /// Error replaced by a `N(0, 9)` draw.
    NormalVar9,
    /// Error replaced by a `χ²(4) − 4` draw.
    ChiSq4Centered,
    /// Error replaced by a `t(2)` draw.
    T2,
    /// Response replaced by `−5` or `+5`, each with probability `rate/2`.
    TwoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ContaminationSpec {
    pub kind: ContaminationKind,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSpec {
    pub base: BaseError,
    #[serde(default)]
    pub contamination: ContaminationSpec,
}

impl ErrorSpec {
    pub fn validate(&self) -> Result<()> {
        if let BaseError::StudentT(nu) = self.base {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(Error::InvalidSpec { field: "errors.base".into(), reason: format!("nu must be positive, got {nu}") });
            }
        }
        let rate = self.contamination.rate;
        if !(0.0..=0.5).contains(&rate) {
            return Err(Error::InvalidSpec {
                field: "errors.contamination.rate".into(),
                reason: format!("must lie in [0, 0.5], got {rate}"),
            });
        }
        Ok(())
    }

    /// `ν` of the base distribution, `None` for normal errors.
    pub fn true_nu(&self) -> Option<f64> {
        match self.base {
            BaseError::StudentT(nu) => Some(nu),
            BaseError::Normal01 => None,
        }
    }
}

/// `y = Xβ + σε` with `ε` from the base distribution, then contamination.
///
/// All base draws are taken before any contamination draw, so a zero rate
/// (or kind `None`) reproduces the uncontaminated responses exactly.
pub fn generate_responses<R: Rng + ?Sized>(
    x: &Matrix,
    beta: &[f64],
    sigma: f64,
    errors: &ErrorSpec,
    rng: &mut R,
) -> Result<Vec<f64>> {
    errors.validate()?;
    if beta.len() != x.cols() {
        return Err(Error::Dimension(format!("true beta has {} entries, design has {} columns", beta.len(), x.cols())));
    }
    let n = x.rows();
    let eps = match errors.base {
        BaseError::StudentT(nu) => sample_student_t(nu, n, rng)?,
        BaseError::Normal01 => sample_normal(n, rng),
    };
    let mean = x.mul_vec(beta);
    let mut y: Vec<f64> = mean.iter().zip(&eps).map(|(m, e)| m + sigma * e).collect();
    let ContaminationSpec { kind, rate } = errors.contamination;
    if kind == ContaminationKind::None || rate == 0.0 {
        return Ok(y);
    }
    for i in 0..n {
        let u: f64 = rng.random();
        if u >= rate {
            continue;
        }
        let e = match kind {
            ContaminationKind::None => unreachable!(),
            ContaminationKind::NormalVar9 => 3.0 * sample_normal(1, rng)[0],
            ContaminationKind::ChiSq4Centered => sample_centered_chi_square(4.0, 1, rng)?[0],
            ContaminationKind::T2 => sample_student_t(2.0, 1, rng)?[0],
            ContaminationKind::TwoPoint => {
                y[i] = if u < rate / 2.0 { -5.0 } else { 5.0 };
                continue;
            }
        };
        y[i] = mean[i] + sigma * e;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn design(n: usize) -> Matrix {
        let mut rng = RngStream::new(1, 0).rng();
        Matrix::new(n, 2, sample_normal(2 * n, &mut rng)).unwrap()
    }

    #[test]
    fn zero_rate_is_uncontaminated() {
        let x = design(200);
        let clean = ErrorSpec { base: BaseError::StudentT(2.0), contamination: ContaminationSpec::default() };
        for kind in [ContaminationKind::NormalVar9, ContaminationKind::TwoPoint] {
            let zero = ErrorSpec { contamination: ContaminationSpec { kind, rate: 0.0 }, ..clean };
            let a = generate_responses(&x, &[1.0, 2.0], 1.5, &clean, &mut RngStream::new(4, 2).rng()).unwrap();
            let b = generate_responses(&x, &[1.0, 2.0], 1.5, &zero, &mut RngStream::new(4, 2).rng()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn two_point_fractions() {
        let n = 100_000;
        let x = Matrix::new(n, 1, vec![0.0; n]).unwrap();
        let spec = ErrorSpec {
            base: BaseError::Normal01,
            contamination: ContaminationSpec { kind: ContaminationKind::TwoPoint, rate: 0.2 },
        };
        let y = generate_responses(&x, &[0.0], 0.1, &spec, &mut RngStream::new(8, 0).rng()).unwrap();
        let lo = y.iter().filter(|&&v| v == -5.0).count() as f64 / n as f64;
        let hi = y.iter().filter(|&&v| v == 5.0).count() as f64 / n as f64;
        assert!((lo + hi - 0.2).abs() < 0.01);
        assert!((lo - hi).abs() < 0.01);
    }

    #[test]
    fn chi_square_replacements_are_centered() {
        let n = 100_000;
        let x = Matrix::new(n, 1, vec![0.0; n]).unwrap();
        // every error replaced: rate at its maximum and a negligible base scale
        let spec = ErrorSpec {
            base: BaseError::Normal01,
            contamination: ContaminationSpec { kind: ContaminationKind::ChiSq4Centered, rate: 0.5 },
        };
        let clean = ErrorSpec { contamination: ContaminationSpec::default(), ..spec };
        let y = generate_responses(&x, &[0.0], 1.0, &spec, &mut RngStream::new(2, 0).rng()).unwrap();
        let base = generate_responses(&x, &[0.0], 1.0, &clean, &mut RngStream::new(2, 0).rng()).unwrap();
        let replaced: Vec<f64> = y.iter().zip(&base).filter(|(a, b)| a != b).map(|(a, _)| *a).collect();
        assert!(replaced.len() > 45_000);
        let mean = replaced.iter().sum::<f64>() / replaced.len() as f64;
        assert!(mean.abs() < 0.05, "{mean}");
    }
}
