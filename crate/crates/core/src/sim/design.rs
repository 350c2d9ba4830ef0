use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::{sample_normal, RngStream};

/// Extra rows appended to the stack-loss predictors in the hybrid design.
pub const HYBRID_EXTRA_ROWS: usize = 189;
/// Column counts allowed for the hybrid design.
pub const HYBRID_P: [usize; 3] = [40, 80, 120];

/// How the fixed design matrix of a study is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMode {
    /// The 21 × 4 stack-loss design with intercept.
    StacklossOriginal,
    /// Stack-loss rows plus 189 moment-matched normal rows (n = 210), padded
    /// with standard-normal columns up to `p`.
    StacklossHybrid { p: usize },
    /// Independent standard-normal entries; with `intercept` the first of
    /// the `p` columns is ones.
    GaussianIid { n: usize, p: usize, intercept: bool },
}

impl DesignMode {
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            DesignMode::StacklossOriginal => (21, 4),
            DesignMode::StacklossHybrid { p } => (21 + HYBRID_EXTRA_ROWS, p),
            DesignMode::GaussianIid { n, p, .. } => (n, p),
        }
    }

    pub fn has_intercept(&self) -> bool {
        match *self {
            DesignMode::StacklossOriginal | DesignMode::StacklossHybrid { .. } => true,
            DesignMode::GaussianIid { intercept, .. } => intercept,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DesignMode::StacklossOriginal => Ok(()),
            DesignMode::StacklossHybrid { p } if HYBRID_P.contains(&p) => Ok(()),
            DesignMode::StacklossHybrid { p } => Err(Error::InvalidSpec {
                field: "design.p".into(),
                reason: format!("hybrid design supports p in {HYBRID_P:?}, got {p}"),
            }),
            DesignMode::GaussianIid { n, p, .. } if p >= 1 && n > p => Ok(()),
            DesignMode::GaussianIid { n, p, .. } => Err(Error::InvalidSpec {
                field: "design".into(),
                reason: format!("need p >= 1 and n >= p + 1, got n = {n}, p = {p}"),
            }),
        }
    }
}

/// Builds the design matrix; studies call this once and keep it fixed.
pub fn generate_design(mode: &DesignMode, stream: &RngStream) -> Result<Matrix> {
    mode.validate()?;
    let mut rng = stream.rng();
    match *mode {
        DesignMode::StacklossOriginal => Ok(Dataset::stackloss().x().clone()),
        DesignMode::StacklossHybrid { p } => {
            let base = Dataset::stackloss();
            let bx = base.x();
            // empirical mean and covariance of the three predictors
            let k = 3;
            let m = bx.rows() as f64;
            let mean: Vec<f64> = (0..k).map(|j| bx.column(j + 1).iter().sum::<f64>() / m).collect();
            let mut cov = Matrix::zeros(k, k);
            for i in 0..bx.rows() {
                for a in 0..k {
                    for b in 0..k {
                        cov[(a, b)] += (bx[(i, a + 1)] - mean[a]) * (bx[(i, b + 1)] - mean[b]) / (m - 1.0);
                    }
                }
            }
            let chol = Cholesky::new(&cov).ok_or(Error::Singular { deficient: 1, cols: k })?;
            let l = chol.factor();
            let n = bx.rows() + HYBRID_EXTRA_ROWS;
            let mut x = Matrix::zeros(n, p);
            for i in 0..bx.rows() {
                for j in 0..4 {
                    x[(i, j)] = bx[(i, j)];
                }
            }
            for i in bx.rows()..n {
                let e = sample_normal(k, &mut rng);
                x[(i, 0)] = 1.0;
                for a in 0..k {
                    x[(i, a + 1)] = mean[a] + (0..=a).map(|b| l[(a, b)] * e[b]).sum::<f64>();
                }
            }
            let extra = sample_normal(n * (p - 4), &mut rng);
            for i in 0..n {
                for j in 4..p {
                    x[(i, j)] = extra[i * (p - 4) + (j - 4)];
                }
            }
            Ok(x)
        }
        DesignMode::GaussianIid { n, p, intercept } => {
            let start = usize::from(intercept);
            let draws = sample_normal(n * (p - start), &mut rng);
            let mut x = Matrix::zeros(n, p);
            for i in 0..n {
                if intercept {
                    x[(i, 0)] = 1.0;
                }
                for j in start..p {
                    x[(i, j)] = draws[i * (p - start) + (j - start)];
                }
            }
            Ok(x)
        }
    }
}

/// FNV-1a over the bit patterns of the entries, used to pin a design.
pub fn design_hash(x: &Matrix) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in x.as_slice() {
        for byte in v.to_bits().to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}
