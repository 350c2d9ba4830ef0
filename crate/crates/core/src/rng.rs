//! Seeded, splittable random streams and the samplers used by the
//! simulation harness.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A reproducible random stream identified by `(seed, stream)`.
///
/// Each replication of a study owns the stream `(master_seed, index)`, so
/// draws never depend on the order in which replications are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    pub fn student_t(&self, nu: f64, n: usize) -> Result<Vec<f64>> {
        sample_student_t(nu, n, &mut self.rng())
    }
}

fn check_dof(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "sample_student_t",
            value: nu,
            reason: "degrees of freedom must be positive and finite",
        })
    }
}

/// `n` i.i.d. standard Student-t draws, built as `Z / sqrt(χ²_ν / ν)`.
pub fn sample_student_t<R: Rng + ?Sized>(nu: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_dof(nu)?;
    let chi = ChiSquared::new(nu).map_err(|_| Error::Domain {
        function: "sample_student_t",
        value: nu,
        reason: "invalid chi-square shape",
    })?;
    Ok((0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            let v: f64 = chi.sample(rng);
            z / (v / nu).sqrt()
        })
        .collect())
}

pub fn sample_normal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Draws from `χ²_k − k`.
pub fn sample_centered_chi_square<R: Rng + ?Sized>(k: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let chi = ChiSquared::new(k).map_err(|_| Error::Domain {
        function: "sample_centered_chi_square",
        value: k,
        reason: "degrees of freedom must be positive",
    })?;
    Ok((0..n).map(|_| chi.sample(rng) - k).collect())
}
