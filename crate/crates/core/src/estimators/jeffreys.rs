use super::NuEstimationResult;
use crate::data::Dataset;
use crate::error::Result;
use crate::optimizer::{outer_maximize_in, FitContext, ObjectiveKind, OptimControl};

/// Joint posterior mode of `(β, σ, ν)` under the independence-Jeffreys prior
/// (flat in `β`), with the `ν` prior carried into `ω`.
///
/// The posterior is maximized over `(β, σ)` at each `ω` and the result
/// searched over `ω ∈ [0, ω_max]` like the profile objectives. Bounding `ω`
/// matters: with many coefficients the joint density grows without limit
/// as `ν → 0` and `σ → 0`.
pub fn jeffreys_map(data: &Dataset, ctl: &OptimControl) -> Result<NuEstimationResult> {
    let ctx = FitContext::new(data)?;
    jeffreys_map_in(&ctx, ctl)
}

pub(crate) fn jeffreys_map_in(ctx: &FitContext<'_>, ctl: &OptimControl) -> Result<NuEstimationResult> {
    outer_maximize_in(ctx, ObjectiveKind::JointPosterior, ctl)
}
