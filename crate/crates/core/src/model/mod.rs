//! Component models shared by every engine: conjugate parameter families,
//! their Student-t predictive kernels, Pólya-urn prior weights and the
//! per-fit state that ties them together.

mod mixture;
mod nig;
mod niw;
mod state;
mod stats;
mod urn;

use std::fmt::Debug;

use serde::de::DeserializeOwned;
use serde::Serialize;

pub use mixture::MixturePredictive;
pub use nig::{BUpdate, NigParams, StudentT};
pub use niw::{MvStudentT, NiwParams};
pub use state::FitState;
pub use stats::SuffStats;
pub use urn::{
    soft_urn_weights, truncated_urn_prior, urn_prior, AllocationDistribution, ClusterSoftCounts,
};

pub(crate) use urn::{argmax as argmax_index, prior_weights};

use crate::error::Result;

/// Allocation weights below this are treated as exactly zero when updating
/// component parameters.
pub const WEIGHT_EPSILON: f64 = 1e-12;

/// A predictive density over observations of fixed dimension.
pub trait Density: Clone + Debug + Send + Sync {
    fn ln_density(&self, y: &[f64]) -> f64;

    fn density(&self, y: &[f64]) -> f64 {
        self.ln_density(y).exp()
    }
}

/// A conjugate prior/posterior family for the mean and precision of a normal
/// mixture component.
///
/// Values are immutable; every update returns a new parameter set.
pub trait Conjugate: Clone + Debug + Send + Sync + Serialize + DeserializeOwned {
    type Predictive: Density;

    fn dim(&self) -> usize;

    /// Posterior predictive density of a single new observation.
    fn predictive(&self) -> Self::Predictive;

    /// Power-likelihood update `q'(θ) ∝ q(θ) p(y|θ)^w`, `w ∈ [0, 1]`.
    fn weighted_update(&self, y: &[f64], w: f64) -> Result<Self>;

    /// Batch posterior given accumulated (possibly weighted) sufficient
    /// statistics, treating `self` as the prior.
    fn posterior(&self, stats: &SuffStats) -> Result<Self>;

    /// `KL(self || reference)`.
    fn kl_divergence(&self, reference: &Self) -> f64;

    /// `E[ln N(y | μ, Σ)]` with `(μ, Σ)` distributed as `self`.
    fn expected_ln_likelihood(&self, y: &[f64]) -> f64;

    /// Log marginal likelihood of `ys` under `self` as the prior, by the chain
    /// rule of predictive densities.
    fn ln_marginal<'a, I>(&self, ys: I) -> Result<f64>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut params = self.clone();
        let mut total = 0.0;
        for y in ys {
            total += params.predictive().ln_density(y);
            params = params.weighted_update(y, 1.0)?;
        }
        Ok(total)
    }
}

pub(crate) fn check_weight(w: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&w) {
        Ok(w)
    } else {
        Err(crate::DpmError::InvalidWeight(w))
    }
}

pub(crate) fn check_observation(y: &[f64], dim: usize) -> Result<()> {
    if y.len() != dim {
        return Err(crate::DpmError::DimensionMismatch {
            expected: dim,
            found: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(crate::DpmError::NonFiniteObservation);
    }
    Ok(())
}

/// Numerically stable `ln Σ exp(x)`.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
