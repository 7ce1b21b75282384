//! Sequential updating and greedy search.
//!
//! Each observation is assigned to the cluster with the highest posterior
//! allocation probability given the earlier (frozen) assignments, and only
//! that cluster's parameters are updated.

use crate::data::Dataset;
use crate::error::{DpmError, Result};
use crate::model::{Conjugate, FitState, MixturePredictive};

#[derive(Debug, Clone)]
pub struct SugsFit<C: Conjugate> {
    state: FitState<C>,
    allocations: Vec<usize>,
    log_pseudo_marginal: f64,
}

impl<C: Conjugate> SugsFit<C> {
    /// An empty fit. `trunc = None` uses the exact Pólya urn; `Some(T)` the
    /// urn truncated at `T` clusters.
    pub fn new(prior: C, alpha: f64, trunc: Option<usize>) -> Result<Self> {
        Ok(Self {
            state: FitState::new(prior, alpha, trunc)?,
            allocations: Vec::new(),
            log_pseudo_marginal: 0.0,
        })
    }

    /// Processes one observation and returns its (0-based) label.
    pub fn step(&mut self, y: &[f64]) -> Result<usize> {
        let weights = self.state.prior_weights();
        let ln_pred = self.state.candidate_ln_predictives(y, weights.len())?;
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (j, (w, lp)) in weights.iter().zip(&ln_pred).enumerate() {
            let score = w.ln() + lp;
            if score > best_score {
                best = j;
                best_score = score;
            }
        }
        if best_score == f64::NEG_INFINITY {
            return Err(DpmError::NumericUnderflow);
        }
        let updated = self.state.component(best).weighted_update(y, 1.0)?;
        self.state.add_count(best, 1.0);
        self.state.set_component(best, updated);
        self.state.finish_step(1.0, 0.0);
        self.allocations.push(best);
        self.log_pseudo_marginal += ln_pred[best];
        Ok(best)
    }

    pub fn state(&self) -> &FitState<C> {
        &self.state
    }

    /// Labels in order of appearance, 0-based.
    pub fn allocations(&self) -> &[usize] {
        &self.allocations
    }

    pub fn num_clusters(&self) -> usize {
        self.state.num_clusters()
    }

    /// Hard cluster sizes.
    pub fn counts(&self) -> Vec<usize> {
        self.state
            .counts()
            .counts()
            .iter()
            .map(|c| c.round() as usize)
            .collect()
    }

    /// `ln p(y_{1:N} | δ̂_{1:N})`, accumulated as the product of each
    /// observation's predictive under its chosen cluster at assignment time.
    pub fn pseudo_marginal(&self) -> f64 {
        self.log_pseudo_marginal
    }

    /// Predictive density of the next observation.
    pub fn predictive(&self) -> MixturePredictive<C> {
        self.state.predictive()
    }
}

/// Runs SUGS over `data` in the given order.
///
/// ```
/// use dpm_seq::{model::NigParams, sugs::sugs_fit, Dataset};
///
/// let data = Dataset::univariate(vec![-10.0, 10.1, -9.9, 9.8]).unwrap();
/// let prior = NigParams::new(0.0, 100.0, 1.0, 0.1).unwrap();
/// let fit = sugs_fit(&data, 1.0, prior, None).unwrap();
/// assert_eq!(fit.allocations(), &[0, 1, 0, 1]);
/// ```
pub fn sugs_fit<C: Conjugate>(
    data: &Dataset,
    alpha: f64,
    prior: C,
    trunc: Option<usize>,
) -> Result<SugsFit<C>> {
    if data.is_empty() {
        return Err(DpmError::EmptyData);
    }
    let mut fit = SugsFit::new(prior, alpha, trunc)?;
    for y in data.rows() {
        fit.step(y)?;
    }
    Ok(fit)
}
