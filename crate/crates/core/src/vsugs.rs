//! Variational SUGS.
//!
//! Each observation receives a distribution over the truncated set of
//! labels instead of a single label. Every component then absorbs the
//! observation with a power-likelihood update weighted by its allocation
//! probability, and a per-step variational bound on `ln p(y_i | y_{1:i-1})`
//! is accumulated for ordering selection.

use crate::data::Dataset;
use crate::error::{DpmError, Result};
use crate::model::{
    logsumexp, AllocationDistribution, Conjugate, FitState, MixturePredictive, WEIGHT_EPSILON,
};

/// How the allocation distribution of each observation is used for the
/// parameter update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AllocationRule {
    /// Fractional updates weighted by the allocation probabilities.
    #[default]
    Soft,
    /// Collapse to a point mass at the most probable label; reproduces
    /// truncated SUGS.
    HardArgmax,
}

/// Result of scoring one observation against the current fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Expected urn weights `q_ij`.
    pub prior: AllocationDistribution,
    /// `q̂_i(δ_i = j) ∝ q_ij ∫ q̂_{i−1}(θ_j) p(y_i|θ_j) dθ_j`.
    pub posterior: AllocationDistribution,
    /// Label with the largest unnormalized log score (smallest on ties).
    pub argmax: usize,
    /// `ln Σ_j q_ij t_j(y_i)`.
    pub ln_evidence: f64,
}

/// Scores `y` against each admissible label of `state`, in log space.
pub fn vsugs_allocate<C: Conjugate>(state: &FitState<C>, y: &[f64]) -> Result<Allocation> {
    let weights = state.prior_weights();
    let ln_pred = state.candidate_ln_predictives(y, weights.len())?;
    let scores: Vec<f64> = weights.iter().zip(&ln_pred).map(|(w, lp)| w.ln() + lp).collect();
    let mut argmax = 0;
    for (j, s) in scores.iter().enumerate() {
        if *s > scores[argmax] {
            argmax = j;
        }
    }
    let max = scores[argmax];
    if max == f64::NEG_INFINITY {
        return Err(DpmError::NumericUnderflow);
    }
    let unnorm: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let ln_evidence = logsumexp(&scores);
    let total: f64 = weights.iter().sum();
    Ok(Allocation {
        prior: AllocationDistribution::from_unnormalized(weights.iter().map(|w| w / total).collect()),
        posterior: AllocationDistribution::from_unnormalized(unnorm),
        argmax,
        ln_evidence,
    })
}

/// Entropy and urn cross term of the per-step bound:
/// `−Σ q̂ ln q̂ + Σ q̂ ln q_ij`.
fn allocation_terms(qhat: &AllocationDistribution, qij: &AllocationDistribution) -> f64 {
    let cross: f64 = qhat
        .probs()
        .iter()
        .zip(qij.probs())
        .filter(|(q, _)| **q > 0.0)
        .map(|(q, p)| q * p.ln())
        .sum();
    qhat.entropy() + cross
}

/// Per-step variational lower bound for absorbing `y`:
///
/// `Σ_j [q̂_j E_{q'_j} ln p(y|θ_j) − KL(q'_j ‖ q_j)] − Σ_j q̂_j ln q̂_j + Σ_j q̂_j ln q_ij`
///
/// where `q_j = prev[j]` and `q'_j = new[j]`. Labels with `q̂_j = 0`
/// contribute nothing to the entropy.
pub fn step_lower_bound<C: Conjugate>(
    prev: &[C],
    new: &[C],
    qhat: &AllocationDistribution,
    qij: &AllocationDistribution,
    y: &[f64],
) -> Result<f64> {
    let n = qhat.len();
    for len in [prev.len(), new.len(), qij.len()] {
        if len != n {
            return Err(DpmError::LengthMismatch { left: len, right: n });
        }
    }
    let mut bound = allocation_terms(qhat, qij);
    for ((p, q), w) in prev.iter().zip(new).zip(qhat.probs()) {
        bound += w * q.expected_ln_likelihood(y) - q.kl_divergence(p);
    }
    Ok(bound)
}

#[derive(Debug, Clone)]
pub struct VsugsFit<C: Conjugate> {
    state: FitState<C>,
    allocations: Vec<AllocationDistribution>,
    rule: AllocationRule,
    ln_evidence: f64,
}

impl<C: Conjugate> VsugsFit<C> {
    pub fn new(prior: C, alpha: f64, trunc: usize) -> Result<Self> {
        Self::with_rule(prior, alpha, trunc, AllocationRule::Soft)
    }

    pub fn with_rule(prior: C, alpha: f64, trunc: usize, rule: AllocationRule) -> Result<Self> {
        Ok(Self {
            state: FitState::new(prior, alpha, Some(trunc))?,
            allocations: Vec::new(),
            rule,
            ln_evidence: 0.0,
        })
    }

    pub fn step(&mut self, y: &[f64]) -> Result<&AllocationDistribution> {
        self.step_weighted(y, 1.0)
    }

    /// Absorbs `y` with every allocation probability scaled by `weight`
    /// (the observation's probability of belonging to this model at all).
    pub fn step_weighted(&mut self, y: &[f64], weight: f64) -> Result<&AllocationDistribution> {
        crate::model::check_weight(weight)?;
        let alloc = vsugs_allocate(&self.state, y)?;
        let qhat = match self.rule {
            AllocationRule::Soft => alloc.posterior,
            AllocationRule::HardArgmax => {
                AllocationDistribution::indicator(alloc.argmax, alloc.posterior.len())
            }
        };
        let mut bound = weight * allocation_terms(&qhat, &alloc.prior);
        for (j, q) in qhat.probs().iter().enumerate() {
            let w = weight * q;
            if w == 0.0 {
                continue;
            }
            let prev = self.state.component(j).clone();
            self.state.add_count(j, w);
            if w < WEIGHT_EPSILON {
                bound += w * prev.expected_ln_likelihood(y);
                continue;
            }
            let next = prev.weighted_update(y, w)?;
            bound += w * next.expected_ln_likelihood(y) - next.kl_divergence(&prev);
            self.state.set_component(j, next);
        }
        if !bound.is_finite() {
            return Err(DpmError::NonFinitePredictive);
        }
        self.state.finish_step(weight, bound);
        self.ln_evidence += weight * alloc.ln_evidence;
        self.allocations.push(qhat);
        Ok(self.allocations.last().expect("just pushed"))
    }

    pub fn state(&self) -> &FitState<C> {
        &self.state
    }

    pub fn allocations(&self) -> &[AllocationDistribution] {
        &self.allocations
    }

    pub fn rule(&self) -> AllocationRule {
        self.rule
    }

    /// Accumulated per-step variational bounds.
    pub fn lower_bound(&self) -> f64 {
        self.state.lower_bound()
    }

    /// `Σ_i ln Σ_j q_ij t_j(y_i)`: the sequential predictive log-likelihood.
    pub fn ln_evidence(&self) -> f64 {
        self.ln_evidence
    }

    /// Most probable label of each observation.
    pub fn map_labels(&self) -> Vec<usize> {
        self.allocations.iter().map(|a| a.argmax()).collect()
    }

    /// Predictive density of the next observation.
    pub fn predictive(&self) -> MixturePredictive<C> {
        self.state.predictive()
    }
}

/// Runs VSUGS with soft allocations over `data` in the given order.
///
/// ```
/// use dpm_seq::{model::NigParams, vsugs::vsugs_fit, Dataset};
///
/// let data = Dataset::univariate(vec![0.1, -0.2, 5.0, 5.3]).unwrap();
/// let prior = NigParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
/// let fit = vsugs_fit(&data, 1.0, 10, prior).unwrap();
/// let total: f64 = fit.state().counts().total();
/// assert!((total - 4.0).abs() < 1e-12);
/// ```
pub fn vsugs_fit<C: Conjugate>(data: &Dataset, alpha: f64, trunc: usize, prior: C) -> Result<VsugsFit<C>> {
    vsugs_fit_with(data, alpha, trunc, prior, AllocationRule::Soft)
}

pub fn vsugs_fit_with<C: Conjugate>(
    data: &Dataset,
    alpha: f64,
    trunc: usize,
    prior: C,
    rule: AllocationRule,
) -> Result<VsugsFit<C>> {
    if data.is_empty() {
        return Err(DpmError::EmptyData);
    }
    let mut fit = VsugsFit::with_rule(prior, alpha, trunc, rule)?;
    for y in data.rows() {
        fit.step(y)?;
    }
    Ok(fit)
}

/// Reproductions of alternative readings of the bound and of the rate
/// recursion, for comparison only.
pub mod diagnostics {
    use statrs::function::gamma::{digamma, ln_gamma};

    use crate::model::{AllocationDistribution, NigParams};

    /// The normal–inverse-gamma step bound with the parameter-change block
    /// added rather than subtracted and with `b/a` in place of `a/b` in the
    /// expected log-likelihood.
    pub fn printed_step_lower_bound(
        prev: &[NigParams],
        new: &[NigParams],
        qhat: &AllocationDistribution,
        qij: &AllocationDistribution,
        y: f64,
    ) -> f64 {
        let mut total = 0.0;
        for (p, q) in prev.iter().zip(new) {
            let (rho0, nu0, a0, b0) = p.params();
            let (rho1, nu1, a1, b1) = q.params();
            total += (a1 - a0) * digamma(a1) - ln_gamma(a1)
                + ln_gamma(a0)
                + a0 * (b1.ln() - b0.ln())
                + a1 * (b0 - b1) / b1
                + (rho1 - rho0).powi(2) / (2.0 * nu0) * a1 / b1
                + 0.5 * (nu1 / nu0 - 1.0 - (nu1 / nu0).ln());
        }
        for (q, w) in new.iter().zip(qhat.probs()) {
            let (rho1, nu1, a1, b1) = q.params();
            total += w
                * (0.5 * digamma(a1) - 0.5 * b1.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
                    - 0.5 * (nu1 + (y - rho1).powi(2) * b1 / a1));
        }
        for (q, p) in qhat.probs().iter().zip(qij.probs()) {
            if *q > 0.0 {
                total += -q * q.ln() + q * p.ln();
            }
        }
        total
    }
}
