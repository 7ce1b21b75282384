//! Pólya-urn allocation priors, exact and truncated, over hard or soft counts.
//!
//! Labels are 0-based here; label `j` in the API is the `(j+1)`-th cluster in
//! order of appearance.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, DpmError, Result};

/// Probability vector over cluster labels for one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AllocationDistribution(Vec<f64>);

impl AllocationDistribution {
    /// Wraps an already normalized vector. Entries must be non-negative and
    /// sum to one within `1e-9`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(DpmError::InvalidParameter {
                name: "probs",
                value: total,
                reason: "must be a non-negative vector summing to one",
            });
        }
        Ok(Self(probs))
    }

    pub(crate) fn from_unnormalized(mut weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Self(weights)
    }

    /// Point mass on `label` within a vector of length `len`.
    pub fn indicator(label: usize, len: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[label] = 1.0;
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Most probable label; ties go to the smallest label.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }

    pub fn entropy(&self) -> f64 {
        -self
            .0
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (j, x) in xs.iter().enumerate().skip(1) {
        if *x > xs[best] {
            best = j;
        }
    }
    best
}

/// Expected cluster occupancies `Σ_k q̂(δ_k = j)`; the integer special case
/// is the usual hard count vector. Only labels that have received positive
/// mass are stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterSoftCounts(Vec<f64>);

impl ClusterSoftCounts {
    pub fn new(counts: Vec<f64>) -> Result<Self> {
        if counts.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(DpmError::InvalidParameter {
                name: "counts",
                value: f64::NAN,
                reason: "entries must be finite and non-negative",
            });
        }
        Ok(Self(counts))
    }

    pub fn from_hard(counts: &[usize]) -> Self {
        Self(counts.iter().map(|&c| c as f64).collect())
    }

    pub fn counts(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub(crate) fn add(&mut self, label: usize, w: f64) {
        if label == self.0.len() {
            self.0.push(0.0);
        }
        self.0[label] += w;
    }
}

/// Prior weights of each seen label plus, when admissible, the next unseen
/// label. `mass` is the number of observations absorbed so far (`i − 1`).
///
/// Untruncated: `[c_j/(α+mass)] ++ [α/(α+mass)]`.
/// Truncated at `T` with `m` seen labels:
/// `[(c_j+α/T)/(α+mass)] ++ [α(1−m/T)/(α+mass)]`, the last entry present
/// only while `m < T`.
pub(crate) fn prior_weights(counts: &[f64], mass: f64, alpha: f64, trunc: Option<usize>) -> Vec<f64> {
    let denom = alpha + mass;
    let seen = counts.len();
    match trunc {
        None => counts
            .iter()
            .map(|c| c / denom)
            .chain(std::iter::once(alpha / denom))
            .collect(),
        Some(t) => {
            let share = alpha / t as f64;
            let mut w: Vec<f64> = counts.iter().map(|c| (c + share) / denom).collect();
            if seen < t {
                w.push(alpha * (1.0 - seen as f64 / t as f64) / denom);
            }
            w
        }
    }
}

fn check_hard(counts: &[usize], alpha: f64, step: usize) -> Result<()> {
    check_positive("alpha", alpha)?;
    let total: usize = counts.iter().sum();
    if step == 0 || total != step - 1 {
        return Err(DpmError::InconsistentCounts {
            step,
            expected: step.saturating_sub(1) as f64,
            found: total as f64,
        });
    }
    if counts.contains(&0) {
        return Err(DpmError::InvalidParameter {
            name: "counts",
            value: 0.0,
            reason: "occupied labels must have a positive count",
        });
    }
    Ok(())
}

/// Pólya-urn prior for the allocation of observation `step` (1-based) given
/// the occupancies of the clusters seen so far.
///
/// ```
/// use dpm_seq::model::urn_prior;
///
/// let p = urn_prior(&[2, 1], 0.5, 4).unwrap();
/// assert_eq!(p.probs(), &[2.0 / 3.5, 1.0 / 3.5, 0.5 / 3.5]);
/// ```
pub fn urn_prior(counts: &[usize], alpha: f64, step: usize) -> Result<AllocationDistribution> {
    check_hard(counts, alpha, step)?;
    let counts: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    Ok(AllocationDistribution(prior_weights(
        &counts,
        (step - 1) as f64,
        alpha,
        None,
    )))
}

/// Truncated Pólya-urn prior with at most `trunc` distinct labels.
pub fn truncated_urn_prior(
    counts: &[usize],
    alpha: f64,
    trunc: usize,
    step: usize,
) -> Result<AllocationDistribution> {
    check_hard(counts, alpha, step)?;
    if trunc == 0 || counts.len() > trunc {
        return Err(DpmError::TruncationExceeded {
            trunc,
            clusters: counts.len(),
        });
    }
    let counts: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    Ok(AllocationDistribution(prior_weights(
        &counts,
        (step - 1) as f64,
        alpha,
        Some(trunc),
    )))
}

/// Truncated urn weights with each occupancy replaced by its expectation
/// under earlier soft allocations. The counts must total `step − 1`.
pub fn soft_urn_weights(
    counts: &ClusterSoftCounts,
    alpha: f64,
    trunc: usize,
    step: usize,
) -> Result<AllocationDistribution> {
    check_positive("alpha", alpha)?;
    let expected = step.saturating_sub(1) as f64;
    let total = counts.total();
    if step == 0 || (total - expected).abs() > 1e-9 * expected.max(1.0) {
        return Err(DpmError::InconsistentCounts {
            step,
            expected,
            found: total,
        });
    }
    if trunc == 0 || counts.len() > trunc {
        return Err(DpmError::TruncationExceeded {
            trunc,
            clusters: counts.len(),
        });
    }
    Ok(AllocationDistribution(prior_weights(
        counts.counts(),
        expected,
        alpha,
        Some(trunc),
    )))
}
