use std::collections::{BTreeMap, HashMap};

use crate::data::Dataset;
use crate::error::{check_positive, DpmError, Result};
use crate::model::{logsumexp, prior_weights, Conjugate, Density, MixturePredictive, SuffStats};

/// Largest dataset accepted by [`enumerate_exact`].
pub const ENUMERATION_CAP: usize = 10;

/// Exact posterior over partitions of a tiny dataset.
#[derive(Debug, Clone)]
pub struct ExactPosterior<C: Conjugate> {
    ln_marginal: f64,
    partitions: Vec<(Vec<usize>, f64)>,
    predictive: MixturePredictive<C>,
}

impl<C: Conjugate> ExactPosterior<C> {
    /// `ln p(y_{1:N})` under the mixture.
    pub fn ln_marginal(&self) -> f64 {
        self.ln_marginal
    }

    /// Every admissible label string, in lexicographic order, with its
    /// posterior probability.
    pub fn partitions(&self) -> &[(Vec<usize>, f64)] {
        &self.partitions
    }

    pub fn allocation_posterior(&self) -> BTreeMap<Vec<usize>, f64> {
        self.partitions.iter().cloned().collect()
    }

    /// Most probable partition; ties go to the lexicographically smallest.
    pub fn map_partition(&self) -> &[usize] {
        let mut best = &self.partitions[0];
        for p in &self.partitions {
            if p.1 > best.1 {
                best = p;
            }
        }
        &best.0
    }

    /// Exact posterior predictive of the next observation.
    pub fn predictive(&self) -> &MixturePredictive<C> {
        &self.predictive
    }

    pub fn density(&self, y: &[f64]) -> f64 {
        self.predictive.density(y)
    }
}

struct Walker<'a, C: Conjugate> {
    data: &'a Dataset,
    alpha: f64,
    trunc: Option<usize>,
    prior: &'a C,
    labels: Vec<usize>,
    counts: Vec<f64>,
    params: Vec<C>,
    leaves: Vec<(Vec<usize>, f64)>,
}

impl<C: Conjugate> Walker<'_, C> {
    fn descend(&mut self, i: usize, ln_joint: f64) -> Result<()> {
        if i == self.data.len() {
            self.leaves.push((self.labels.clone(), ln_joint));
            return Ok(());
        }
        let y = self.data.row(i);
        let weights = prior_weights(&self.counts, i as f64, self.alpha, self.trunc);
        for (j, w) in weights.iter().enumerate() {
            let current = self.params.get(j).unwrap_or(self.prior).clone();
            let step = w.ln() + current.predictive().ln_density(y);
            let next = current.weighted_update(y, 1.0)?;
            if j == self.params.len() {
                self.params.push(next);
                self.counts.push(1.0);
            } else {
                self.params[j] = next;
                self.counts[j] += 1.0;
            }
            self.labels.push(j);
            self.descend(i + 1, ln_joint + step)?;
            self.labels.pop();
            if self.counts[j] == 1.0 {
                self.params.pop();
                self.counts.pop();
            } else {
                self.params[j] = current;
                self.counts[j] -= 1.0;
            }
        }
        Ok(())
    }
}

/// Sums the urn prior times the per-cluster marginal likelihoods over every
/// growth-restricted label string of `data`.
///
/// ```
/// use dpm_seq::{model::NigParams, oracle::enumerate_exact, Dataset};
///
/// let data = Dataset::univariate(vec![0.4, -1.0, 2.5]).unwrap();
/// let prior = NigParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
/// let exact = enumerate_exact(&data, 1.0, None, &prior).unwrap();
/// assert_eq!(exact.partitions().len(), 5);
/// ```
pub fn enumerate_exact<C: Conjugate>(
    data: &Dataset,
    alpha: f64,
    trunc: Option<usize>,
    prior: &C,
) -> Result<ExactPosterior<C>> {
    if data.is_empty() {
        return Err(DpmError::EmptyData);
    }
    if data.len() > ENUMERATION_CAP {
        return Err(DpmError::EnumerationTooLarge {
            n: data.len(),
            cap: ENUMERATION_CAP,
        });
    }
    check_positive("alpha", alpha)?;
    if trunc == Some(0) {
        return Err(DpmError::TruncationExceeded {
            trunc: 0,
            clusters: 1,
        });
    }
    if data.dim() != prior.dim() {
        return Err(DpmError::DimensionMismatch {
            expected: prior.dim(),
            found: data.dim(),
        });
    }

    let mut walker = Walker {
        data,
        alpha,
        trunc,
        prior,
        labels: Vec::with_capacity(data.len()),
        counts: Vec::new(),
        params: Vec::new(),
        leaves: Vec::new(),
    };
    walker.descend(0, 0.0)?;
    let leaves = walker.leaves;
    let ln_joint: Vec<f64> = leaves.iter().map(|l| l.1).collect();
    let ln_marginal = logsumexp(&ln_joint);
    if !ln_marginal.is_finite() {
        return Err(DpmError::NumericUnderflow);
    }
    let partitions: Vec<(Vec<usize>, f64)> = leaves
        .into_iter()
        .map(|(labels, lj)| (labels, (lj - ln_marginal).exp()))
        .collect();

    // The predictive is a mixture over cluster member sets; many partitions
    // share the same sets, so weights are aggregated by bitmask.
    let n = data.len();
    let mut by_mask: HashMap<u32, f64> = HashMap::new();
    let mut fresh = 0.0;
    for (labels, p) in &partitions {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut masks = vec![0u32; k];
        for (i, &l) in labels.iter().enumerate() {
            masks[l] |= 1 << i;
        }
        let counts: Vec<f64> = masks.iter().map(|m| m.count_ones() as f64).collect();
        let w = prior_weights(&counts, n as f64, alpha, trunc);
        for (mask, wj) in masks.iter().zip(&w) {
            *by_mask.entry(*mask).or_insert(0.0) += p * wj;
        }
        if w.len() > k {
            fresh += p * w[k];
        }
    }
    let mut masks: Vec<(u32, f64)> = by_mask.into_iter().collect();
    masks.sort_by_key(|m| m.0);
    let mut weights = Vec::with_capacity(masks.len() + 1);
    let mut comps = Vec::with_capacity(masks.len() + 1);
    for (mask, w) in masks {
        let stats = SuffStats::from_rows(
            data.dim(),
            (0..n).filter(|i| mask & (1 << i) != 0).map(|i| data.row(i)),
        );
        weights.push(w);
        comps.push(prior.posterior(&stats)?);
    }
    if fresh > 0.0 {
        weights.push(fresh);
        comps.push(prior.clone());
    }

    Ok(ExactPosterior {
        ln_marginal,
        partitions,
        predictive: MixturePredictive::new(weights, comps),
    })
}
