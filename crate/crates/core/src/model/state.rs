use super::{prior_weights, ClusterSoftCounts, Conjugate, MixturePredictive};
use crate::error::{check_positive, DpmError, Result};

/// Mutable state of a sequential fit: one parameter set per seen cluster,
/// the (soft) occupancy of each, and the running bound.
///
/// Labels beyond [`num_clusters`](Self::num_clusters) are implicitly at the
/// prior, so the cluster vector only grows when a label first receives mass.
#[derive(Debug, Clone)]
pub struct FitState<C: Conjugate> {
    alpha: f64,
    trunc: Option<usize>,
    prior: C,
    prior_kernel: C::Predictive,
    clusters: Vec<C>,
    kernels: Vec<C::Predictive>,
    counts: ClusterSoftCounts,
    mass: f64,
    processed: usize,
    lower_bound: f64,
}

impl<C: Conjugate> FitState<C> {
    pub fn new(prior: C, alpha: f64, trunc: Option<usize>) -> Result<Self> {
        check_positive("alpha", alpha)?;
        if trunc == Some(0) {
            return Err(DpmError::TruncationExceeded {
                trunc: 0,
                clusters: 1,
            });
        }
        Ok(Self {
            alpha,
            trunc,
            prior_kernel: prior.predictive(),
            prior,
            clusters: Vec::new(),
            kernels: Vec::new(),
            counts: ClusterSoftCounts::default(),
            mass: 0.0,
            processed: 0,
            lower_bound: 0.0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn trunc(&self) -> Option<usize> {
        self.trunc
    }

    pub fn prior(&self) -> &C {
        &self.prior
    }

    pub fn clusters(&self) -> &[C] {
        &self.clusters
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn counts(&self) -> &ClusterSoftCounts {
        &self.counts
    }

    /// Number of observations processed.
    pub fn processed(&self) -> usize {
        self.processed
    }

    /// Total allocation mass absorbed; equals `processed` unless points were
    /// absorbed with fractional weight.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// Urn weights for the next observation: one per seen cluster, plus one
    /// for the next unseen label when admissible.
    pub fn prior_weights(&self) -> Vec<f64> {
        prior_weights(self.counts.counts(), self.mass, self.alpha, self.trunc)
    }

    /// Parameters of candidate `label`; the first unseen label is at the prior.
    pub fn component(&self, label: usize) -> &C {
        self.clusters.get(label).unwrap_or(&self.prior)
    }

    pub(crate) fn kernel(&self, label: usize) -> &C::Predictive {
        self.kernels.get(label).unwrap_or(&self.prior_kernel)
    }

    /// `ln` predictive of `y` under each candidate label in
    /// [`prior_weights`](Self::prior_weights) order.
    pub(crate) fn candidate_ln_predictives(&self, y: &[f64], candidates: usize) -> Result<Vec<f64>> {
        super::check_observation(y, self.prior.dim())?;
        (0..candidates)
            .map(|j| {
                let v = super::Density::ln_density(self.kernel(j), y);
                if v.is_nan() || v == f64::INFINITY {
                    Err(DpmError::NonFinitePredictive)
                } else {
                    Ok(v)
                }
            })
            .collect()
    }

    /// Replaces the parameters of `label`, opening it if it is the next
    /// unseen label.
    pub(crate) fn set_component(&mut self, label: usize, params: C) {
        let kernel = params.predictive();
        if label == self.clusters.len() {
            self.clusters.push(params);
            self.kernels.push(kernel);
        } else {
            self.clusters[label] = params;
            self.kernels[label] = kernel;
        }
    }

    /// Adds occupancy `w` to `label`. Opens the label (at the prior) if
    /// needed.
    pub(crate) fn add_count(&mut self, label: usize, w: f64) {
        if label == self.clusters.len() {
            self.clusters.push(self.prior.clone());
            self.kernels.push(self.prior_kernel.clone());
        }
        self.counts.add(label, w);
    }

    pub(crate) fn finish_step(&mut self, mass: f64, bound: f64) {
        self.processed += 1;
        self.mass += mass;
        self.lower_bound += bound;
    }

    /// Predictive density for the next observation: urn weights paired with
    /// each cluster's predictive and, for the unseen slot, the prior's.
    pub fn predictive(&self) -> MixturePredictive<C> {
        let weights = self.prior_weights();
        let mut components: Vec<C> = self.clusters.clone();
        if weights.len() > components.len() {
            components.push(self.prior.clone());
        }
        MixturePredictive::new(weights, components)
    }
}
