use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::canonical_labels;
use crate::data::Dataset;
use crate::error::{check_positive, DpmError, Result};
use crate::model::{prior_weights, Conjugate, Density, MixturePredictive, SuffStats};

const REFRESH_EVERY: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsConfig {
    /// Sweeps discarded before the first retained draw.
    pub burnin: usize,
    /// Number of retained draws.
    pub iters: usize,
    /// Sweeps between retained draws.
    pub thin: usize,
    pub seed: u64,
    /// Truncation level of the urn, or `None` for the exact process.
    pub trunc: Option<usize>,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            burnin: 300,
            iters: 1000,
            thin: 1,
            seed: 0,
            trunc: None,
        }
    }
}

impl GibbsConfig {
    pub fn new(burnin: usize, iters: usize, seed: u64) -> Self {
        Self {
            burnin,
            iters,
            seed,
            ..Self::default()
        }
    }

    pub fn with_trunc(mut self, trunc: Option<usize>) -> Self {
        self.trunc = trunc;
        self
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.iters == 0 {
            return Err(DpmError::InvalidParameter {
                name: "iters",
                value: 0.0,
                reason: "at least one draw must be retained",
            });
        }
        if self.thin == 0 {
            return Err(DpmError::InvalidParameter {
                name: "thin",
                value: 0.0,
                reason: "must be at least one",
            });
        }
        if self.trunc == Some(0) {
            return Err(DpmError::TruncationExceeded {
                trunc: 0,
                clusters: 1,
            });
        }
        Ok(())
    }
}

/// One retained state of the chain, with clusters in order of appearance.
#[derive(Debug, Clone)]
pub struct GibbsDraw<C: Conjugate> {
    labels: Vec<usize>,
    counts: Vec<usize>,
    clusters: Vec<C>,
}

impl<C: Conjugate> GibbsDraw<C> {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Posterior parameters of each cluster given its members.
    pub fn clusters(&self) -> &[C] {
        &self.clusters
    }

    pub fn num_clusters(&self) -> usize {
        self.counts.len()
    }
}

#[derive(Debug, Clone)]
pub struct PosteriorSamples<C: Conjugate> {
    alpha: f64,
    trunc: Option<usize>,
    prior: C,
    len: usize,
    draws: Vec<GibbsDraw<C>>,
}

impl<C: Conjugate> PosteriorSamples<C> {
    pub fn draws(&self) -> &[GibbsDraw<C>] {
        &self.draws
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

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn allocation_draws(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.draws.iter().map(GibbsDraw::labels)
    }

    pub fn cluster_count_draws(&self) -> Vec<usize> {
        self.draws.iter().map(GibbsDraw::num_clusters).collect()
    }

    /// Empirical frequency of each visited partition.
    pub fn partition_frequencies(&self) -> BTreeMap<Vec<usize>, f64> {
        let mut freq = BTreeMap::new();
        let unit = 1.0 / self.draws.len() as f64;
        for d in &self.draws {
            *freq.entry(d.labels.clone()).or_insert(0.0) += unit;
        }
        freq
    }

    /// Concatenates draws from chains run on the same data and model.
    pub fn pooled(chains: Vec<Self>) -> Result<Self> {
        let mut iter = chains.into_iter();
        let mut first = iter.next().ok_or(DpmError::EmptyData)?;
        for c in iter {
            if c.len != first.len {
                return Err(DpmError::LengthMismatch {
                    left: first.len,
                    right: c.len,
                });
            }
            first.draws.extend(c.draws);
        }
        Ok(first)
    }

    pub fn predictive(&self) -> GibbsPredictive<C> {
        GibbsPredictive::new(self)
    }
}

/// Rao–Blackwellized posterior predictive: the average over draws of each
/// draw's urn-weighted mixture of cluster predictives.
#[derive(Debug, Clone)]
pub struct GibbsPredictive<C: Conjugate> {
    mixtures: Vec<MixturePredictive<C>>,
}

impl<C: Conjugate> GibbsPredictive<C> {
    pub fn new(samples: &PosteriorSamples<C>) -> Self {
        let mixtures = samples
            .draws
            .iter()
            .map(|d| {
                let counts: Vec<f64> = d.counts.iter().map(|&c| c as f64).collect();
                let weights = prior_weights(&counts, samples.len as f64, samples.alpha, samples.trunc);
                let mut comps = d.clusters.clone();
                if weights.len() > comps.len() {
                    comps.push(samples.prior.clone());
                }
                MixturePredictive::new(weights, comps)
            })
            .collect();
        Self { mixtures }
    }

    pub fn num_draws(&self) -> usize {
        self.mixtures.len()
    }

    pub fn density(&self, y: &[f64]) -> f64 {
        self.pointwise_draws(y).iter().sum::<f64>() / self.mixtures.len() as f64
    }

    /// Predictive density at `y` under each draw separately.
    pub fn pointwise_draws(&self, y: &[f64]) -> Vec<f64> {
        self.mixtures.iter().map(|m| m.density(y)).collect()
    }

    /// Monte Carlo standard error of [`density`](Self::density) at `y` by
    /// non-overlapping batch means.
    pub fn batch_means_se(&self, y: &[f64], batches: usize) -> f64 {
        let draws = self.pointwise_draws(y);
        let size = draws.len() / batches.max(1);
        if size == 0 || batches < 2 {
            return f64::NAN;
        }
        let means: Vec<f64> = draws
            .chunks_exact(size)
            .take(batches)
            .map(|c| c.iter().sum::<f64>() / size as f64)
            .collect();
        let grand = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
        (var / batches as f64).sqrt()
    }

    /// Monte Carlo standard error of [`density`](Self::density) at `y`
    /// from Geyer's initial monotone sequence estimate of the
    /// autocorrelated variance.
    pub fn mc_standard_error(&self, y: &[f64]) -> f64 {
        initial_monotone_se(&self.pointwise_draws(y))
    }

    /// The same density as one flat mixture.
    pub fn to_mixture(&self) -> MixturePredictive<C> {
        let scale = 1.0 / self.mixtures.len() as f64;
        MixturePredictive::pooled(self.mixtures.iter().map(|m| (scale, m)))
    }
}

/// Standard error of the mean of a stationary series: sums of adjacent
/// autocovariance pairs are accumulated while positive, each capped by the
/// previous one.
pub(crate) fn initial_monotone_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let acov = |k: usize| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let g0 = acov(0);
    let mut var = -g0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = (acov(2 * k) + acov(2 * k + 1)).min(prev);
        if pair <= 0.0 {
            break;
        }
        var += 2.0 * pair;
        prev = pair;
        k += 1;
    }
    (var.max(0.0) / n as f64).sqrt()
}

/// Posterior predictive density at `y` averaged over the retained draws.
pub fn gibbs_predictive<C: Conjugate>(samples: &PosteriorSamples<C>, y: &[f64]) -> f64 {
    GibbsPredictive::new(samples).density(y)
}

struct Chain<'a, C: Conjugate> {
    data: &'a Dataset,
    prior: &'a C,
    prior_kernel: C::Predictive,
    alpha: f64,
    trunc: Option<usize>,
    labels: Vec<usize>,
    counts: Vec<usize>,
    stats: Vec<SuffStats>,
    params: Vec<C>,
    kernels: Vec<C::Predictive>,
}

impl<'a, C: Conjugate> Chain<'a, C> {
    fn new(data: &'a Dataset, prior: &'a C, alpha: f64, trunc: Option<usize>) -> Result<Self> {
        let stats = SuffStats::from_rows(data.dim(), data.rows());
        let params = prior.posterior(&stats)?;
        Ok(Self {
            data,
            prior,
            prior_kernel: prior.predictive(),
            alpha,
            trunc,
            labels: vec![0; data.len()],
            counts: vec![data.len()],
            kernels: vec![params.predictive()],
            params: vec![params],
            stats: vec![stats],
        })
    }

    fn refresh(&mut self, j: usize) -> Result<()> {
        self.params[j] = self.prior.posterior(&self.stats[j])?;
        self.kernels[j] = self.params[j].predictive();
        Ok(())
    }

    fn recompute_stats(&mut self) -> Result<()> {
        let mut fresh = vec![SuffStats::new(self.data.dim()); self.counts.len()];
        for (y, &z) in self.data.rows().zip(&self.labels) {
            fresh[z].add(y, 1.0);
        }
        debug_assert!(fresh
            .iter()
            .zip(&self.stats)
            .all(|(a, b)| a.max_abs_diff(b) <= 1e-6 * (1.0 + a.weight())));
        self.stats = fresh;
        for j in 0..self.counts.len() {
            self.refresh(j)?;
        }
        Ok(())
    }

    fn remove_cluster(&mut self, z: usize) {
        let last = self.counts.len() - 1;
        self.counts.swap_remove(z);
        self.stats.swap_remove(z);
        self.params.swap_remove(z);
        self.kernels.swap_remove(z);
        if z != last {
            for l in self.labels.iter_mut().filter(|l| **l == last) {
                *l = z;
            }
        }
    }

    fn sweep(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        let n = self.data.len();
        for i in 0..n {
            let y = self.data.row(i);
            let z = self.labels[i];
            self.counts[z] -= 1;
            self.stats[z].remove(y, 1.0);
            if self.counts[z] == 0 {
                self.remove_cluster(z);
            } else {
                self.refresh(z)?;
            }

            let counts: Vec<f64> = self.counts.iter().map(|&c| c as f64).collect();
            let weights = prior_weights(&counts, (n - 1) as f64, self.alpha, self.trunc);
            let scores: Vec<f64> = weights
                .iter()
                .enumerate()
                .map(|(j, w)| {
                    let k = self.kernels.get(j).unwrap_or(&self.prior_kernel);
                    w.ln() + k.ln_density(y)
                })
                .collect();
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !max.is_finite() {
                return Err(DpmError::NumericUnderflow);
            }
            let probs: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
            let j = WeightedIndex::new(&probs)
                .map_err(|_| DpmError::NumericUnderflow)?
                .sample(rng);

            if j == self.counts.len() {
                self.counts.push(0);
                self.stats.push(SuffStats::new(self.data.dim()));
                self.params.push(self.prior.clone());
                self.kernels.push(self.prior_kernel.clone());
            }
            self.counts[j] += 1;
            self.stats[j].add(y, 1.0);
            self.refresh(j)?;
            self.labels[i] = j;
        }
        Ok(())
    }

    fn snapshot(&self) -> GibbsDraw<C> {
        let labels = canonical_labels(&self.labels);
        let k = self.counts.len();
        let mut order = vec![0; k];
        for (&raw, &canon) in self.labels.iter().zip(&labels) {
            order[canon] = raw;
        }
        GibbsDraw {
            labels,
            counts: order.iter().map(|&r| self.counts[r]).collect(),
            clusters: order.iter().map(|&r| self.params[r].clone()).collect(),
        }
    }
}

fn run_chain<C: Conjugate>(
    data: &Dataset,
    alpha: f64,
    prior: &C,
    cfg: &GibbsConfig,
    stream: u64,
) -> Result<PosteriorSamples<C>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut chain = Chain::new(data, prior, alpha, cfg.trunc)?;
    let mut draws = Vec::with_capacity(cfg.iters);
    let total = cfg.burnin + cfg.iters * cfg.thin;
    for sweep in 1..=total {
        chain.sweep(&mut rng)?;
        if sweep % REFRESH_EVERY == 0 {
            chain.recompute_stats()?;
        }
        if sweep > cfg.burnin && (sweep - cfg.burnin) % cfg.thin == 0 {
            draws.push(chain.snapshot());
        }
    }
    Ok(PosteriorSamples {
        alpha,
        trunc: cfg.trunc,
        prior: prior.clone(),
        len: data.len(),
        draws,
    })
}

fn check_inputs<C: Conjugate>(data: &Dataset, alpha: f64, prior: &C, cfg: &GibbsConfig) -> Result<()> {
    if data.is_empty() {
        return Err(DpmError::EmptyData);
    }
    check_positive("alpha", alpha)?;
    cfg.validate()?;
    if data.dim() != prior.dim() {
        return Err(DpmError::DimensionMismatch {
            expected: prior.dim(),
            found: data.dim(),
        });
    }
    Ok(())
}

/// Collapsed Gibbs sampler over allocations with component parameters
/// integrated out. Every point starts in a single cluster.
///
/// ```
/// use dpm_seq::{model::NigParams, oracle::{collapsed_gibbs, GibbsConfig}, Dataset};
///
/// let data = Dataset::univariate(vec![-5.0, -5.1, 5.0, 5.2]).unwrap();
/// let prior = NigParams::new(0.0, 10.0, 1.0, 0.1).unwrap();
/// let samples = collapsed_gibbs(&data, 0.5, &prior, &GibbsConfig::new(50, 200, 7)).unwrap();
/// assert_eq!(samples.draws().len(), 200);
/// ```
pub fn collapsed_gibbs<C: Conjugate>(
    data: &Dataset,
    alpha: f64,
    prior: &C,
    cfg: &GibbsConfig,
) -> Result<PosteriorSamples<C>> {
    check_inputs(data, alpha, prior, cfg)?;
    run_chain(data, alpha, prior, cfg, 0)
}

/// Runs `chains` independent chains in parallel. Chain `k` uses stream `k`
/// of the configured seed, so chain 0 reproduces [`collapsed_gibbs`].
pub fn collapsed_gibbs_chains<C: Conjugate>(
    data: &Dataset,
    alpha: f64,
    prior: &C,
    cfg: &GibbsConfig,
    chains: usize,
) -> Result<Vec<PosteriorSamples<C>>> {
    check_inputs(data, alpha, prior, cfg)?;
    (0..chains as u64)
        .into_par_iter()
        .map(|k| run_chain(data, alpha, prior, cfg, k))
        .collect()
}
