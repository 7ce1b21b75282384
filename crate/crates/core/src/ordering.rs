//! Ordering search: fit the same data under many random orderings and keep
//! the best-scoring fit.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{DpmError, Result};
use crate::model::{Conjugate, MixturePredictive};
use crate::sugs::{sugs_fit, SugsFit};
use crate::vsugs::{vsugs_fit_with, AllocationRule, VsugsFit};

/// Ordering `index` of `n` items under `seed`.
///
/// Ordering 0 is the identity; every other index is an independent uniform
/// shuffle drawn from its own generator stream, so any ordering can be
/// reproduced without generating the others.
pub fn permutation(n: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    if index > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        perm.shuffle(&mut rng);
    }
    perm
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineSpec {
    Sugs { alpha: f64, trunc: Option<usize> },
    Vsugs { alpha: f64, trunc: usize, rule: AllocationRule },
}

impl EngineSpec {
    pub fn sugs(alpha: f64) -> Self {
        Self::Sugs { alpha, trunc: None }
    }

    pub fn vsugs(alpha: f64, trunc: usize) -> Self {
        Self::Vsugs {
            alpha,
            trunc,
            rule: AllocationRule::Soft,
        }
    }

    pub fn default_criterion(&self) -> Criterion {
        match self {
            Self::Sugs { .. } => Criterion::PseudoMarginal,
            Self::Vsugs { .. } => Criterion::LowerBound,
        }
    }

    pub fn fit<C: Conjugate>(&self, data: &Dataset, prior: &C) -> Result<Fit<C>> {
        match *self {
            Self::Sugs { alpha, trunc } => sugs_fit(data, alpha, prior.clone(), trunc).map(Fit::Sugs),
            Self::Vsugs { alpha, trunc, rule } => {
                vsugs_fit_with(data, alpha, trunc, prior.clone(), rule).map(Fit::Vsugs)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// SUGS: `ln p(y | δ̂)`. VSUGS: `Σ_i ln Σ_j q_ij t_j(y_i)`.
    PseudoMarginal,
    /// VSUGS only: the accumulated variational bound.
    LowerBound,
}

#[derive(Debug, Clone)]
pub enum Fit<C: Conjugate> {
    Sugs(SugsFit<C>),
    Vsugs(VsugsFit<C>),
}

impl<C: Conjugate> Fit<C> {
    pub fn score(&self, criterion: Criterion) -> Result<f64> {
        match (self, criterion) {
            (Self::Sugs(f), Criterion::PseudoMarginal) => Ok(f.pseudo_marginal()),
            (Self::Sugs(_), Criterion::LowerBound) => Err(DpmError::InvalidParameter {
                name: "criterion",
                value: f64::NAN,
                reason: "SUGS has no variational bound",
            }),
            (Self::Vsugs(f), Criterion::PseudoMarginal) => Ok(f.ln_evidence()),
            (Self::Vsugs(f), Criterion::LowerBound) => Ok(f.lower_bound()),
        }
    }

    pub fn predictive(&self) -> MixturePredictive<C> {
        match self {
            Self::Sugs(f) => f.predictive(),
            Self::Vsugs(f) => f.predictive(),
        }
    }

    pub fn num_clusters(&self) -> usize {
        match self {
            Self::Sugs(f) => f.num_clusters(),
            Self::Vsugs(f) => f.state().num_clusters(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingSearchConfig {
    pub num_orderings: usize,
    pub seed: u64,
    /// `None` uses the engine's default.
    pub criterion: Option<Criterion>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for OrderingSearchConfig {
    fn default() -> Self {
        Self {
            num_orderings: 50,
            seed: 0,
            criterion: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrderingSearch<C: Conjugate> {
    pub best_fit: Fit<C>,
    pub best_index: usize,
    pub best_permutation: Vec<usize>,
    /// Score of each ordering; failed orderings score `−∞`.
    pub scores: Vec<f64>,
}

/// Fits every ordering and returns the one with the highest score, ties
/// going to the smallest ordering index.
///
/// ```
/// use dpm_seq::{model::NigParams, ordering::*, Dataset};
///
/// let data = Dataset::univariate(vec![0.0, 3.0, 0.2, 2.9, -0.1]).unwrap();
/// let prior = NigParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
/// let cfg = OrderingSearchConfig { num_orderings: 8, ..Default::default() };
/// let out = search_orderings(&data, &prior, &EngineSpec::vsugs(1.0, 10), &cfg).unwrap();
/// let max = out.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
/// assert_eq!(out.scores[out.best_index], max);
/// ```
pub fn search_orderings<C: Conjugate>(
    data: &Dataset,
    prior: &C,
    engine: &EngineSpec,
    cfg: &OrderingSearchConfig,
) -> Result<OrderingSearch<C>> {
    if data.is_empty() {
        return Err(DpmError::EmptyData);
    }
    if cfg.num_orderings == 0 {
        return Err(DpmError::InvalidParameter {
            name: "num_orderings",
            value: 0.0,
            reason: "at least one ordering is required",
        });
    }
    let criterion = cfg.criterion.unwrap_or_else(|| engine.default_criterion());
    if matches!((engine, criterion), (EngineSpec::Sugs { .. }, Criterion::LowerBound)) {
        return Err(DpmError::InvalidParameter {
            name: "criterion",
            value: f64::NAN,
            reason: "SUGS has no variational bound",
        });
    }

    let score_one = |index: usize| -> f64 {
        let perm = permutation(data.len(), cfg.seed, index as u64);
        engine
            .fit(&data.permuted(&perm), prior)
            .and_then(|f| f.score(criterion))
            .ok()
            .filter(|s| !s.is_nan())
            .unwrap_or(f64::NEG_INFINITY)
    };
    let run = || -> Vec<f64> { (0..cfg.num_orderings).into_par_iter().map(score_one).collect() };
    let scores = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|_| DpmError::InvalidParameter {
                name: "threads",
                value: t as f64,
                reason: "could not build a worker pool",
            })?
            .install(run),
        None => run(),
    };

    let mut best_index = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best_index] {
            best_index = i;
        }
    }
    let best_permutation = permutation(data.len(), cfg.seed, best_index as u64);
    let best_fit = engine.fit(&data.permuted(&best_permutation), prior)?;
    Ok(OrderingSearch {
        best_fit,
        best_index,
        best_permutation,
        scores,
    })
}
