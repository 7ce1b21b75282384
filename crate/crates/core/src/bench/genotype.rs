use crate::data::Dataset;
use crate::error::{DpmError, Result};
use crate::model::{logsumexp, Conjugate};
use crate::sugs::SugsFit;
use crate::vsugs::VsugsFit;

/// Fixed prior probability of each class.
pub const CLASS_WEIGHT: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenotypeEngine {
    Sugs,
    Vsugs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenotypeWarning {
    /// Classes `a` and `b` start from the same prior, so which of them
    /// captures which cluster is arbitrary.
    DegenerateAnchors { a: usize, b: usize },
}

#[derive(Debug, Clone)]
pub enum ClassModel<C: Conjugate> {
    Sugs(SugsFit<C>),
    Vsugs(VsugsFit<C>),
}

impl<C: Conjugate> ClassModel<C> {
    fn ln_predictive(&self, y: &[f64]) -> f64 {
        match self {
            Self::Sugs(f) => f.predictive().ln_density(y),
            Self::Vsugs(f) => f.predictive().ln_density(y),
        }
    }

    pub fn num_clusters(&self) -> usize {
        match self {
            Self::Sugs(f) => f.num_clusters(),
            Self::Vsugs(f) => f.state().num_clusters(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThreeClassFit<C: Conjugate> {
    pub classes: [ClassModel<C>; 3],
    /// Class probabilities of each observation at the time it was absorbed.
    pub responsibilities: Vec<[f64; 3]>,
    pub labels: Vec<usize>,
    pub warnings: Vec<GenotypeWarning>,
}

/// Sequential three-class mixture of Dirichlet process mixtures.
///
/// Each observation is scored against each class's current predictive with
/// equal class weights. The soft engine then updates every class with the
/// point down-weighted by its responsibility; the hard engine updates only
/// the most probable class.
pub fn three_class_fit<C: Conjugate + PartialEq>(
    data: &Dataset,
    priors: [C; 3],
    alpha: f64,
    trunc: usize,
    engine: GenotypeEngine,
) -> Result<ThreeClassFit<C>> {
    if data.is_empty() {
        return Err(DpmError::EmptyData);
    }
    let mut warnings = Vec::new();
    for a in 0..3 {
        for b in a + 1..3 {
            if priors[a] == priors[b] {
                warnings.push(GenotypeWarning::DegenerateAnchors { a, b });
            }
        }
    }
    let make = |p: &C| -> Result<ClassModel<C>> {
        Ok(match engine {
            GenotypeEngine::Sugs => ClassModel::Sugs(SugsFit::new(p.clone(), alpha, Some(trunc))?),
            GenotypeEngine::Vsugs => ClassModel::Vsugs(VsugsFit::new(p.clone(), alpha, trunc)?),
        })
    };
    let mut classes = [make(&priors[0])?, make(&priors[1])?, make(&priors[2])?];
    let mut responsibilities = Vec::with_capacity(data.len());
    let mut labels = Vec::with_capacity(data.len());
    for y in data.rows() {
        crate::model::check_observation(y, priors[0].dim())?;
        let scores: Vec<f64> = classes.iter().map(|c| CLASS_WEIGHT.ln() + c.ln_predictive(y)).collect();
        let norm = logsumexp(&scores);
        if !norm.is_finite() {
            return Err(DpmError::NumericUnderflow);
        }
        let r = [
            (scores[0] - norm).exp(),
            (scores[1] - norm).exp(),
            (scores[2] - norm).exp(),
        ];
        let best = crate::model::argmax_index(&r);
        for (c, class) in classes.iter_mut().enumerate() {
            match class {
                ClassModel::Sugs(f) => {
                    if c == best {
                        f.step(y)?;
                    }
                }
                ClassModel::Vsugs(f) => {
                    if r[c] > 0.0 {
                        f.step_weighted(y, r[c])?;
                    }
                }
            }
        }
        responsibilities.push(r);
        labels.push(best);
    }
    Ok(ThreeClassFit {
        classes,
        responsibilities,
        labels,
        warnings,
    })
}

/// Anchors from the lower, middle and upper thirds of the data sorted by
/// the first coordinate: the coordinate-wise median of each third.
pub fn quantile_anchors(data: &Dataset) -> Result<[Vec<f64>; 3]> {
    if data.len() < 3 {
        return Err(DpmError::EmptyData);
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.sort_by(|&a, &b| data.row(a)[0].total_cmp(&data.row(b)[0]));
    let n = idx.len();
    let third = |k: usize| -> Vec<f64> {
        let slice = &idx[k * n / 3..(k + 1) * n / 3];
        (0..data.dim())
            .map(|d| {
                let mut v: Vec<f64> = slice.iter().map(|&i| data.row(i)[d]).collect();
                v.sort_by(f64::total_cmp);
                v[v.len() / 2]
            })
            .collect()
    };
    Ok([third(0), third(1), third(2)])
}

/// `log₂` of each intensity followed by quantile normalization of the two
/// channels onto their average sorted distribution.
pub fn normalize_two_channel(data: &Dataset) -> Result<Dataset> {
    if data.dim() != 2 {
        return Err(DpmError::DimensionMismatch {
            expected: 2,
            found: data.dim(),
        });
    }
    if data.is_empty() {
        return Err(DpmError::EmptyData);
    }
    if data.values().iter().any(|v| !(*v > 0.0)) {
        return Err(DpmError::InvalidParameter {
            name: "intensity",
            value: data.values().iter().copied().find(|v| !(*v > 0.0)).unwrap_or(f64::NAN),
            reason: "intensities must be positive for a log transform",
        });
    }
    let n = data.len();
    let logged: Vec<f64> = data.values().iter().map(|v| v.log2()).collect();
    let mut order: [Vec<usize>; 2] = [(0..n).collect(), (0..n).collect()];
    for (c, o) in order.iter_mut().enumerate() {
        o.sort_by(|&a, &b| logged[2 * a + c].total_cmp(&logged[2 * b + c]));
    }
    let target: Vec<f64> = (0..n)
        .map(|r| 0.5 * (logged[2 * order[0][r]] + logged[2 * order[1][r] + 1]))
        .collect();
    let mut out = vec![0.0; 2 * n];
    for (c, o) in order.iter().enumerate() {
        for (r, &i) in o.iter().enumerate() {
            out[2 * i + c] = target[r];
        }
    }
    let normalized = Dataset::from_rows(2, out)?;
    match data.labels() {
        Some(l) => normalized.with_labels(l.to_vec()),
        None => Ok(normalized),
    }
}
