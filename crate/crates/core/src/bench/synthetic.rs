use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::data::Dataset;
use crate::error::{check_finite, check_positive, DpmError, Result};

/// Component weights of the synthetic mixture.
pub const MIXTURE_WEIGHTS: [f64; 3] = [0.4, 0.3, 0.3];

/// Separations covered by the benchmark grid.
pub const STUDIED_DMU_RANGE: (f64, f64) = (0.0, 5.0);

/// `0.4 N(−dμ, v₁) + 0.3 N(0, v₂) + 0.3 N(dμ, v₃)` with variances
/// `(v₁, v₂, v₃) = (0.25, 0.5, 2)` by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub dmu: f64,
    pub n: usize,
    pub seed: u64,
    pub variances: [f64; 3],
}

impl SyntheticSpec {
    pub fn new(dmu: f64, n: usize, seed: u64) -> Self {
        Self {
            dmu,
            n,
            seed,
            variances: [0.25, 0.5, 2.0],
        }
    }

    pub fn means(&self) -> [f64; 3] {
        [-self.dmu, 0.0, self.dmu]
    }

    pub fn in_studied_range(&self) -> bool {
        (STUDIED_DMU_RANGE.0..=STUDIED_DMU_RANGE.1).contains(&self.dmu)
    }

    fn validate(&self) -> Result<()> {
        check_finite("dmu", self.dmu)?;
        if self.n == 0 {
            return Err(DpmError::EmptyData);
        }
        for v in self.variances {
            check_positive("variance", v)?;
        }
        Ok(())
    }

    pub fn density(&self, y: f64) -> f64 {
        self.means()
            .iter()
            .zip(self.variances)
            .zip(MIXTURE_WEIGHTS)
            .map(|((m, v), w)| w * (-(y - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt())
            .sum()
    }
}

/// Draws `spec.n` observations. Labels record the generating component.
///
/// ```
/// use dpm_seq::bench::{gen_mixture, SyntheticSpec};
///
/// let data = gen_mixture(&SyntheticSpec::new(1.0, 100, 3)).unwrap();
/// assert_eq!(data.len(), 100);
/// assert!(data.labels().unwrap().iter().all(|l| (0..3).contains(l)));
/// ```
pub fn gen_mixture(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pick = WeightedIndex::new(MIXTURE_WEIGHTS).expect("constant weights are valid");
    let comps: Vec<Normal<f64>> = spec
        .means()
        .iter()
        .zip(spec.variances)
        .map(|(m, v)| Normal::new(*m, v.sqrt()).expect("validated variance"))
        .collect();
    let mut values = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let k = pick.sample(&mut rng);
        values.push(comps[k].sample(&mut rng));
        labels.push(k as i64);
    }
    Dataset::univariate(values)?.with_labels(labels)
}

/// Density of the default-variance mixture at `y`.
pub fn true_density(dmu: f64, y: f64) -> f64 {
    SyntheticSpec::new(dmu, 1, 0).density(y)
}
