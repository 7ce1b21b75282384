//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use dpm_seq::model::{MixturePredictive, NigParams, NiwParams};
use quadrature::double_exponential::integrate;
use statrs::function::gamma::ln_gamma;

const SEGMENT_TOL: f64 = 1e-11;

/// `∫ f` over the real line: tanh-sinh on each gap between the sorted
/// `knots`, and a tangent substitution on each unbounded tail.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, knots: &[f64], tail_scale: f64) -> f64 {
    let mut k: Vec<f64> = knots.iter().copied().filter(|x| x.is_finite()).collect();
    k.sort_by(f64::total_cmp);
    k.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    assert!(!k.is_empty());
    let (lo, hi) = (k[0], *k.last().unwrap());
    let s = tail_scale;
    let left = integrate(|t: f64| {
        let c = t.cos();
        f(lo - s * t.tan()) * s / (c * c)
    }, 0.0, FRAC_PI_2, SEGMENT_TOL);
    let right = integrate(|t: f64| {
        let c = t.cos();
        f(hi + s * t.tan()) * s / (c * c)
    }, 0.0, FRAC_PI_2, SEGMENT_TOL);
    let mut total = left.integral + right.integral;
    for w in k.windows(2) {
        total += integrate(&f, w[0], w[1], SEGMENT_TOL).integral;
    }
    total
}

/// Knots at each component's centre and one scale either side.
fn nig_knots(m: &MixturePredictive<NigParams>) -> (Vec<f64>, f64) {
    let mut knots = Vec::new();
    let mut widest: f64 = 1.0;
    for c in m.components() {
        let t = c.predictive();
        let s = t.scale2().sqrt();
        widest = widest.max(s);
        knots.extend([t.loc() - s, t.loc(), t.loc() + s]);
    }
    (knots, widest)
}

pub fn integrate_nig_mixture(m: &MixturePredictive<NigParams>) -> f64 {
    let (knots, scale) = nig_knots(m);
    integrate_line(|y| m.density(&[y]), &knots, scale)
}

/// Direct batch normal–inverse-gamma posterior from the data moments.
pub fn batch_nig(prior: (f64, f64, f64, f64), ys: &[f64]) -> (f64, f64, f64, f64) {
    let (rho, nu, a, b) = prior;
    let n = ys.len() as f64;
    if ys.is_empty() {
        return prior;
    }
    let mean = ys.iter().sum::<f64>() / n;
    let ss: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let kappa = 1.0 / nu;
    let kappa_n = kappa + n;
    let rho_n = (kappa * rho + n * mean) / kappa_n;
    let a_n = a + n / 2.0;
    let b_n = b + 0.5 * ss + 0.5 * kappa * n * (mean - rho).powi(2) / kappa_n;
    (rho_n, 1.0 / kappa_n, a_n, b_n)
}

/// Closed-form log marginal likelihood of `ys` under a normal–inverse-gamma
/// prior.
pub fn nig_log_marginal(prior: (f64, f64, f64, f64), ys: &[f64]) -> f64 {
    let (_, nu, a, b) = prior;
    let (_, nu_n, a_n, b_n) = batch_nig(prior, ys);
    let n = ys.len() as f64;
    ln_gamma(a_n) - ln_gamma(a) + a * b.ln() - a_n * b_n.ln() + 0.5 * (nu_n / nu).ln()
        - 0.5 * n * (2.0 * PI).ln()
}

/// Student-t density written out directly.
pub fn t_density(dof: f64, loc: f64, scale2: f64, y: f64) -> f64 {
    let z = (y - loc).powi(2) / scale2;
    (ln_gamma((dof + 1.0) / 2.0) - ln_gamma(dof / 2.0) - 0.5 * (dof * PI * scale2).ln()
        - (dof + 1.0) / 2.0 * (1.0 + z / dof).ln())
    .exp()
}

pub fn niw_unit(d: usize) -> NiwParams {
    NiwParams::isotropic(vec![0.0; d], 1.0, 1.0, d as f64 + 1.0).unwrap()
}

/// Three classes in the plane centred at `centers`; each class is itself an
/// equal mixture of two isotropic normals offset by `±spread` along the
/// diagonal, with standard deviation `sd`.
pub fn three_class_data(
    n: usize,
    seed: u64,
    centers: [[f64; 2]; 3],
    spread: f64,
    sd: f64,
) -> (dpm_seq::Dataset, Vec<usize>) {
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sd).unwrap();
    let mut values = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.random_range(0..3);
        let side = if rng.random::<bool>() { spread } else { -spread };
        values.push(centers[c][0] + side + noise.sample(&mut rng));
        values.push(centers[c][1] + side + noise.sample(&mut rng));
        labels.push(c);
    }
    (dpm_seq::Dataset::from_rows(2, values).unwrap(), labels)
}

pub fn anchored_priors(anchors: [[f64; 2]; 3], cov: f64) -> [NiwParams; 3] {
    // E[Σ] = Ψ/(df − d − 1) = cov·I with df = 6.
    anchors.map(|a| NiwParams::isotropic(a.to_vec(), 1.0, 3.0 * cov, 6.0).unwrap())
}

/// `∫ f` for a mixture, integrating each component over the line
/// separately and summing with the mixture weights.
pub fn integrate_nig_mixture_by_component(m: &MixturePredictive<NigParams>) -> f64 {
    m.weights()
        .iter()
        .zip(m.components())
        .map(|(w, c)| {
            let t = c.predictive();
            let s = t.scale2().sqrt();
            w * integrate_line(|y| t.density_at(y), &[t.loc() - s, t.loc(), t.loc() + s], s)
        })
        .sum()
}
