mod common;

use common::integrate_line;
use dpm_seq::bench::{gen_mixture, true_density, SyntheticSpec, MIXTURE_WEIGHTS};

#[test]
fn sample_mean_matches_mixture_mean() {
    let dmu = 2.0;
    let data = gen_mixture(&SyntheticSpec::new(dmu, 1_000_000, 12)).unwrap();
    let n = data.len() as f64;
    let mean = data.values().iter().sum::<f64>() / n;
    let pop_mean = 0.4 * -dmu + 0.3 * dmu;
    // E[y²] = Σ w (v + m²).
    let second = 0.4 * (0.25 + dmu * dmu) + 0.3 * 0.5 + 0.3 * (2.0 + dmu * dmu);
    let sd = (second - pop_mean * pop_mean).sqrt();
    assert!((mean - pop_mean).abs() < 4.0 * sd / n.sqrt());
    let var = data.values().iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    assert!((var - sd * sd).abs() < 0.01 * sd * sd);
}

#[test]
fn component_frequencies_match_weights() {
    let data = gen_mixture(&SyntheticSpec::new(1.0, 100_000, 4)).unwrap();
    let n = data.len() as f64;
    for (k, w) in MIXTURE_WEIGHTS.iter().enumerate() {
        let f = data.labels().unwrap().iter().filter(|l| **l == k as i64).count() as f64 / n;
        assert!((f - w).abs() < 4.0 * (w * (1.0 - w) / n).sqrt(), "{k}: {f}");
    }
}

#[test]
fn true_density_integrates_to_one_with_expected_mean() {
    for dmu in [0.0, 0.2, 1.0, 5.0] {
        let knots = [-dmu - 1.0, -dmu, 0.0, dmu, dmu + 1.0];
        let total = integrate_line(|y| true_density(dmu, y), &knots, 2.0);
        assert!((total - 1.0).abs() < 1e-10, "{total}");
        let mean = integrate_line(|y| y * true_density(dmu, y), &knots, 2.0);
        assert!((mean + 0.1 * dmu).abs() < 1e-9);
    }
}
