mod common;

use common::*;
use dpm_seq::bench::{gen_mixture, SyntheticSpec};
use dpm_seq::model::NigParams;
use dpm_seq::sugs::sugs_fit;
use dpm_seq::vsugs::vsugs_fit;
use dpm_seq::Dataset;
use proptest::prelude::*;

fn unit() -> NigParams {
    NigParams::new(0.0, 1.0, 1.0, 1.0).unwrap()
}

#[test]
fn sugs_predictive_integrates_to_one() {
    for (alpha, trunc) in [(0.1, None), (1.0, None), (5.0, Some(4))] {
        let data = gen_mixture(&SyntheticSpec::new(1.0, 200, 17)).unwrap();
        let fit = sugs_fit(&data, alpha, unit(), trunc).unwrap();
        let total = integrate_nig_mixture(&fit.predictive());
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }
}

#[test]
fn vsugs_predictive_integrates_to_one() {
    for (alpha, trunc) in [(0.1, 20), (2.0, 50)] {
        let data = gen_mixture(&SyntheticSpec::new(0.5, 200, 3)).unwrap();
        let fit = vsugs_fit(&data, alpha, trunc, unit()).unwrap();
        let total = integrate_nig_mixture(&fit.predictive());
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }
}

#[test]
fn vsugs_single_label_predictive_is_pooled_t() {
    let ys = [0.3, -1.0, 2.5, 0.7, 0.1];
    let data = Dataset::univariate(ys.to_vec()).unwrap();
    let fit = vsugs_fit(&data, 1.0, 1, unit()).unwrap();
    let (rho, nu, a, b) = batch_nig(unit().params(), &ys);
    for y in [-2.0, 0.0, 0.4, 3.0] {
        let expect = t_density(2.0 * a, rho, b * (nu + 1.0) / a, y);
        assert!((fit.predictive().density(&[y]) - expect).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pseudo_marginal_equals_batch_cluster_marginals(
        ys in prop::collection::vec(-8.0..8.0f64, 1..80),
        alpha in 0.05..5.0f64,
    ) {
        let data = Dataset::univariate(ys.clone()).unwrap();
        let fit = sugs_fit(&data, alpha, unit(), None).unwrap();
        let mut total = 0.0;
        for j in 0..fit.num_clusters() {
            let members: Vec<f64> = ys.iter().zip(fit.allocations()).filter(|(_, l)| **l == j).map(|(y, _)| *y).collect();
            total += nig_log_marginal(unit().params(), &members);
        }
        prop_assert!((fit.pseudo_marginal() - total).abs() < 1e-8 * total.abs().max(1.0));
    }

    #[test]
    fn single_label_vsugs_is_the_batch_posterior(ys in prop::collection::vec(-8.0..8.0f64, 1..60)) {
        let data = Dataset::univariate(ys.clone()).unwrap();
        let fit = vsugs_fit(&data, 0.7, 1, unit()).unwrap();
        let got = fit.state().clusters()[0].params();
        let expect = batch_nig(unit().params(), &ys);
        prop_assert!((got.0 - expect.0).abs() < 1e-10 * expect.0.abs().max(1.0));
        prop_assert!((got.1 - expect.1).abs() < 1e-12);
        prop_assert!((got.2 - expect.2).abs() < 1e-12);
        prop_assert!((got.3 - expect.3).abs() < 1e-10 * expect.3);
        let closed = nig_log_marginal(unit().params(), &ys);
        prop_assert!((fit.lower_bound() - closed).abs() < 1e-8 * closed.abs().max(1.0));
    }
}
