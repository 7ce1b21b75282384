mod common;

use common::*;
use dpm_seq::model::{Conjugate, Density, MvStudentT, NigParams, NiwParams, StudentT};
use proptest::prelude::*;

#[test]
fn nig_predictive_integrates_to_one() {
    for (rho, nu, a, b) in [(0.0, 1.0, 1.0, 1.0), (3.0, 0.2, 2.5, 0.4), (-1.0, 5.0, 1.0, 10.0), (0.0, 1e-3, 40.0, 40.0)] {
        let t = NigParams::new(rho, nu, a, b).unwrap().predictive();
        let s = t.scale2().sqrt();
        let total = integrate_line(|y| t.density_at(y), &[rho - s, rho, rho + s], s);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }
}

#[test]
fn nig_predictive_matches_direct_t_formula() {
    let p = NigParams::new(0.5, 0.7, 1.8, 2.2).unwrap();
    let (rho, nu, a, b) = p.params();
    for y in [-4.0, -0.3, 0.5, 2.0, 30.0] {
        let direct = t_density(2.0 * a, rho, b * (nu + 1.0) / a, y);
        assert!((p.predictive_density(y) - direct).abs() < 1e-13 * direct.max(1e-300) + 1e-300);
    }
}

#[test]
fn predictive_is_the_one_step_marginal() {
    let prior = NigParams::new(0.3, 2.0, 1.5, 0.8).unwrap();
    for y in [-2.0, 0.0, 1.7] {
        let lhs = prior.predictive().ln_density_at(y);
        let rhs = nig_log_marginal(prior.params(), &[y]);
        assert!((lhs - rhs).abs() < 1e-12);
    }
}

#[test]
fn niw_predictive_integrates_to_one_in_two_dimensions() {
    let p = NiwParams::new(vec![0.5, -1.0], 2.0, vec![1.0, 0.3, 0.3, 0.5], 5.0)
        .unwrap()
        .weighted_update(&[0.2, 0.1], 1.0)
        .unwrap();
    let t = p.predictive();
    let inner = |x: f64| integrate_line(|y| t.density(&[x, y]), &[-1.0, 0.0, 1.0], 1.0);
    let total = integrate_line(inner, &[-0.5, 0.5, 1.5], 1.0);
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}

#[test]
fn niw_in_one_dimension_is_nig() {
    let nig = NigParams::new(0.4, 0.5, 2.0, 1.5).unwrap();
    let niw = NiwParams::new(vec![0.4], 2.0, vec![3.0], 4.0).unwrap();
    let ys = [0.3, -1.2, 2.2, 0.0];
    let a = ys.iter().fold(nig, |p, y| p.update(*y, 0.6).unwrap());
    let b = ys.iter().fold(niw, |p, y| p.weighted_update(&[*y], 0.6).unwrap());
    for y in [-3.0, 0.1, 1.0] {
        let l = a.predictive().ln_density_at(y);
        let r = b.predictive().ln_density(&[y]);
        assert!((l - r).abs() < 1e-10);
    }
}

#[test]
fn mv_t_with_identity_scale_factorizes_at_origin() {
    let t = MvStudentT::new(3.0, vec![0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]).unwrap();
    // At the centre: Γ((ν+2)/2) / (Γ(ν/2) ν π).
    let expect = (statrs::function::gamma::ln_gamma(2.5) - statrs::function::gamma::ln_gamma(1.5)).exp() / (3.0 * std::f64::consts::PI);
    assert!((t.density(&[0.0, 0.0]) - expect).abs() < 1e-14);
    let _ = StudentT::new(3.0, 0.0, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sequential_unit_updates_equal_batch(
        ys in prop::collection::vec(-20.0..20.0f64, 1..60),
        rho in -5.0..5.0f64,
        nu in 0.05..20.0f64,
        a in 0.5..10.0f64,
        b in 0.1..10.0f64,
    ) {
        let prior = NigParams::new(rho, nu, a, b).unwrap();
        let seq = ys.iter().fold(prior, |p, y| p.update(*y, 1.0).unwrap()).params();
        let batch = batch_nig((rho, nu, a, b), &ys);
        for (s, t) in [(seq.0, batch.0), (seq.1, batch.1), (seq.2, batch.2), (seq.3, batch.3)] {
            prop_assert!((s - t).abs() <= 1e-10 * t.abs().max(1.0), "{s} vs {t}");
        }
    }

    #[test]
    fn chain_rule_marginal_equals_closed_form(ys in prop::collection::vec(-10.0..10.0f64, 1..30)) {
        let prior = NigParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let chain = prior.ln_marginal(ys.iter().map(std::slice::from_ref)).unwrap();
        let closed = nig_log_marginal(prior.params(), &ys);
        prop_assert!((chain - closed).abs() < 1e-9 * closed.abs().max(1.0));
    }
}
