//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any pass/fail criterion fails.

mod common;

use std::sync::Mutex;
use std::time::Instant;

use common::*;
use dpm_seq::bench::*;
use dpm_seq::model::{AllocationDistribution, MixturePredictive, NigParams};
use dpm_seq::oracle::{collapsed_gibbs, enumerate_exact, GibbsConfig};
use dpm_seq::ordering::Fit;
use dpm_seq::sugs::sugs_fit;
use dpm_seq::vsugs::{vsugs_fit, vsugs_fit_with, AllocationRule};
use dpm_seq::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const CONJUGACY_TOL: f64 = 1e-10;
const HARD_EQUIV_TOL: f64 = 1e-10;
const TIGHTNESS_TOL: f64 = 1e-8;
const TV_TOL: f64 = 0.05;
const MC_SIGMAS: f64 = 3.0;
const GIBBS_SWEEPS: usize = 20_000;
const TABLE_VSUGS_MAX: f64 = 0.035;
const SCALING_TOL: f64 = 0.25;
const NORMALIZATION_TOL: f64 = 1e-9;
const INTEGRAL_TOL: f64 = 1e-6;
const GENOTYPE_MIN_ACCURACY: f64 = 0.99;

fn unit() -> NigParams {
    NigParams::new(0.0, 1.0, 1.0, 1.0).unwrap()
}

/// Records normalization checks made while other criteria run.
#[derive(Default)]
struct Normalization {
    rows_checked: usize,
    worst_row: f64,
    integrals_checked: usize,
    worst_integral: f64,
}

impl Normalization {
    fn row(&mut self, probs: &[f64]) {
        self.rows_checked += 1;
        self.worst_row = self.worst_row.max((probs.iter().sum::<f64>() - 1.0).abs());
    }

    fn allocations(&mut self, rows: &[AllocationDistribution]) {
        for r in rows {
            self.row(r.probs());
        }
    }

    fn integral(&mut self, value: f64) {
        self.integrals_checked += 1;
        self.worst_integral = self.worst_integral.max((value - 1.0).abs());
    }

    fn mixture(&mut self, m: &MixturePredictive<NigParams>, whole: bool) {
        self.row(m.weights());
        self.integral(integrate_nig_mixture_by_component(m));
        if whole {
            self.integral(integrate_nig_mixture(m));
        }
    }

    fn fit(&mut self, fit: &Fit<NigParams>, whole: bool) {
        if let Fit::Vsugs(v) = fit {
            self.allocations(v.allocations());
        }
        self.mixture(&fit.predictive(), whole);
    }
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, text: String) {
        if !pass {
            self.failures += 1;
        }
        println!("criterion {id} [{}] {text}", if pass { "PASS" } else { "FAIL" });
    }

    fn diagnostic(&mut self, id: &str, text: String) {
        println!("criterion {id} [DIAGNOSTIC] {text}");
    }
}

fn conjugacy() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let prior = (
            rng.random_range(-5.0..5.0),
            rng.random_range(0.05..20.0),
            rng.random_range(0.5..10.0),
            rng.random_range(0.1..10.0),
        );
        let n = rng.random_range(1..60);
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let p = NigParams::new(prior.0, prior.1, prior.2, prior.3).unwrap();
        let seq = ys.iter().fold(p, |p, y| p.update(*y, 1.0).unwrap()).params();
        let batch = batch_nig(prior, &ys);
        for d in [seq.0 - batch.0, seq.1 - batch.1, seq.2 - batch.2, seq.3 - batch.3] {
            worst = worst.max(d.abs());
        }
    }
    (
        worst <= CONJUGACY_TOL,
        format!("1000 cases; max field deviation {worst:.2e} (tol {CONJUGACY_TOL:.0e})"),
    )
}

fn hard_equivalence(norm: &mut Normalization) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut label_mismatches = 0;
    for k in 0..100 {
        let dmu = rng.random_range(0.0..3.0);
        let alpha = rng.random_range(0.1..10.0);
        let trunc = rng.random_range(1..40);
        let data = gen_mixture(&SyntheticSpec::new(dmu, 200, 1000 + k)).unwrap();
        let hard = vsugs_fit_with(&data, alpha, trunc, unit(), AllocationRule::HardArgmax).unwrap();
        let sugs = sugs_fit(&data, alpha, unit(), Some(trunc)).unwrap();
        norm.allocations(hard.allocations());
        norm.mixture(&hard.predictive(), k == 0);
        norm.mixture(&sugs.predictive(), k == 0);
        if hard.map_labels() != sugs.allocations() || hard.state().num_clusters() != sugs.num_clusters() {
            label_mismatches += 1;
            continue;
        }
        for (a, b) in hard.state().clusters().iter().zip(sugs.state().clusters()) {
            let (a, b) = (a.params(), b.params());
            for d in [a.0 - b.0, a.1 - b.1, a.2 - b.2, a.3 - b.3] {
                worst = worst.max(d.abs());
            }
        }
    }
    (
        label_mismatches == 0 && worst <= HARD_EQUIV_TOL,
        format!(
            "100 datasets, N=200; allocation mismatches {label_mismatches}; max parameter deviation {worst:.2e} (tol {HARD_EQUIV_TOL:.0e})"
        ),
    )
}

fn tightness(norm: &mut Normalization) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let dmu = rng.random_range(0.0..3.0);
        let alpha = rng.random_range(0.1..10.0);
        let data = gen_mixture(&SyntheticSpec::new(dmu, 50, 2000 + k)).unwrap();
        let fit = vsugs_fit(&data, alpha, 1, unit()).unwrap();
        norm.allocations(fit.allocations());
        norm.mixture(&fit.predictive(), k == 0);
        let exact = nig_log_marginal(unit().params(), data.values());
        worst = worst.max((fit.lower_bound() - exact).abs());
    }
    (
        worst <= TIGHTNESS_TOL,
        format!("100 datasets, N=50; max |bound − Σ ln t-predictive| {worst:.2e} (tol {TIGHTNESS_TOL:.0e})"),
    )
}

struct Instance {
    data: Dataset,
    alpha: f64,
    trunc: usize,
    prior: NigParams,
}

/// Small clumpy datasets: up to three clumps at well separated centres.
fn enumeration_instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let prior = NigParams::new(0.0, 10.0, 2.0, 0.5).unwrap();
    let jitter = Normal::new(0.0, 0.3).unwrap();
    (0..50)
        .map(|_| {
            let n = rng.random_range(4..=8);
            let trunc = rng.random_range(1..=3);
            let alpha = rng.random_range(0.1..2.0);
            let clumps = rng.random_range(1..=3);
            let centres = [-5.0, 0.0, 5.0];
            let values = (0..n)
                .map(|_| centres[rng.random_range(0..clumps)] + jitter.sample(&mut rng))
                .collect();
            Instance {
                data: Dataset::univariate(values).unwrap(),
                alpha,
                trunc,
                prior,
            }
        })
        .collect()
}

fn enumeration_agreement(instances: &[Instance], norm: &mut Normalization) -> (bool, String) {
    let grid: Vec<f64> = (0..21).map(|i| -8.0 + 0.8 * i as f64).collect();
    let mut worst_tv: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut outside = 0;
    let mut slowest: f64 = 0.0;
    for (k, inst) in instances.iter().enumerate() {
        let start = Instant::now();
        let exact = enumerate_exact(&inst.data, inst.alpha, Some(inst.trunc), &inst.prior).unwrap();
        let cfg = GibbsConfig::new(500, GIBBS_SWEEPS, 40 + k as u64).with_trunc(Some(inst.trunc));
        let samples = collapsed_gibbs(&inst.data, inst.alpha, &inst.prior, &cfg).unwrap();
        let freq = samples.partition_frequencies();
        let tv = 0.5
            * exact
                .partitions()
                .iter()
                .map(|(l, p)| (p - freq.get(l).copied().unwrap_or(0.0)).abs())
                .sum::<f64>();
        worst_tv = worst_tv.max(tv);
        let pred = samples.predictive();
        for y in &grid {
            let draws = pred.pointwise_draws(&[*y]);
            let est = draws.iter().sum::<f64>() / draws.len() as f64;
            let truth = exact.density(&[*y]);
            let se = pred.mc_standard_error(&[*y]);
            let dev = (est - truth).abs();
            // When every draw gives the same density the standard error is
            // zero; deviations at the level of floating-point rounding then
            // count as agreement.
            let z = if dev <= 1e-12 * truth { 0.0 } else { dev / se };
            worst_z = worst_z.max(z);
            if z > MC_SIGMAS {
                outside += 1;
            }
        }
        norm.mixture(exact.predictive(), false);
        slowest = slowest.max(start.elapsed().as_secs_f64());
    }
    (
        worst_tv < TV_TOL && outside == 0,
        format!(
            "50 instances, N≤8, T≤3, {GIBBS_SWEEPS} sweeps; max TV {worst_tv:.4} (tol {TV_TOL}); predictive points beyond {MC_SIGMAS} SE: {outside}/{} (max z {worst_z:.2}); slowest instance {slowest:.2}s",
            50 * grid.len()
        ),
    )
}

fn lower_bound_gap(instances: &[Instance]) -> String {
    let gaps: Vec<f64> = instances
        .iter()
        .map(|inst| {
            let exact = enumerate_exact(&inst.data, inst.alpha, Some(inst.trunc), &inst.prior).unwrap();
            let fit = vsugs_fit(&inst.data, inst.alpha, inst.trunc, inst.prior).unwrap();
            fit.lower_bound() - exact.ln_marginal()
        })
        .collect();
    let mut sorted = gaps.clone();
    sorted.sort_by(f64::total_cmp);
    let positive = gaps.iter().filter(|g| **g > 0.0).count();
    let list: Vec<String> = gaps.iter().map(|g| format!("{g:.3}")).collect();
    format!(
        "bound − exact log marginal over {} instances: min {:.3}, median {:.3}, max {:.3}, positive {positive}; per instance [{}]",
        gaps.len(),
        sorted[0],
        sorted[sorted.len() / 2],
        sorted[sorted.len() - 1],
        list.join(", ")
    )
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn observed_grid(grid: &ExperimentGrid, norm: &Mutex<Normalization>) -> Vec<GridRow> {
    run_grid_with(grid, |row, model| {
        let mut n = norm.lock().unwrap();
        match model {
            FittedModel::Sequential(fit) => n.fit(fit, row.replicate == 0),
            FittedModel::Gibbs(p) => n.mixture(&p.to_mixture(), false),
        }
    })
    .unwrap()
}

fn table_reproduction(norm: &Mutex<Normalization>) -> (bool, String) {
    let grid = ExperimentGrid {
        dmu_values: vec![0.2],
        alpha_values: vec![0.1],
        replicates: 20,
        engines: vec![BenchEngine::Sugs, BenchEngine::Vsugs, BenchEngine::Gibbs],
        trunc: 150,
        orderings: 50,
        n: 500,
        gibbs: GibbsConfig::new(300, 1000, 0),
        gibbs_reference: true,
        prior: unit(),
        seed: 5,
    };
    let rows = observed_grid(&grid, norm);
    let rel = |e: BenchEngine| rows.iter().filter(|r| r.engine == e).map(|r| r.rel_err).collect::<Vec<_>>();
    let failures = rows.iter().filter(|r| !r.e.is_finite()).count();
    let (s, v) = (median(rel(BenchEngine::Sugs)), median(rel(BenchEngine::Vsugs)));
    (
        failures == 0 && v < s && v <= TABLE_VSUGS_MAX,
        format!(
            "dμ=0.2, α=0.1, N=500, 20 replicates, 50 orderings: median relative error SUGS {s:.4}, VSUGS(T=150) {v:.4} (need VSUGS < SUGS and ≤ {TABLE_VSUGS_MAX}); failed fits {failures}"
        ),
    )
}

fn trend_grid(norm: &Mutex<Normalization>) -> (bool, String) {
    let grid = ExperimentGrid {
        dmu_values: vec![0.2, 0.5, 1.0],
        alpha_values: vec![20.0, 35.0, 50.0],
        replicates: 20,
        engines: vec![BenchEngine::Sugs, BenchEngine::Vsugs],
        trunc: 200,
        orderings: 50,
        n: 500,
        gibbs: GibbsConfig::default(),
        gibbs_reference: false,
        prior: unit(),
        seed: 6,
    };
    let rows = observed_grid(&grid, norm);
    let cells = summarize(&rows);
    let ratios: Vec<String> = cells
        .iter()
        .map(|c| format!("(dμ={}, α={}): {:.3}", c.dmu, c.alpha, c.log_ratio.unwrap_or(f64::NAN)))
        .collect();
    let pass = cells.len() == 9 && cells.iter().all(|c| c.log_ratio.is_some_and(|r| r > 0.0));
    (pass, format!("mean ln(e_SUGS/e_VSUGS), T=200, 20 replicates, 50 orderings: {}", ratios.join("; ")))
}

fn median_time<F: FnMut()>(mut f: F, reps: usize) -> f64 {
    let times: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64()
        })
        .collect();
    median(times)
}

fn timing() -> (bool, String) {
    let data = gen_mixture(&SyntheticSpec::new(0.2, 500, 7)).unwrap();
    let sugs = median_time(|| drop(sugs_fit(&data, 0.1, unit(), None).unwrap()), 7);
    let vsugs = median_time(|| drop(vsugs_fit(&data, 0.1, 150, unit()).unwrap()), 7);
    let gibbs = median_time(|| drop(collapsed_gibbs(&data, 0.1, &unit(), &GibbsConfig::new(300, 1000, 1)).unwrap()), 3);
    let t50 = median_time(|| drop(vsugs_fit(&data, 0.1, 50, unit()).unwrap()), 9);
    let t200 = median_time(|| drop(vsugs_fit(&data, 0.1, 200, unit()).unwrap()), 9);
    let scaling = (t200 / t50) / 4.0;
    (
        gibbs > vsugs && vsugs > sugs && (scaling - 1.0).abs() <= SCALING_TOL,
        format!(
            "N=500 single fits: Gibbs {:.1} ms > VSUGS(T=150) {:.1} ms > SUGS {:.2} ms; VSUGS time ratio T=200/T=50 is {:.2}× the linear prediction (tol ±{SCALING_TOL})",
            gibbs * 1e3,
            vsugs * 1e3,
            sugs * 1e3,
            scaling
        ),
    )
}

fn genotyping(norm: &mut Normalization) -> (bool, String) {
    let centers = [[-3.0, 0.0], [0.0, 0.0], [3.0, 0.0]];
    let mut worst_v: f64 = 1.0;
    let mut all_ok = true;
    let mut detail = Vec::new();
    for rep in 0..10 {
        let (data, truth) = three_class_data(3000, 900 + rep, centers, 0.4, 0.3);
        let priors = anchored_priors(centers, 0.25);
        let v = three_class_fit(&data, priors.clone(), 1.0, 20, GenotypeEngine::Vsugs).unwrap();
        let s = three_class_fit(&data, priors, 1.0, 20, GenotypeEngine::Sugs).unwrap();
        for r in v.responsibilities.iter().chain(&s.responsibilities) {
            norm.row(r);
        }
        let av = concordance(&v.labels, &truth).unwrap();
        let asg = concordance(&s.labels, &truth).unwrap();
        worst_v = worst_v.min(av);
        all_ok &= av >= GENOTYPE_MIN_ACCURACY && av >= asg;
        detail.push(format!("{av:.4}/{asg:.4}"));
    }
    (
        all_ok,
        format!(
            "10 replicates, n=3000, two-component classes; accuracy VSUGS/SUGS per replicate [{}]; min VSUGS {worst_v:.4} (need ≥ {GENOTYPE_MIN_ACCURACY} and ≥ SUGS)",
            detail.join(", ")
        ),
    )
}

fn main() {
    let mut report = Report { failures: 0 };
    let mut norm = Normalization::default();

    let (pass, text) = conjugacy();
    report.line("1", pass, text);
    let (pass, text) = hard_equivalence(&mut norm);
    report.line("2", pass, text);
    let (pass, text) = tightness(&mut norm);
    report.line("3", pass, text);
    let instances = enumeration_instances();
    let (pass, text) = enumeration_agreement(&instances, &mut norm);
    report.line("4", pass, text);
    let shared = Mutex::new(norm);
    let (pass, text) = table_reproduction(&shared);
    report.line("5", pass, text);
    let (pass, text) = trend_grid(&shared);
    report.line("6", pass, text);
    let (pass, text) = timing();
    report.line("7", pass, text);
    let mut norm = shared.into_inner().unwrap();
    let (pass9, text9) = genotyping(&mut norm);
    report.line(
        "8",
        norm.worst_row <= NORMALIZATION_TOL && norm.worst_integral <= INTEGRAL_TOL,
        format!(
            "{} probability rows, max |Σ−1| {:.1e} (tol {NORMALIZATION_TOL:.0e}); {} predictive integrals, max |∫−1| {:.1e} (tol {INTEGRAL_TOL:.0e})",
            norm.rows_checked, norm.worst_row, norm.integrals_checked, norm.worst_integral
        ),
    );
    report.line("9", pass9, text9);
    report.diagnostic("10", lower_bound_gap(&instances));

    println!("acceptance: {} failing criteria", report.failures);
    if report.failures > 0 {
        std::process::exit(1);
    }
}
