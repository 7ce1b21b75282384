use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::metrics::{density_error, relative_error};
use super::synthetic::{gen_mixture, SyntheticSpec};
use crate::data::Dataset;
use crate::error::{DpmError, Result};
use crate::model::NigParams;
use crate::oracle::{collapsed_gibbs, GibbsConfig, GibbsPredictive};
use crate::ordering::{search_orderings, EngineSpec, Fit, OrderingSearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BenchEngine {
    Sugs,
    Vsugs,
    Gibbs,
}

impl BenchEngine {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sugs => "sugs",
            Self::Vsugs => "vsugs",
            Self::Gibbs => "gibbs",
        }
    }
}

impl fmt::Display for BenchEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchEngine {
    type Err = DpmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sugs" => Ok(Self::Sugs),
            "vsugs" => Ok(Self::Vsugs),
            "gibbs" => Ok(Self::Gibbs),
            _ => Err(DpmError::InvalidParameter {
                name: "engine",
                value: f64::NAN,
                reason: "expected one of sugs, vsugs, gibbs",
            }),
        }
    }
}

/// Cross product of separations and concentrations, each cell replicated
/// on freshly generated data.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub dmu_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub replicates: usize,
    pub engines: Vec<BenchEngine>,
    /// Truncation level for VSUGS.
    pub trunc: usize,
    pub orderings: usize,
    pub n: usize,
    /// Reference sampler settings; the seed is replaced per replicate.
    pub gibbs: GibbsConfig,
    /// Run the reference sampler even when Gibbs is not a listed engine,
    /// so that `rel_err` is available.
    pub gibbs_reference: bool,
    pub prior: NigParams,
    pub seed: u64,
}

impl ExperimentGrid {
    fn validate(&self) -> Result<()> {
        let empty = |name| DpmError::InvalidParameter {
            name,
            value: 0.0,
            reason: "grid axes must be nonempty",
        };
        if self.dmu_values.is_empty() {
            return Err(empty("dmu_values"));
        }
        if self.alpha_values.is_empty() {
            return Err(empty("alpha_values"));
        }
        if self.engines.is_empty() {
            return Err(empty("engines"));
        }
        if self.replicates == 0 {
            return Err(empty("replicates"));
        }
        if self.n == 0 {
            return Err(DpmError::EmptyData);
        }
        Ok(())
    }
}

/// One engine on one replicate of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub dmu: f64,
    pub alpha: f64,
    pub engine: BenchEngine,
    pub trunc: Option<usize>,
    pub replicate: usize,
    /// Squared error against the true density at the data points; `NaN`
    /// if the fit failed.
    pub e: f64,
    /// Relative squared error against the Gibbs predictive.
    pub rel_err: f64,
    pub wall_ms: f64,
    /// Seed of the generated dataset.
    pub seed: u64,
}

impl GridRow {
    pub const HEADER: [&'static str; 9] =
        ["dmu", "alpha", "engine", "T", "replicate", "e", "rel_err", "wall_ms", "seed"];
}

fn derive_seeds(master: u64, cell: usize, replicate: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((cell as u64) << 32) | replicate as u64);
    (rng.next_u64(), rng.next_u64())
}

/// A fitted model as seen by a [`run_grid_with`] observer.
#[derive(Debug, Clone, Copy)]
pub enum FittedModel<'a> {
    Sequential(&'a Fit<NigParams>),
    Gibbs(&'a GibbsPredictive<NigParams>),
}

fn run_replicate<F>(
    grid: &ExperimentGrid,
    dmu: f64,
    alpha: f64,
    cell: usize,
    replicate: usize,
    observe: &F,
) -> Vec<GridRow>
where
    F: Fn(&GridRow, FittedModel<'_>) + Sync,
{
    let (data_seed, fit_seed) = derive_seeds(grid.seed, cell, replicate);
    let row = |engine, trunc, e, rel_err, wall_ms| GridRow {
        dmu,
        alpha,
        engine,
        trunc,
        replicate,
        e,
        rel_err,
        wall_ms,
        seed: data_seed,
    };
    let failed = |engine: BenchEngine| {
        let trunc = (engine == BenchEngine::Vsugs).then_some(grid.trunc);
        row(engine, trunc, f64::NAN, f64::NAN, f64::NAN)
    };
    let spec = SyntheticSpec::new(dmu, grid.n, data_seed);
    let Ok(data) = gen_mixture(&spec) else {
        return grid.engines.iter().map(|e| failed(*e)).collect();
    };
    let truth: Vec<f64> = data.rows().map(|y| spec.density(y[0])).collect();

    let want_reference = grid.gibbs_reference || grid.engines.contains(&BenchEngine::Gibbs);
    let start = Instant::now();
    let gibbs_cfg = GibbsConfig {
        seed: fit_seed,
        ..grid.gibbs
    };
    let reference = want_reference
        .then(|| collapsed_gibbs(&data, alpha, &grid.prior, &gibbs_cfg).map(|s| GibbsPredictive::new(&s)).ok())
        .flatten();
    let gibbs_ms = start.elapsed().as_secs_f64() * 1e3;
    let reference_values: Option<Vec<f64>> = reference.as_ref().map(|p| data.rows().map(|y| p.density(y)).collect());

    grid.engines
        .iter()
        .map(|&engine| match engine {
            BenchEngine::Gibbs => match (&reference, &reference_values) {
                (Some(p), Some(r)) => {
                    let out = row(engine, None, density_error(r, &truth).unwrap_or(f64::NAN), 0.0, gibbs_ms);
                    observe(&out, FittedModel::Gibbs(p));
                    out
                }
                _ => failed(engine),
            },
            _ => {
                let (spec, trunc) = match engine {
                    BenchEngine::Sugs => (EngineSpec::sugs(alpha), None),
                    _ => (EngineSpec::vsugs(alpha, grid.trunc), Some(grid.trunc)),
                };
                let start = Instant::now();
                match best_fit(&data, grid, &spec, fit_seed) {
                    Ok(fit) => {
                        let pred = fit.predictive();
                        let values: Vec<f64> = data.rows().map(|y| pred.density(y)).collect();
                        let ms = start.elapsed().as_secs_f64() * 1e3;
                        let e = density_error(&values, &truth).unwrap_or(f64::NAN);
                        let rel = reference_values
                            .as_ref()
                            .and_then(|r| relative_error(&values, r).ok())
                            .unwrap_or(f64::NAN);
                        let out = row(engine, trunc, e, rel, ms);
                        observe(&out, FittedModel::Sequential(&fit));
                        out
                    }
                    Err(_) => failed(engine),
                }
            }
        })
        .collect()
}

fn best_fit(data: &Dataset, grid: &ExperimentGrid, spec: &EngineSpec, seed: u64) -> Result<Fit<NigParams>> {
    let cfg = OrderingSearchConfig {
        num_orderings: grid.orderings.max(1),
        seed,
        criterion: None,
        threads: None,
    };
    Ok(search_orderings(data, &grid.prior, spec, &cfg)?.best_fit)
}

/// Runs every (dμ, α, replicate) combination. Rows are ordered by dμ, then
/// α, then replicate, then engine as listed in the grid; every value except
/// `wall_ms` is a pure function of the grid.
pub fn run_grid(grid: &ExperimentGrid) -> Result<Vec<GridRow>> {
    run_grid_with(grid, |_, _| ())
}

/// [`run_grid`] with `observe` called on every successful fit.
pub fn run_grid_with<F>(grid: &ExperimentGrid, observe: F) -> Result<Vec<GridRow>>
where
    F: Fn(&GridRow, FittedModel<'_>) + Sync,
{
    grid.validate()?;
    let mut jobs = Vec::new();
    for (di, &dmu) in grid.dmu_values.iter().enumerate() {
        for (ai, &alpha) in grid.alpha_values.iter().enumerate() {
            let cell = di * grid.alpha_values.len() + ai;
            for rep in 0..grid.replicates {
                jobs.push((dmu, alpha, cell, rep));
            }
        }
    }
    let rows: Vec<Vec<GridRow>> = jobs
        .into_par_iter()
        .map(|(dmu, alpha, cell, rep)| run_replicate(grid, dmu, alpha, cell, rep, &observe))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineSummary {
    pub engine: BenchEngine,
    pub mean_e: f64,
    pub mean_rel_err: f64,
    pub median_rel_err: f64,
    pub mean_wall_ms: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub dmu: f64,
    pub alpha: f64,
    pub engines: Vec<EngineSummary>,
    /// Mean over replicates of `ln(e_SUGS / e_VSUGS)`; positive when VSUGS
    /// is closer to the true density.
    pub log_ratio: Option<f64>,
}

impl CellSummary {
    pub fn engine(&self, engine: BenchEngine) -> Option<&EngineSummary> {
        self.engines.iter().find(|e| e.engine == engine)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Averages rows over replicates, skipping failed fits.
pub fn summarize(rows: &[GridRow]) -> Vec<CellSummary> {
    let mut cells: Vec<CellSummary> = Vec::new();
    for r in rows {
        if !cells.iter().any(|c| c.dmu == r.dmu && c.alpha == r.alpha) {
            cells.push(CellSummary {
                dmu: r.dmu,
                alpha: r.alpha,
                engines: Vec::new(),
                log_ratio: None,
            });
        }
    }
    for cell in &mut cells {
        let mine: Vec<&GridRow> = rows.iter().filter(|r| r.dmu == cell.dmu && r.alpha == cell.alpha).collect();
        let mut engines: Vec<BenchEngine> = mine.iter().map(|r| r.engine).collect();
        engines.sort();
        engines.dedup();
        for engine in engines {
            let ok: Vec<&&GridRow> = mine.iter().filter(|r| r.engine == engine && r.e.is_finite()).collect();
            let total = mine.iter().filter(|r| r.engine == engine).count();
            let rel: Vec<f64> = ok.iter().map(|r| r.rel_err).filter(|v| v.is_finite()).collect();
            cell.engines.push(EngineSummary {
                engine,
                mean_e: mean(&ok.iter().map(|r| r.e).collect::<Vec<_>>()),
                mean_rel_err: mean(&rel),
                median_rel_err: median(rel),
                mean_wall_ms: mean(&ok.iter().map(|r| r.wall_ms).collect::<Vec<_>>()),
                failures: total - ok.len(),
            });
        }
        let ratios: Vec<f64> = mine
            .iter()
            .filter(|s| s.engine == BenchEngine::Sugs)
            .filter_map(|s| {
                mine.iter()
                    .find(|v| v.engine == BenchEngine::Vsugs && v.replicate == s.replicate)
                    .map(|v| (s.e / v.e).ln())
            })
            .filter(|r| r.is_finite())
            .collect();
        if !ratios.is_empty() {
            cell.log_ratio = Some(mean(&ratios));
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentGrid {
        ExperimentGrid {
            dmu_values: vec![1.0],
            alpha_values: vec![0.5],
            replicates: 1,
            engines: vec![BenchEngine::Sugs, BenchEngine::Vsugs, BenchEngine::Gibbs],
            trunc: 10,
            orderings: 3,
            n: 30,
            gibbs: GibbsConfig::new(10, 30, 0),
            gibbs_reference: true,
            prior: NigParams::new(0.0, 1.0, 1.0, 1.0).unwrap(),
            seed: 4,
        }
    }

    #[test]
    fn single_cell_grid() {
        let rows = run_grid(&tiny()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.e.is_finite() && r.rel_err.is_finite()));
        assert_eq!(rows[2].rel_err, 0.0);
        let cells = summarize(&rows);
        assert_eq!(cells.len(), 1);
        assert!(cells[0].log_ratio.is_some());
    }

    #[test]
    fn deterministic_apart_from_timing() {
        let strip = |mut rows: Vec<GridRow>| {
            for r in &mut rows {
                r.wall_ms = 0.0;
            }
            rows
        };
        assert_eq!(strip(run_grid(&tiny()).unwrap()), strip(run_grid(&tiny()).unwrap()));
    }

    #[test]
    fn reference_can_be_skipped() {
        let g = ExperimentGrid {
            engines: vec![BenchEngine::Sugs, BenchEngine::Vsugs],
            gibbs_reference: false,
            ..tiny()
        };
        let seen = std::sync::atomic::AtomicUsize::new(0);
        let rows = run_grid_with(&g, |_, _| {
            seen.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        })
        .unwrap();
        assert_eq!(seen.into_inner(), 2);
        assert!(rows.iter().all(|r| r.e.is_finite() && r.rel_err.is_nan()));
    }

    #[test]
    fn empty_axes_are_rejected() {
        let g = ExperimentGrid {
            alpha_values: vec![],
            ..tiny()
        };
        assert!(run_grid(&g).is_err());
    }

    #[test]
    fn engine_names_round_trip() {
        for e in [BenchEngine::Sugs, BenchEngine::Vsugs, BenchEngine::Gibbs] {
            assert_eq!(e.name().parse::<BenchEngine>().unwrap(), e);
        }
        assert!("em".parse::<BenchEngine>().is_err());
    }
}
