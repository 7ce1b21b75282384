use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dpm_seq::bench::{
    concordance, density_error, gen_mixture, normalize_two_channel, quantile_anchors, relative_error, run_grid,
    three_class_fit, BenchEngine, ExperimentGrid, GenotypeEngine, GenotypeWarning, GridRow, SyntheticSpec,
};
use dpm_seq::model::{Conjugate, MixturePredictive, NigParams, NiwParams};
use dpm_seq::oracle::{collapsed_gibbs, GibbsConfig, GibbsPredictive};
use dpm_seq::ordering::{search_orderings, Criterion, EngineSpec, Fit, OrderingSearchConfig};
use dpm_seq::Dataset;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::error::CliError;
use crate::ingest::{ingest, Header, IngestOptions};

pub const SCHEMA: &str = "dpm-seq/model/1";

/// 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn write_artifact(dir: &Path, name: &str, invocation: &str, body: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, format!("# {invocation}\n{body}")).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn ingest_options(header: HeaderArg, labels: bool) -> IngestOptions {
    IngestOptions {
        header: match header {
            HeaderArg::Auto => Header::Auto,
            HeaderArg::Yes => Header::Present,
            HeaderArg::No => Header::Absent,
        },
        labels,
    }
}

fn nig(p: &PriorArgs) -> Result<NigParams, CliError> {
    Ok(NigParams::new(p.prior_rho, p.prior_nu, p.prior_a, p.prior_b)?)
}

fn niw(p: &PriorArgs, mean: Vec<f64>) -> Result<NiwParams, CliError> {
    let d = mean.len();
    nig(p)?;
    Ok(NiwParams::isotropic(
        mean,
        1.0 / p.prior_nu,
        2.0 * p.prior_b,
        2.0 * p.prior_a + d as f64 - 1.0,
    )?)
}

pub fn gen(args: &GenArgs, invocation: &str) -> Result<PathBuf, CliError> {
    let data = gen_mixture(&SyntheticSpec::new(args.dmu, args.n, args.seed))?;
    let mut body = String::from(if args.with_labels { "y,label\n" } else { "y\n" });
    let labels = data.labels().unwrap_or(&[]);
    for (i, y) in data.rows().enumerate() {
        if args.with_labels {
            let _ = writeln!(body, "{},{}", num(y[0]), labels[i]);
        } else {
            let _ = writeln!(body, "{}", num(y[0]));
        }
    }
    write_artifact(&args.output.output_dir, "data.csv", invocation, &body)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterDump<C> {
    pub count: f64,
    pub params: C,
}

/// Structured model dump. Scores that do not apply to the engine are
/// omitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "C: Conjugate"))]
pub struct ModelDump<C: Conjugate> {
    pub schema: String,
    pub engine: String,
    pub family: String,
    pub dim: usize,
    pub n: usize,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trunc: Option<usize>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orderings: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_ordering: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pseudo_marginal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ln_evidence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs_draws: Option<usize>,
    /// Labels in input row order.
    pub allocations: Vec<usize>,
    pub prior: C,
    pub clusters: Vec<ClusterDump<C>>,
    pub predictive: MixturePredictive<C>,
}

impl<C: Conjugate> ModelDump<C> {
    fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Model(e.to_string()))
    }
}

fn family_of(dim: usize) -> &'static str {
    if dim == 1 {
        "nig"
    } else {
        "niw"
    }
}

fn fit_dump<C: Conjugate>(args: &FitArgs, data: &Dataset, prior: C) -> Result<ModelDump<C>, CliError> {
    let base = ModelDump {
        schema: SCHEMA.to_string(),
        engine: String::new(),
        family: family_of(data.dim()).to_string(),
        dim: data.dim(),
        n: data.len(),
        alpha: args.alpha,
        trunc: args.trunc,
        seed: args.seed,
        orderings: None,
        best_ordering: None,
        lower_bound: None,
        pseudo_marginal: None,
        ln_evidence: None,
        gibbs_draws: None,
        allocations: Vec::new(),
        prior: prior.clone(),
        clusters: Vec::new(),
        predictive: MixturePredictive::new(Vec::new(), Vec::new()),
    };
    let spec = match args.engine {
        EngineArg::Gibbs => {
            let cfg = GibbsConfig::new(args.gibbs.burnin, args.gibbs.iters, args.seed).with_trunc(args.trunc);
            let samples = collapsed_gibbs(data, args.alpha, &prior, &cfg)?;
            let pred = GibbsPredictive::new(&samples);
            let last = samples
                .draws()
                .last()
                .ok_or_else(|| CliError::Usage("--iters must be positive".to_string()))?;
            return Ok(ModelDump {
                engine: "gibbs".to_string(),
                gibbs_draws: Some(pred.num_draws()),
                allocations: last.labels().to_vec(),
                clusters: last
                    .counts()
                    .iter()
                    .zip(last.clusters())
                    .map(|(c, p)| ClusterDump {
                        count: *c as f64,
                        params: p.clone(),
                    })
                    .collect(),
                predictive: pred.to_mixture(),
                ..base
            });
        }
        EngineArg::Sugs => EngineSpec::Sugs {
            alpha: args.alpha,
            trunc: args.trunc,
        },
        EngineArg::Vsugs => {
            let trunc = args
                .trunc
                .ok_or_else(|| CliError::Usage("--engine vsugs requires --trunc".to_string()))?;
            EngineSpec::vsugs(args.alpha, trunc)
        }
    };
    let cfg = OrderingSearchConfig {
        num_orderings: args.orderings,
        seed: args.seed,
        criterion: args.criterion.map(|c| match c {
            CriterionArg::LowerBound => Criterion::LowerBound,
            CriterionArg::PseudoMarginal => Criterion::PseudoMarginal,
        }),
        threads: None,
    };
    let out = search_orderings(data, &prior, &spec, &cfg)?;
    let mut allocations = vec![0; data.len()];
    let (labels, engine, lower_bound, pseudo_marginal, ln_evidence) = match &out.best_fit {
        Fit::Sugs(f) => (f.allocations().to_vec(), "sugs", None, Some(f.pseudo_marginal()), None),
        Fit::Vsugs(f) => (f.map_labels(), "vsugs", Some(f.lower_bound()), None, Some(f.ln_evidence())),
    };
    for (k, &i) in out.best_permutation.iter().enumerate() {
        allocations[i] = labels[k];
    }
    let state = match &out.best_fit {
        Fit::Sugs(f) => f.state(),
        Fit::Vsugs(f) => f.state(),
    };
    Ok(ModelDump {
        engine: engine.to_string(),
        orderings: Some(args.orderings),
        best_ordering: Some(out.best_index),
        lower_bound,
        pseudo_marginal,
        ln_evidence,
        allocations,
        clusters: state
            .counts()
            .counts()
            .iter()
            .zip(state.clusters())
            .map(|(c, p)| ClusterDump {
                count: *c,
                params: p.clone(),
            })
            .collect(),
        predictive: out.best_fit.predictive(),
        ..base
    })
}

pub fn fit(args: &FitArgs, invocation: &str) -> Result<PathBuf, CliError> {
    if args.engine == EngineArg::Vsugs && args.trunc.is_none() {
        return Err(CliError::Usage("--engine vsugs requires --trunc".to_string()));
    }
    let data = ingest(&args.input.input, ingest_options(args.input.header, args.input.labels))?;
    let body = if data.dim() == 1 {
        fit_dump(args, &data, nig(&args.prior)?)?.to_toml()?
    } else {
        let prior = niw(&args.prior, vec![args.prior.prior_rho; data.dim()])?;
        fit_dump(args, &data, prior)?.to_toml()?
    };
    write_artifact(&args.output.output_dir, "model.toml", invocation, &body)
}

fn load_dump<C: Conjugate + DeserializeOwned>(text: &str) -> Result<ModelDump<C>, CliError> {
    let dump: ModelDump<C> = toml::from_str(text).map_err(|e| CliError::Model(e.to_string()))?;
    if dump.schema != SCHEMA {
        return Err(CliError::Model(format!("unsupported schema `{}`", dump.schema)));
    }
    Ok(dump)
}

/// Reads a univariate model dump.
pub fn load_model(path: &Path) -> Result<ModelDump<NigParams>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let family = toml::from_str::<toml::Table>(&text)
        .map_err(|e| CliError::Model(e.to_string()))?
        .get("family")
        .and_then(|v| v.as_str().map(str::to_string));
    match family.as_deref() {
        Some("nig") => load_dump(&text),
        Some(other) => Err(CliError::Usage(format!(
            "density grids need a univariate model, found family `{other}`"
        ))),
        None => Err(CliError::Model("missing `family` field".to_string())),
    }
}

pub fn density(args: &DensityArgs, invocation: &str) -> Result<PathBuf, CliError> {
    if args.grid_steps < 2 || !(args.grid_max > args.grid_min) {
        return Err(CliError::Usage(
            "need --grid-max > --grid-min and --grid-steps >= 2".to_string(),
        ));
    }
    let dump = load_model(&args.model)?;
    let mut body = String::from("y,density\n");
    let h = (args.grid_max - args.grid_min) / (args.grid_steps - 1) as f64;
    for k in 0..args.grid_steps {
        let y = args.grid_min + h * k as f64;
        let _ = writeln!(body, "{},{}", num(y), num(dump.predictive.density(&[y])));
    }
    write_artifact(&args.output.output_dir, "density.csv", invocation, &body)
}

fn bench_engine(e: EngineArg) -> BenchEngine {
    match e {
        EngineArg::Sugs => BenchEngine::Sugs,
        EngineArg::Vsugs => BenchEngine::Vsugs,
        EngineArg::Gibbs => BenchEngine::Gibbs,
    }
}

pub fn bench_table(rows: &[GridRow], timing: bool) -> String {
    let mut out = GridRow::HEADER.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(r.dmu),
            num(r.alpha),
            r.engine,
            r.trunc.map(|t| t.to_string()).unwrap_or_default(),
            r.replicate,
            num(r.e),
            num(r.rel_err),
            if timing { num(r.wall_ms) } else { String::new() },
            r.seed
        );
    }
    out
}

pub fn bench(args: &BenchArgs, invocation: &str) -> Result<PathBuf, CliError> {
    let grid = ExperimentGrid {
        dmu_values: args.dmu.clone(),
        alpha_values: args.alpha.clone(),
        replicates: args.replicates,
        engines: args.engines.iter().map(|e| bench_engine(*e)).collect(),
        trunc: args.trunc,
        orderings: args.orderings,
        n: args.n,
        gibbs: GibbsConfig::new(args.gibbs.burnin, args.gibbs.iters, 0),
        gibbs_reference: args.gibbs_reference,
        prior: nig(&args.prior)?,
        seed: args.seed,
    };
    let rows = run_grid(&grid)?;
    write_artifact(
        &args.output.output_dir,
        "bench.csv",
        invocation,
        &bench_table(&rows, !args.no_timing),
    )
}

pub fn compare(args: &CompareArgs, invocation: &str) -> Result<PathBuf, CliError> {
    let (data, truth) = match &args.input {
        Some(path) => (ingest(path, ingest_options(args.header, args.labels))?, None),
        None => {
            let spec = SyntheticSpec::new(args.dmu, args.n, args.seed);
            let data = gen_mixture(&spec)?;
            let truth: Vec<f64> = data.rows().map(|y| spec.density(y[0])).collect();
            (data, Some(truth))
        }
    };
    if data.dim() != 1 {
        return Err(CliError::Usage("compare needs univariate data".to_string()));
    }
    let prior = nig(&args.prior)?;
    let cfg = GibbsConfig::new(args.gibbs.burnin, args.gibbs.iters, args.seed);
    let reference = GibbsPredictive::new(&collapsed_gibbs(&data, args.alpha, &prior, &cfg)?);
    let ref_values: Vec<f64> = data.rows().map(|y| reference.density(y)).collect();
    let e_of = |values: &[f64]| match &truth {
        Some(t) => density_error(values, t).unwrap_or(f64::NAN),
        None => f64::NAN,
    };
    let mut body = String::from("engine,T,e,rel_err,score\n");
    let _ = writeln!(body, "gibbs,,{},{},", num(e_of(&ref_values)), num(0.0));
    let search = OrderingSearchConfig {
        num_orderings: args.orderings,
        seed: args.seed,
        criterion: None,
        threads: None,
    };
    for (name, spec, trunc) in [
        ("sugs", EngineSpec::sugs(args.alpha), String::new()),
        ("vsugs", EngineSpec::vsugs(args.alpha, args.trunc), args.trunc.to_string()),
    ] {
        let out = search_orderings(&data, &prior, &spec, &search)?;
        let pred = out.best_fit.predictive();
        let values: Vec<f64> = data.rows().map(|y| pred.density(y)).collect();
        let rel = relative_error(&values, &ref_values)?;
        let _ = writeln!(
            body,
            "{name},{trunc},{},{},{}",
            num(e_of(&values)),
            num(rel),
            num(out.scores[out.best_index])
        );
    }
    write_artifact(&args.output.output_dir, "compare.csv", invocation, &body)
}

fn parse_anchors(text: &str, dim: usize) -> Result<[Vec<f64>; 3], CliError> {
    let parsed: Vec<Vec<f64>> = text
        .split(';')
        .map(|a| {
            a.split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("--anchors: {e}")))?;
    match <[Vec<f64>; 3]>::try_from(parsed) {
        Ok(a) if a.iter().all(|v| v.len() == dim) => Ok(a),
        _ => Err(CliError::Usage(format!(
            "--anchors needs three points of dimension {dim} separated by `;`"
        ))),
    }
}

pub fn genotype(args: &GenotypeArgs, invocation: &str) -> Result<(PathBuf, Option<f64>), CliError> {
    let mut data = ingest(&args.input.input, ingest_options(args.input.header, args.input.labels))?;
    if args.normalize {
        data = normalize_two_channel(&data)?;
    }
    let anchors = match &args.anchors {
        Some(text) => parse_anchors(text, data.dim())?,
        None => quantile_anchors(&data)?,
    };
    let engine = match args.engine {
        SequentialEngineArg::Sugs => GenotypeEngine::Sugs,
        SequentialEngineArg::Vsugs => GenotypeEngine::Vsugs,
    };
    let [a0, a1, a2] = anchors;
    let priors = [niw(&args.prior, a0)?, niw(&args.prior, a1)?, niw(&args.prior, a2)?];
    let fit = three_class_fit(&data, priors, args.alpha, args.trunc, engine)?;
    let mut body = String::new();
    for w in &fit.warnings {
        let GenotypeWarning::DegenerateAnchors { a, b } = w;
        let _ = writeln!(body, "# warning: classes {a} and {b} share a prior; their labels are interchangeable");
    }
    let accuracy = match data.labels() {
        Some(truth) => {
            let called: Vec<i64> = fit.labels.iter().map(|l| *l as i64).collect();
            let acc = concordance(&called, truth)?;
            let _ = writeln!(body, "# concordance with input labels: {}", num(acc));
            Some(acc)
        }
        None => None,
    };
    body.push_str("index,label,r0,r1,r2\n");
    for (i, (l, r)) in fit.labels.iter().zip(&fit.responsibilities).enumerate() {
        let _ = writeln!(body, "{i},{l},{},{},{}", num(r[0]), num(r[1]), num(r[2]));
    }
    let path = write_artifact(&args.output.output_dir, "genotype.csv", invocation, &body)?;
    Ok((path, accuracy))
}
