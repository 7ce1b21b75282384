//! Benchmark harness: the synthetic three-component study, error metrics,
//! experiment grids and a three-class genotyping model.

mod genotype;
mod grid;
mod metrics;
mod synthetic;

pub use genotype::{
    normalize_two_channel, quantile_anchors, three_class_fit, ClassModel, GenotypeEngine, GenotypeWarning,
    ThreeClassFit, CLASS_WEIGHT,
};
pub use grid::{
    run_grid, run_grid_with, summarize, BenchEngine, CellSummary, EngineSummary, ExperimentGrid,
    FittedModel, GridRow,
};
pub use metrics::{concordance, density_error, relative_error};
pub use synthetic::{gen_mixture, true_density, SyntheticSpec, MIXTURE_WEIGHTS, STUDIED_DMU_RANGE};
