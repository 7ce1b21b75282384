//! Fast sequential fitting of Dirichlet process mixtures of normals.
//!
//! Observations are processed once, in order. [`sugs`] assigns each to its
//! most probable cluster; [`vsugs`] keeps a full allocation distribution and
//! updates every cluster fractionally. Because both depend on the order of
//! the data, [`ordering`] fits many random orderings in parallel and keeps
//! the best-scoring one. [`oracle`] provides collapsed Gibbs sampling and
//! exact enumeration for comparison, and [`bench`] the synthetic benchmark.

pub mod bench;
pub mod data;
pub mod error;
pub mod model;
pub mod oracle;
pub mod ordering;
pub mod sugs;
pub mod vsugs;

pub use data::Dataset;
pub use error::{DpmError, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/sugs.md")]
    mod sugs {}
    #[doc = include_str!("../../../book/src/vsugs.md")]
    mod vsugs {}
    #[doc = include_str!("../../../book/src/ordering.md")]
    mod ordering {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/bench.md")]
    mod bench {}
    #[doc = include_str!("../../../book/src/genotype.md")]
    mod genotype {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
