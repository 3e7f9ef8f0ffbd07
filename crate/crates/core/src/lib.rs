//! Sequential empirical processes of long-range dependent subordinated
//! Gaussian vectors: exact path simulation, Hermite expansions and ranks,
//! reduction statistics, chaining partitions and Monte Carlo experiments.

pub mod chaining;
pub mod empirical;
pub mod error;
pub mod experiments;
pub mod ext_real;
pub mod hermite;
pub mod io;
pub mod lrd;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use chaining::{LambdaSpec, PartitionScheme};
pub use empirical::EvaluationGrid;
pub use experiments::{ExperimentConfig, ExperimentKind, ExperimentReport};
pub use hermite::{HermiteRankResult, QuadratureSpec, Subordinator};
pub use lrd::{CovarianceModel, GaussianPath, LagLaw, SlowlyVarying};
pub use scalar::{Real, Ring};

pub type Scalar = f64;
pub type Model = CovarianceModel<f64>;
pub type ModelF32 = CovarianceModel<f32>;
pub type Path = GaussianPath<f64>;
pub type PathF32 = GaussianPath<f32>;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;
