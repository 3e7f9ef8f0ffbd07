//! Monte Carlo experiments built on the rest of the crate.
//!
//! Replication `r` of a run uses the path seeded by `mix(seed, r)`; the
//! reference sample of the limit experiment uses an independent stream.
//! Paths are simulated once at the longest length of the ladder and shorter
//! lengths use prefixes, so every number in a report is a function of the
//! config alone.

pub mod config;
mod limit;
mod moment;
mod partition;
mod reduction;
pub mod report;
pub mod stats;
mod variance;

use rayon::prelude::*;

pub use config::{ExperimentConfig, ExperimentKind, GridSpec, MomentSpec, PartitionSpec, SCHEMA_VERSION};
pub use limit::run_limit_experiment;
pub use moment::run_moment_bound_experiment;
pub use partition::run_partition_check;
pub use reduction::run_reduction_experiment;
pub use report::{Admissibility, Check, ExperimentReport, PlotStatistic, RawRow, SummaryRow};
pub use variance::run_variance_bound_experiment;

use crate::empirical::EvaluationGrid;
use crate::error::{Error, Result};
use crate::hermite::{hermite_rank_family, HermiteRankResult, PointRank, Subordinator};
use crate::lrd::{sample_paths, GaussianPath};
use crate::rng::mix;

/// Dispatch on `kind`.
pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut cfg = cfg.clone();
    cfg.experiment = Some(kind);
    cfg.validate()?;
    match kind {
        ExperimentKind::Reduction => run_reduction_experiment(&cfg),
        ExperimentKind::Limit => run_limit_experiment(&cfg),
        ExperimentKind::Moment => run_moment_bound_experiment(&cfg),
        ExperimentKind::Variance => run_variance_bound_experiment(&cfg),
        ExperimentKind::PartitionCheck => run_partition_check(&cfg),
    }
}

/// Seeds of `count` replications. Stream 0 is `mix(master, r)`.
pub fn replication_seeds(master: u64, stream: u64, count: usize) -> Vec<u64> {
    let base = if stream == 0 { master } else { mix(master, u64::MAX - stream) };
    (0..count as u64).map(|r| mix(base, r)).collect()
}

/// Family rank of the configured subordinator on the configured grid.
pub fn family_rank(cfg: &ExperimentConfig) -> Result<(usize, HermiteRankResult, EvaluationGrid)> {
    let g = cfg.subordinator();
    let grid = cfg.grid.build(&g)?;
    let rank = hermite_rank_family(&g, &grid, cfg.qmax, cfg.rank_tol, &cfg.quadrature)?;
    match rank.family {
        PointRank::Finite(m) => Ok((m, rank, grid)),
        PointRank::ExceedsQmax => Err(Error::RankNotFound(cfg.qmax)),
    }
}

/// `D < 1/m`, or `RankConditionViolated`.
pub fn rank_gate(d: f64, m: usize) -> Result<Admissibility> {
    let adm = Admissibility::new(m, d);
    if adm.admissible {
        Ok(adm)
    } else {
        Err(Error::RankConditionViolated { d, m, bound: adm.bound })
    }
}

pub(crate) fn simulate(cfg: &ExperimentConfig, n: usize, stream: u64, count: usize) -> Result<Vec<GaussianPath<f64>>> {
    sample_paths(&cfg.model, n, &replication_seeds(cfg.seed, stream, count))
}

/// Row-major `N × q` matrix of `G(X_j)`.
pub(crate) fn subordinate(g: &Subordinator, path: &GaussianPath<f64>) -> Vec<f64> {
    let q = g.q();
    let mut out = vec![0.0; path.n * q];
    out.par_chunks_mut(q)
        .zip(path.values().par_chunks(path.p()))
        .for_each(|(y, x)| g.eval_into(x, y));
    out
}

pub(crate) fn diag_covariance(cfg: &ExperimentConfig) -> impl Fn(usize) -> f64 + '_ {
    move |k| cfg.model.autocovariance(0, 0, k).expect("coordinate 0 exists")
}

/// Strictly decreasing sequence check with a readable detail string.
pub(crate) fn strictly_decreasing(values: &[f64]) -> (bool, String) {
    let ok = values.windows(2).all(|w| w[1] < w[0]);
    let detail = values.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(" > ");
    (ok, detail)
}
