use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{summarize, ExperimentReport, PlotStatistic, RawRow};
use super::{diag_covariance, family_rank, simulate};
use crate::empirical::normalization;
use crate::error::Result;
use crate::hermite::{hermite_all, multi_indices};

/// Second moments of `Σ_{j<=N} H_l(X_j)` relative to `d_N^2` for every
/// multi-index of total order `m`.
pub fn run_variance_bound_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("variance", cfg);
    report.plot_statistic = PlotStatistic::Mean;
    let m = match cfg.order {
        Some(m) => m,
        None => family_rank(cfg)?.0,
    };
    let p = cfg.model.p;
    let indices = multi_indices(p, m);
    let r = diag_covariance(cfg);
    let d2: Vec<f64> = cfg.n_ladder.iter().map(|&n| normalization(&r, m, n).powi(2)).collect();
    let n_max = *cfg.n_ladder.last().expect("validated ladder");
    let paths = simulate(cfg, n_max, 0, cfg.replications)?;
    // sums[rep][ladder][index]
    let sums: Vec<Vec<Vec<f64>>> = paths
        .par_iter()
        .map(|path| {
            let mut acc = vec![0.0; indices.len()];
            let mut out = Vec::with_capacity(cfg.n_ladder.len());
            let mut next = 0;
            for j in 0..n_max {
                let h: Vec<Vec<f64>> = path
                    .row(j)
                    .iter()
                    .map(|&v| hermite_all(m, v))
                    .collect::<Result<_>>()?;
                for (a, l) in acc.iter_mut().zip(&indices) {
                    *a += l.iter().enumerate().map(|(i, &k)| h[i][k]).product::<f64>();
                }
                if j + 1 == cfg.n_ladder[next] {
                    out.push(acc.clone());
                    next += 1;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    for (i, &n) in cfg.n_ladder.iter().enumerate() {
        for (k, l) in indices.iter().enumerate() {
            let label = format!("l={}", l.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("_"));
            for (rep, s) in sums.iter().enumerate() {
                report.raw.push(RawRow {
                    n,
                    replication: rep,
                    label: label.clone(),
                    value: s[i][k].powi(2) / d2[i],
                });
            }
        }
    }
    report.summary = summarize(&report.raw);
    let max_ratio = |n: usize| {
        report
            .summary
            .iter()
            .filter(|s| s.n == n)
            .map(|s| s.mean)
            .fold(0.0, f64::max)
    };
    let first = max_ratio(cfg.n_ladder[0]);
    let last = max_ratio(n_max);
    report.check(
        "ratio_bounded",
        last <= 2.0 * first,
        format!("max ratio {last:.4} at N = {n_max}, {first:.4} at N = {}", cfg.n_ladder[0]),
    );
    report.notes.push(format!("order m = {m}, ratios are mean squared sums over d_N^2"));
    Ok(report)
}
