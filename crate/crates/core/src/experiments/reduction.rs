use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{summarize, ExperimentReport, RawRow};
use super::stats::ols;
use super::{diag_covariance, family_rank, rank_gate, simulate, strictly_decreasing, subordinate};
use crate::empirical::{normalization, reduction_statistic, DistributionTable, LeadingTerm};
use crate::error::Result;
use crate::hermite::coefficient_table_orders;

/// `max_{n <= N} sup_x |S_N(n, x)|` over the ladder, with exceedance
/// probabilities for each epsilon and a log-log fit of the medians.
pub fn run_reduction_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("reduction", cfg);
    let (m, _, grid) = family_rank(cfg)?;
    report.admissibility = Some(rank_gate(cfg.model.d, m)?);
    let g = cfg.subordinator();
    let table = coefficient_table_orders(&g, &grid, &[m], &cfg.quadrature)?;
    let lead = LeadingTerm::new(&table, m)?;
    let f = DistributionTable::from_coefficients(&table);
    let r = diag_covariance(cfg);
    let d_n: Vec<f64> = cfg.n_ladder.iter().map(|&n| normalization(&r, m, n)).collect();
    let n_max = *cfg.n_ladder.last().expect("validated ladder");
    let paths = simulate(cfg, n_max, 0, cfg.replications)?;
    let p = cfg.model.p;
    let q = g.q();
    let per_rep: Vec<Vec<f64>> = paths
        .par_iter()
        .map(|path| {
            let ys = subordinate(&g, path);
            cfg.n_ladder
                .iter()
                .zip(&d_n)
                .map(|(&n, &d)| {
                    reduction_statistic(&path.values()[..n * p], &ys[..n * q], &lead, &f, &grid, d).map(|s| s.max)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    for (i, &n) in cfg.n_ladder.iter().enumerate() {
        for (rep, vals) in per_rep.iter().enumerate() {
            report.raw.push(RawRow {
                n,
                replication: rep,
                label: "sup_stat".into(),
                value: vals[i],
            });
        }
    }
    report.summary = summarize(&report.raw);
    for row in report.summary.iter_mut() {
        let i = cfg.n_ladder.iter().position(|&n| n == row.n).expect("ladder entry");
        row.extra.insert("d_n".into(), d_n[i]);
        for eps in &cfg.epsilons {
            let hits = per_rep.iter().filter(|v| v[i] > *eps).count();
            row.extra.insert(format!("p_exceed_{eps}"), hits as f64 / per_rep.len() as f64);
        }
    }
    let medians: Vec<f64> = report.summary.iter().map(|s| s.median).collect();
    if cfg.n_ladder.len() >= 2 && medians.iter().all(|v| *v > 0.0) {
        let x: Vec<f64> = cfg.n_ladder.iter().map(|&n| (n as f64).ln()).collect();
        let y: Vec<f64> = medians.iter().map(|v| v.ln()).collect();
        report.fits.push(ols("sup_stat", &x, &y));
    }
    let (ok, detail) = strictly_decreasing(&medians);
    report.check("median_strictly_decreasing", ok, detail);
    Ok(report)
}
