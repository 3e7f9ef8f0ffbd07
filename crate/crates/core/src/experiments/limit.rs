use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{summarize, ExperimentReport, PlotStatistic, RawRow};
use super::stats::{ks_distance, ks_two_sample};
use super::{diag_covariance, family_rank, rank_gate, simulate, strictly_decreasing, subordinate};
use crate::empirical::normalization;
use crate::error::Result;
use crate::hermite::quadrature::std_normal_cdf;
use crate::hermite::{hermite_coefficient, hermite_multi, multi_indices, MultiIndex};
use crate::scalar::factorial;

/// Exact variance of `Σ_{j<=n} a · X_j`.
fn linear_sum_variance(cfg: &ExperimentConfig, a: &[f64], n: usize) -> f64 {
    let p = a.len();
    let mut total = 0.0;
    for i in 0..p {
        for k in 0..p {
            let mut v = if i == k { n as f64 } else { 0.0 };
            for lag in 1..n {
                let r = cfg.model.autocovariance(i, k, lag).expect("index in range")
                    + cfg.model.autocovariance(k, i, lag).expect("index in range");
                v += (n - lag) as f64 * r;
            }
            total += a[i] * a[k] * v;
        }
    }
    total
}

fn leading_value(x: &[f64], indices: &[MultiIndex], coef: &[f64]) -> f64 {
    indices
        .iter()
        .zip(coef)
        .map(|(l, c)| c * hermite_multi(l, x).expect("dimensions match"))
        .sum()
}

/// Distribution of `d_N^{-1} R_N(x, 1)` over replications against the
/// limiting marginal at a fixed `x`.
///
/// For `m = 1` the reference is centred normal with the exact variance of
/// the normalized linear leading term at `M = 4 max N`; in one input
/// dimension this is `J_1(x)^2`. For `m >= 2` the reference is a simulated
/// sample of the normalized leading term at length `M`.
pub fn run_limit_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("limit", cfg);
    report.plot_statistic = PlotStatistic::Extra("ks");
    let (m, _, _) = family_rank(cfg)?;
    report.admissibility = Some(rank_gate(cfg.model.d, m)?);
    let g = cfg.subordinator();
    let x = cfg.x_slice_or_median();
    let p = cfg.model.p;
    let q = g.q();
    let indices = multi_indices(p, m);
    let f_x = hermite_coefficient(&g, &x, &vec![0; p], &cfg.quadrature)?.value;
    let coef: Vec<f64> = indices
        .iter()
        .map(|l| {
            let norm: f64 = l.iter().map(|&k| factorial::<f64>(k)).product();
            Ok(hermite_coefficient(&g, &x, l, &cfg.quadrature)?.value / norm)
        })
        .collect::<Result<_>>()?;
    let r = diag_covariance(cfg);
    let n_max = *cfg.n_ladder.last().expect("validated ladder");
    let big_m = 4 * n_max;
    let d_big = normalization(&r, m, big_m);

    enum Reference {
        Normal(f64),
        Sample(Vec<f64>),
    }
    let reference = if m == 1 {
        let sd = linear_sum_variance(cfg, &coef, big_m).sqrt() / d_big;
        report.notes.push(format!("reference N(0, {:.8e}) at M = {big_m}", sd * sd));
        Reference::Normal(sd)
    } else {
        let refs = simulate(cfg, big_m, 1, cfg.replications)?;
        let sample: Vec<f64> = refs
            .par_iter()
            .map(|path| (0..big_m).map(|j| leading_value(path.row(j), &indices, &coef)).sum::<f64>() / d_big)
            .collect();
        report.notes.push(format!("reference: simulated leading term at M = {big_m}"));
        Reference::Sample(sample)
    };

    let paths = simulate(cfg, n_max, 0, cfg.replications)?;
    let counts: Vec<Vec<f64>> = paths
        .par_iter()
        .map(|path| {
            let ys = subordinate(&g, path);
            let mut hits = 0usize;
            let mut next = 0;
            let mut out = Vec::with_capacity(cfg.n_ladder.len());
            for j in 0..n_max {
                if ys[j * q..(j + 1) * q].iter().zip(&x).all(|(y, b)| y <= b) {
                    hits += 1;
                }
                if j + 1 == cfg.n_ladder[next] {
                    out.push(hits as f64);
                    next += 1;
                }
            }
            out
        })
        .collect();
    let mut ks = Vec::with_capacity(cfg.n_ladder.len());
    for (i, &n) in cfg.n_ladder.iter().enumerate() {
        let d = normalization(&r, m, n);
        let values: Vec<f64> = counts.iter().map(|c| (c[i] - n as f64 * f_x) / d).collect();
        let dist = match &reference {
            Reference::Normal(sd) if *sd > 0.0 => ks_distance(&values, |t| std_normal_cdf(t / sd)),
            Reference::Normal(_) => ks_distance(&values, |t| if t >= 0.0 { 1.0 } else { 0.0 }),
            Reference::Sample(s) => ks_two_sample(&values, s),
        };
        ks.push(dist);
        for (rep, v) in values.into_iter().enumerate() {
            report.raw.push(RawRow {
                n,
                replication: rep,
                label: "normalized_count".into(),
                value: v,
            });
        }
    }
    report.summary = summarize(&report.raw);
    for (row, k) in report.summary.iter_mut().zip(&ks) {
        row.extra.insert("ks".into(), *k);
    }
    let (ok, detail) = strictly_decreasing(&ks);
    let degenerate = ks.iter().all(|k| *k == 0.0);
    report.check("ks_decreasing", ok || degenerate, detail);
    if let Some(th) = cfg.ks_threshold {
        let last = *ks.last().expect("nonempty ladder");
        report.check("ks_below_threshold", last < th, format!("{last:.4} < {th}"));
    }
    report.notes.push(format!(
        "x = {:?}, F(x) = {f_x:.10}, leading coefficients J_l(x)/l! = {coef:?}",
        x
    ));
    Ok(report)
}
