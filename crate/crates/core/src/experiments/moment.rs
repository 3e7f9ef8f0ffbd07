use std::collections::HashMap;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{summarize, ExperimentReport, PlotStatistic, RawRow};
use super::{diag_covariance, family_rank, rank_gate, simulate, subordinate};
use crate::chaining::{LambdaMode, LambdaSpec, PartitionScheme};
use crate::empirical::normalization;
use crate::error::Result;
use crate::hermite::{hermite_coefficient, hermite_multi, multi_indices, MultiIndex, QuadratureSpec, Subordinator};
use crate::scalar::factorial;

/// Most boxes searched per level when `q >= 2`.
const MAX_BOXES_PER_LEVEL: usize = 4096;

#[derive(Debug, Clone)]
struct TestBox {
    level: usize,
    target: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    prob: f64,
}

/// Coefficient `J_l` of the box `(lower, upper]` by inclusion-exclusion over
/// its corners, memoized per corner.
struct BoxCoefficients<'a> {
    g: &'a Subordinator,
    quad: &'a QuadratureSpec,
    cache: HashMap<(Vec<u64>, MultiIndex), f64>,
}

impl<'a> BoxCoefficients<'a> {
    fn corner(&mut self, x: &[f64], l: &[usize]) -> Result<f64> {
        let key = (x.iter().map(|v| v.to_bits()).collect(), l.to_vec());
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let v = hermite_coefficient(self.g, x, l, self.quad)?.value;
        self.cache.insert(key, v);
        Ok(v)
    }

    fn of_box(&mut self, lower: &[f64], upper: &[f64], l: &[usize]) -> Result<f64> {
        let q = lower.len();
        let mut total = 0.0;
        let mut corner = vec![0.0; q];
        for mask in 0..(1usize << q) {
            let mut sign = 1.0;
            for j in 0..q {
                if mask >> j & 1 == 1 {
                    corner[j] = lower[j];
                    sign = -sign;
                } else {
                    corner[j] = upper[j];
                }
            }
            total += sign * self.corner(&corner, l)?;
        }
        Ok(total)
    }
}

fn candidate_boxes(scheme: &PartitionScheme, coeffs: &mut BoxCoefficients, p: usize) -> Result<Vec<TestBox>> {
    let q = scheme.dims;
    let zero = vec![0usize; p];
    let mut out = Vec::new();
    for k in 1..=scheme.quality {
        let cells = 1usize << k;
        let count = cells.checked_pow(q as u32).unwrap_or(usize::MAX);
        if count > MAX_BOXES_PER_LEVEL {
            break;
        }
        for flat in 0..count {
            let mut rest = flat;
            let mut lower = vec![0.0; q];
            let mut upper = vec![0.0; q];
            for j in (0..q).rev() {
                let i = rest % cells;
                rest /= cells;
                lower[j] = scheme.points(j, k)[i];
                upper[j] = scheme.points(j, k)[i + 1];
            }
            if lower.iter().zip(&upper).any(|(a, b)| a >= b) {
                continue;
            }
            let prob = coeffs.of_box(&lower, &upper, &zero)?;
            if prob > 0.0 {
                out.push(TestBox {
                    level: k,
                    target: 0.0,
                    lower,
                    upper,
                    prob,
                });
            }
        }
    }
    Ok(out)
}

/// `E|S_N(n, A)|^2` for partition cells `A` whose probabilities are closest
/// (in log scale) to the configured targets, at `n = ⌊fraction · N⌋`.
pub fn run_moment_bound_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("moment", cfg);
    report.plot_statistic = PlotStatistic::Mean;
    let (m, _, _) = family_rank(cfg)?;
    report.admissibility = Some(rank_gate(cfg.model.d, m)?);
    let g = cfg.subordinator();
    let p = cfg.model.p;
    let q = g.q();
    let mode = if p == 1 { LambdaMode::UnivariateSubordination } else { LambdaMode::MultivariateSubordination };
    let lambda = LambdaSpec::build(&g, m, mode, &cfg.quadrature)?;
    let scheme = PartitionScheme::build(&lambda, cfg.moment.quality)?;
    let mut coeffs = BoxCoefficients {
        g: &g,
        quad: &cfg.quadrature,
        cache: HashMap::new(),
    };
    let candidates = candidate_boxes(&scheme, &mut coeffs, p)?;

    let mut boxes: Vec<TestBox> = Vec::new();
    for &target in &cfg.moment.targets {
        let best = candidates
            .iter()
            .min_by(|a, b| {
                let da = (a.prob / target).ln().abs();
                let db = (b.prob / target).ln().abs();
                da.total_cmp(&db)
            })
            .cloned();
        if let Some(mut b) = best {
            b.target = target;
            boxes.push(b);
        }
    }
    boxes.push(TestBox {
        level: 0,
        target: 1.0,
        lower: vec![f64::NEG_INFINITY; q],
        upper: vec![f64::INFINITY; q],
        prob: 1.0,
    });
    let indices = multi_indices(p, m);
    let box_coef: Vec<Vec<f64>> = boxes
        .iter()
        .map(|b| {
            indices
                .iter()
                .map(|l| {
                    let norm: f64 = l.iter().map(|&k| factorial::<f64>(k)).product();
                    Ok(coeffs.of_box(&b.lower, &b.upper, l)? / norm)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let r = diag_covariance(cfg);
    let n_max = *cfg.n_ladder.last().expect("validated ladder");
    let paths = simulate(cfg, n_max, 0, cfg.replications)?;
    let lengths: Vec<usize> = cfg
        .n_ladder
        .iter()
        .map(|&n| ((n as f64 * cfg.moment.n_fraction).floor() as usize).max(1))
        .collect();
    // values[rep][ladder][box]
    let values: Vec<Vec<Vec<f64>>> = paths
        .par_iter()
        .map(|path| {
            let ys = subordinate(&g, path);
            cfg.n_ladder
                .iter()
                .zip(&lengths)
                .map(|(&big_n, &n)| {
                    let d = normalization(&r, m, big_n);
                    boxes
                        .iter()
                        .zip(&box_coef)
                        .map(|(b, c)| {
                            let mut s = 0.0;
                            for j in 0..n {
                                let y = &ys[j * q..(j + 1) * q];
                                let inside = y
                                    .iter()
                                    .zip(b.lower.iter().zip(&b.upper))
                                    .all(|(v, (lo, hi))| lo < v && v <= hi);
                                let lead: f64 = indices
                                    .iter()
                                    .zip(c)
                                    .map(|(l, cl)| cl * hermite_multi(l, path.row(j)).expect("dimensions match"))
                                    .sum();
                                s += if inside { 1.0 } else { 0.0 } - b.prob - lead;
                            }
                            (s / d).powi(2)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let label = |i: usize| if boxes[i].level == 0 { "full".to_string() } else { format!("box{i}") };
    for (li, &n) in cfg.n_ladder.iter().enumerate() {
        for bi in 0..boxes.len() {
            for (rep, v) in values.iter().enumerate() {
                report.raw.push(RawRow {
                    n,
                    replication: rep,
                    label: label(bi),
                    value: v[li][bi],
                });
            }
        }
    }
    report.summary = summarize(&report.raw);
    for row in report.summary.iter_mut() {
        let bi = (0..boxes.len()).find(|&i| label(i) == row.label).expect("known label");
        row.extra.insert("prob".into(), boxes[bi].prob);
        row.extra.insert("level".into(), boxes[bi].level as f64);
        row.extra.insert("ratio_to_prob".into(), row.mean / boxes[bi].prob);
        row.extra.insert("n_prefix".into(), lengths[cfg.n_ladder.iter().position(|&n| n == row.n).unwrap()] as f64);
    }
    for (i, b) in boxes.iter().enumerate() {
        report.notes.push(format!(
            "{}: level {}, lower {:?}, upper {:?}, P = {:.6e}",
            label(i),
            b.level,
            b.lower,
            b.upper,
            b.prob
        ));
    }

    let tested: Vec<usize> = {
        let mut v: Vec<usize> = (0..boxes.len()).filter(|&i| boxes[i].level > 0).collect();
        v.sort_by(|&a, &b| boxes[b].prob.total_cmp(&boxes[a].prob));
        v.dedup_by(|a, b| boxes[*a].lower == boxes[*b].lower && boxes[*a].upper == boxes[*b].upper);
        v
    };
    let summary = report.summary.clone();
    let stat = |n: usize, i: usize| {
        summary
            .iter()
            .find(|s| s.n == n && s.label == label(i))
            .map(|s| (s.mean, s.se))
            .expect("summary row")
    };

    let mut ordered = true;
    let mut proportional = true;
    let mut details = Vec::new();
    for &n in &cfg.n_ladder {
        let means: Vec<f64> = tested.iter().map(|&i| stat(n, i).0).collect();
        ordered &= means.windows(2).all(|w| w[0] > w[1]);
        let t_max = tested.iter().map(|&i| boxes[i].target).fold(0.0, f64::max);
        let ratios: Vec<(f64, f64)> = tested
            .iter()
            .filter(|&&i| boxes[i].target >= t_max / 10.0 * (1.0 - 1e-9))
            .map(|&i| {
                let (mean, se) = stat(n, i);
                (mean / boxes[i].prob, se / boxes[i].prob)
            })
            .collect();
        let hi = ratios.iter().map(|r| r.0).fold(0.0, f64::max);
        let lo = ratios.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
        let hi_low = ratios.iter().map(|r| r.0 - 2.0 * r.1).fold(0.0, f64::max);
        let lo_high = ratios.iter().map(|r| r.0 + 2.0 * r.1).fold(f64::INFINITY, f64::min);
        proportional &= hi_low <= 5.0 * lo_high;
        details.push(format!("N={n}: means {:?}, ratio spread {:.3} ({:.3} at 2 SE)",
            means.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
            hi / lo,
            hi_low / lo_high
        ));
    }
    report.check("ordered_with_probability", ordered, details.join("; "));
    report.check("proportional_within_factor_5", proportional, "E|S|^2 / P over boxes within one decade of the largest target, 2 SE window");

    let mut monotone = true;
    let mut mono_detail = Vec::new();
    for &i in &tested {
        for w in cfg.n_ladder.windows(2) {
            let (a, sa) = stat(w[0], i);
            let (b, sb) = stat(w[1], i);
            let slack = 2.0 * (sa * sa + sb * sb).sqrt();
            if b > a + slack {
                monotone = false;
                mono_detail.push(format!("{} rises from {a:.3e} to {b:.3e} (slack {slack:.1e})", label(i)));
            }
        }
    }
    report.check("non_increasing_in_n", monotone, mono_detail.join("; "));
    let full = boxes.len() - 1;
    let finite = cfg.n_ladder.iter().all(|&n| stat(n, full).0.is_finite());
    report.check("full_space_finite", finite, "box with P = 1");
    Ok(report)
}
