use super::config::ExperimentConfig;
use super::report::{ExperimentReport, RawRow, SummaryRow};
use super::{family_rank, replication_seeds};
use crate::chaining::{
    boundary_probe_axis, decompose, enumerate_partitions, increment_excess, probe_axis, verify_decomposition, LambdaMode, LambdaSpec,
    PartitionScheme,
};
use crate::error::Result;
use crate::rng::SplitMix64;

const LINE_PROBES: usize = 400;

/// Verifies the partition counts, the increment bound of the chaining
/// points, and the quadrant decomposition at random points.
pub fn run_partition_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("partition-check", cfg);
    let g = cfg.subordinator();
    let q = g.q();
    let quality = cfg.partition.quality;

    let mut all_counts = true;
    for dims in 1..=4 {
        for k_max in 1..=12 {
            let groups = enumerate_partitions(dims, k_max)?;
            let per_k = groups
                .iter()
                .enumerate()
                .all(|(i, grp)| grp.len() == (i + 2).pow(dims as u32) - (i + 1).pow(dims as u32));
            let total: usize = groups.iter().map(Vec::len).sum();
            all_counts &= per_k && total == (k_max + 1).pow(dims as u32) - 1;
        }
    }
    report.check("counts_all_p4_k12", all_counts, "(k+1)^p - k^p per quality, (K+1)^p - 1 in total");

    if q <= 4 {
        let groups = enumerate_partitions(q, quality)?;
        let mut ok = true;
        for (i, grp) in groups.iter().enumerate() {
            let k = i + 1;
            let expected = (k + 1).pow(q as u32) - k.pow(q as u32);
            ok &= grp.len() == expected;
            let mut extra = std::collections::BTreeMap::new();
            extra.insert("expected".into(), expected as f64);
            report.summary.push(SummaryRow {
                n: k,
                label: "partitions".into(),
                count: grp.len(),
                mean: grp.len() as f64,
                se: 0.0,
                median: grp.len() as f64,
                q10: grp.len() as f64,
                q90: grp.len() as f64,
                extra,
            });
        }
        report.check("counts_match_formula", ok, format!("p = {q}, K = {quality}"));
    }

    let m = match cfg.order {
        Some(m) => m,
        None => family_rank(cfg)?.0,
    };
    let mode = if g.p == 1 { LambdaMode::UnivariateSubordination } else { LambdaMode::MultivariateSubordination };
    let lambda = LambdaSpec::build(&g, m, mode, &cfg.quadrature)?;
    let scheme = PartitionScheme::build(&lambda, quality)?;
    let mut worst = f64::NEG_INFINITY;
    for j in 0..q {
        for k in 1..=quality {
            worst = worst.max(increment_excess(&lambda, j, k, scheme.points(j, k))?);
        }
    }
    report.check(
        "increment_bound",
        worst <= 1e-9 * lambda.total,
        format!("largest excess of a level-k increment over 2^-k Λ(∞): {worst:.3e}"),
    );

    let probes = cfg.partition.probes_per_axis.unwrap_or(LINE_PROBES);
    let seed = replication_seeds(cfg.seed, 2, 1)[0];
    let mut rng = SplitMix64::new(seed);
    let mut violations = 0;
    let mut s = vec![0.0; g.p];
    let mut x = vec![0.0; q];
    for i in 0..cfg.partition.random_points {
        rng.fill_normal(&mut s);
        g.eval_into(&s, &mut x);
        let d = decompose(&x, quality, &scheme)?;
        let axes: Vec<Vec<f64>> = (0..q)
            .map(|j| {
                if q == 1 {
                    probe_axis(&scheme, j, x[j], probes)
                } else {
                    boundary_probe_axis(&d, j, x[j])
                }
            })
            .collect();
        let v = verify_decomposition(&x, &d, &scheme, &axes).violations();
        violations += v;
        report.raw.push(RawRow {
            n: quality,
            replication: i,
            label: "violations".into(),
            value: v as f64,
        });
    }
    report.check(
        "decomposition_probes",
        violations == 0,
        format!("{violations} violations over {} random points", cfg.partition.random_points),
    );
    report.notes.push(format!("rank m = {m}, Λ(∞) = {:.10}", lambda.total));
    Ok(report)
}
