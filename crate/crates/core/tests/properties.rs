use proptest::prelude::*;
use seqemp::chaining::enumerate_partitions;
use seqemp::empirical::{sequential_empirical, DistributionSource, DistributionTable, EvaluationGrid};
use seqemp::hermite::{expand_hermite_linear, hermite};

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-3).then(|| v.iter().map(|x| x / n).collect())
}

proptest! {
    #[test]
    fn expansion_matches_projection(
        m in 0usize..=6,
        raw in prop::collection::vec(-1.0f64..1.0, 1..=4),
        xs in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        let Some(a) = unit(raw) else { return Ok(()) };
        let x = &xs[..a.len()];
        let e = expand_hermite_linear(m, &a).unwrap();
        let s: f64 = a.iter().zip(x).map(|(u, v)| u * v).sum();
        let want = hermite(m, s).unwrap();
        prop_assert!((e.eval(x).unwrap() - want).abs() <= 1e-9 * (1.0 + want.abs()));
    }

    #[test]
    fn lattice_counts_match_naive(
        ys in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..60),
        cuts in prop::collection::vec(-2.0f64..2.0, 1..6),
    ) {
        let axis = {
            let mut c = cuts.clone();
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        };
        let grid = EvaluationGrid::from_finite(vec![axis.clone(), axis], vec![0.0, 0.5, 1.0]).unwrap();
        let f = DistributionTable {
            values: vec![0.0; grid.len()],
            errors: vec![0.0; grid.len()],
            source: DistributionSource::Quadrature,
        };
        let flat: Vec<f64> = ys.iter().flat_map(|(a, b)| [*a, *b]).collect();
        let s = sequential_empirical(&flat, &grid, &f).unwrap().surface;
        for (ti, &n) in s.prefix.iter().enumerate() {
            for (i, x) in grid.points().enumerate() {
                let naive = ys[..n].iter().filter(|(a, b)| *a <= x[0] && *b <= x[1]).count();
                prop_assert_eq!(s.values[ti][i], naive as f64);
            }
        }
    }

    #[test]
    fn partition_counts(p in 1usize..=4, k in 1usize..=12) {
        let groups = enumerate_partitions(p, k).unwrap();
        for (i, g) in groups.iter().enumerate() {
            prop_assert_eq!(g.len(), (i + 2).pow(p as u32) - (i + 1).pow(p as u32));
            prop_assert!(g.iter().all(|t| t.iter().max() == Some(&(i + 1))));
        }
    }
}
