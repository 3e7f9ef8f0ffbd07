use serde::Serialize;

use super::counting::cell;
use super::distribution::DistributionTable;
use super::grid::EvaluationGrid;
use super::surface::LeadingTerm;
use crate::error::{Error, Result};

/// `sup_x |S_N(n, x)|` for each `n` and its maximum over `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionStatistic {
    /// Entry `n - 1` holds the supremum after `n` observations.
    pub per_n: Vec<f64>,
    pub max: f64,
    pub argmax_n: usize,
    pub argmax_point: usize,
}

/// `S_N(n, x) = d_N^{-1} Σ_{j<=n} [1{Y_j <= x} - F(x) - Σ_{|l|=m} J_l(x)/l! H_l(X_j)]`,
/// with the supremum over the finite lattice (a lower bound for the supremum
/// over all x) and every `n <= N` scanned.
pub fn reduction_statistic(
    xs: &[f64],
    ys: &[f64],
    lead: &LeadingTerm,
    f: &DistributionTable,
    grid: &EvaluationGrid,
    d_n: f64,
) -> Result<ReductionStatistic> {
    let q = grid.q();
    let g = grid.len();
    if f.len() != g || lead.coef.len() != g {
        return Err(Error::GridMismatch(format!(
            "tables cover {} and {} points, grid has {g}",
            f.len(),
            lead.coef.len()
        )));
    }
    if ys.len() % q != 0 || xs.len() % lead.p != 0 || ys.len() / q != xs.len() / lead.p {
        return Err(Error::GridMismatch("X and Y have different lengths".into()));
    }
    let n = ys.len() / q;
    let k = lead.indices.len();
    let coords: Vec<Vec<usize>> = (0..g).map(|i| grid.unravel(i)).collect();
    let mut counts = vec![0u64; g];
    let mut h_sum = vec![0.0; k];
    let mut feat = vec![0.0; k];
    let mut cells = vec![0usize; q];
    let mut per_n = Vec::with_capacity(n);
    let (mut best, mut best_n, mut best_point) = (0.0f64, 0, 0);
    for j in 0..n {
        let y = &ys[j * q..(j + 1) * q];
        for (c, (axis, &v)) in cells.iter_mut().zip(grid.axes().iter().zip(y)) {
            *c = cell(axis, v);
        }
        lead.features(&xs[j * lead.p..(j + 1) * lead.p], &mut feat);
        for (s, v) in h_sum.iter_mut().zip(&feat) {
            *s += v;
        }
        let nn = (j + 1) as f64;
        let mut sup = 0.0f64;
        let mut sup_at = 0;
        for i in 0..g {
            if coords[i].iter().zip(&cells).all(|(a, c)| a >= c) {
                counts[i] += 1;
            }
            let lead_i: f64 = lead.coef[i].iter().zip(&h_sum).map(|(a, b)| a * b).sum();
            let s = (counts[i] as f64 - nn * f.values[i] - lead_i).abs();
            if s > sup {
                sup = s;
                sup_at = i;
            }
        }
        let sup = sup / d_n;
        per_n.push(sup);
        if sup > best {
            best = sup;
            best_n = j + 1;
            best_point = sup_at;
        }
    }
    Ok(ReductionStatistic {
        per_n,
        max: best,
        argmax_n: best_n,
        argmax_point: best_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::surface::{leading_term_surface, sequential_empirical};
    use crate::hermite::{coefficient_table, QuadratureSpec, Subordinator};

    #[test]
    fn agrees_with_surfaces() {
        let g = Subordinator::identity();
        let t: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let grid = EvaluationGrid::from_finite(vec![vec![-0.5, 0.0, 0.8]], t).unwrap();
        let table = coefficient_table(&g, &grid, 1, &QuadratureSpec::default()).unwrap();
        let lead = LeadingTerm::new(&table, 1).unwrap();
        let f = DistributionTable::from_coefficients(&table);
        let xs = [0.1, -0.7, 1.4, 0.2, -0.1, 0.9, -2.0, 0.5];
        let d = 3.0;
        let stat = reduction_statistic(&xs, &xs, &lead, &f, &grid, d).unwrap();
        let r = sequential_empirical(&xs, &grid, &f).unwrap().surface;
        let l = leading_term_surface(&xs, &lead, &grid, d).unwrap();
        for (ti, &n) in r.prefix.iter().enumerate().skip(1) {
            let sup = r.values[ti]
                .iter()
                .zip(&l.values[ti])
                .map(|(a, b)| (a / d - b).abs())
                .fold(0.0, f64::max);
            assert!((stat.per_n[n - 1] - sup).abs() < 1e-12);
        }
        assert!(stat.per_n.iter().all(|&v| v <= stat.max));
    }
}
