//! Hermite coefficients `J_l(x) = E[1{G(X) <= x} H_l(X)]` of indicator
//! functionals, pointwise and over a lattice.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::poly::{multi_indices, MultiIndex};
use super::quadrature::{integrate_region, Estimate, QuadratureSpec, Weight};
use super::subordinator::Subordinator;
use crate::empirical::EvaluationGrid;
use crate::error::{Error, Result};

/// `J_l(x)`. The zero multi-index gives `F(x) = P(G(X) <= x)`.
pub fn hermite_coefficient(
    g: &Subordinator,
    x: &[f64],
    l: &[usize],
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    if l.len() != g.p {
        return Err(Error::DimensionMismatch { expected: g.p, got: l.len() });
    }
    if x.iter().any(|&v| v == f64::NEG_INFINITY) {
        return Ok(Estimate::default());
    }
    if x.iter().all(|&v| v == f64::INFINITY) {
        let value = if l.iter().all(|&k| k == 0) { 1.0 } else { 0.0 };
        return Ok(Estimate { value, error: 0.0 });
    }
    let weights: Vec<Weight> = l.iter().map(|&k| Weight::Hermite(k)).collect();
    integrate_region(g, x, &weights, quad)
}

/// Coefficients for every lattice point and every multi-index of the listed
/// total orders. Order 0 is always included and holds `F`.
#[derive(Debug, Clone, Serialize)]
pub struct HermiteCoeffTable {
    pub grid: EvaluationGrid,
    pub p: usize,
    pub max_order: usize,
    pub orders: Vec<usize>,
    pub indices: Vec<MultiIndex>,
    /// `entries[point][k]` belongs to `indices[k]`.
    pub entries: Vec<Vec<Estimate>>,
}

impl HermiteCoeffTable {
    fn slot(&self, l: &[usize]) -> Option<usize> {
        self.indices.iter().position(|k| k.as_slice() == l)
    }

    pub fn get(&self, point: usize, l: &[usize]) -> Option<Estimate> {
        self.slot(l).and_then(|k| self.entries.get(point).map(|row| row[k]))
    }

    /// `F(x)` at lattice point `point`.
    pub fn distribution(&self, point: usize) -> f64 {
        self.entries[point][0].value
    }

    pub fn distribution_values(&self) -> Vec<f64> {
        (0..self.entries.len()).map(|i| self.distribution(i)).collect()
    }

    /// Multi-indices of total order `m` with their values at every point:
    /// `out[point][k]`, ordered as [`multi_indices`].
    pub fn order_block(&self, m: usize) -> Result<(Vec<MultiIndex>, Vec<Vec<f64>>)> {
        let idx = multi_indices(self.p, m);
        let slots: Vec<usize> = idx
            .iter()
            .map(|l| self.slot(l).ok_or_else(|| Error::MissingCoefficient(l.clone())))
            .collect::<Result<_>>()?;
        let vals = self
            .entries
            .iter()
            .map(|row| slots.iter().map(|&s| row[s].value).collect())
            .collect();
        Ok((idx, vals))
    }

    /// CSV with header `x1..xq,l1..lp,value,err`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let q = self.grid.q();
        let head: Vec<String> = (1..=q)
            .map(|j| format!("x{j}"))
            .chain((1..=self.p).map(|j| format!("l{j}")))
            .chain(["value".to_string(), "err".to_string()])
            .collect();
        out.push_str(&head.join(","));
        out.push('\n');
        for (i, row) in self.entries.iter().enumerate() {
            let x = self.grid.point(i);
            for (l, e) in self.indices.iter().zip(row) {
                let mut line = String::new();
                for v in &x {
                    let _ = write!(line, "{},", fmt_ext(*v));
                }
                for k in l {
                    let _ = write!(line, "{k},");
                }
                let _ = write!(line, "{:e},{:e}", e.value, e.error);
                out.push_str(&line);
                out.push('\n');
            }
        }
        out
    }
}

pub(crate) fn fmt_ext(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

pub fn coefficient_table(
    g: &Subordinator,
    grid: &EvaluationGrid,
    max_order: usize,
    quad: &QuadratureSpec,
) -> Result<HermiteCoeffTable> {
    let orders: Vec<usize> = (0..=max_order).collect();
    coefficient_table_orders(g, grid, &orders, quad)
}

/// Like [`coefficient_table`] but only for the listed total orders.
pub fn coefficient_table_orders(
    g: &Subordinator,
    grid: &EvaluationGrid,
    orders: &[usize],
    quad: &QuadratureSpec,
) -> Result<HermiteCoeffTable> {
    if grid.q() != g.q() {
        return Err(Error::GridMismatch(format!(
            "grid has {} axes, subordinator has {} components",
            grid.q(),
            g.q()
        )));
    }
    let mut orders: Vec<usize> = orders.to_vec();
    orders.push(0);
    orders.sort_unstable();
    orders.dedup();
    let indices: Vec<MultiIndex> = orders.iter().flat_map(|&m| multi_indices(g.p, m)).collect();
    let entries = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            indices
                .iter()
                .map(|l| hermite_coefficient(g, &x, l, quad))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HermiteCoeffTable {
        grid: grid.clone(),
        p: g.p,
        max_order: *orders.last().unwrap(),
        orders,
        indices,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::quadrature::std_normal_pdf;
    use crate::hermite::subordinator::{Component, Interval};

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    pub(crate) fn square_indicator() -> Subordinator {
        let c = (2.0 * 2f64.ln()).sqrt();
        Subordinator::new(
            1,
            vec![
                Component::Square { input: 1 },
                Component::Indicator {
                    input: 1,
                    intervals: vec![
                        Interval { lo: f64::NEG_INFINITY, hi: -c },
                        Interval { lo: 0.0, hi: c },
                    ],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_oracles() {
        let g = Subordinator::identity();
        for q in 1..=6 {
            let v = hermite_coefficient(&g, &[f64::INFINITY], &[q], &quad()).unwrap();
            assert!(v.value.abs() < 1e-12);
        }
        let j1 = hermite_coefficient(&g, &[0.0], &[1], &quad()).unwrap();
        assert!((j1.value + 0.398_942_280_401_432_7).abs() < 1e-12);
    }

    #[test]
    fn square_indicator_oracles() {
        let g = square_indicator();
        let c2 = 2.0 * 2f64.ln();
        let joint = hermite_coefficient(&g, &[c2, 0.0], &[1], &quad()).unwrap();
        assert!((joint.value + 0.5 * std_normal_pdf(0.0)).abs() < 1e-9);
        let g2 = g.marginal(1);
        let j3 = hermite_coefficient(&g2, &[0.5], &[3], &quad()).unwrap();
        assert!((j3.value - std_normal_pdf(0.0) * 2.0 * 2f64.ln()).abs() < 1e-9);
        let j1 = hermite_coefficient(&g2, &[0.5], &[1], &quad()).unwrap();
        let j2 = hermite_coefficient(&g2, &[0.5], &[2], &quad()).unwrap();
        assert!(j1.value.abs() < 1e-9 && j2.value.abs() < 1e-9);
    }

    #[test]
    fn table_layout() {
        let g = Subordinator::identity();
        let grid = EvaluationGrid::from_finite(vec![vec![0.0]], vec![0.0, 1.0]).unwrap();
        let t = coefficient_table(&g, &grid, 1, &quad()).unwrap();
        let zero = grid.find(&[0.0]).unwrap();
        assert!((t.distribution(zero) - 0.5).abs() < 1e-12);
        assert!((t.get(zero, &[1]).unwrap().value + std_normal_pdf(0.0)).abs() < 1e-12);
        assert_eq!(t.distribution(grid.find(&[f64::INFINITY]).unwrap()), 1.0);
        let csv = t.to_csv();
        assert!(csv.starts_with("x1,l1,value,err\n"));
        assert_eq!(csv.lines().count(), 1 + 3 * 2);
    }

    #[test]
    fn parseval_bound() {
        let g = square_indicator();
        let grid = EvaluationGrid::from_finite(vec![vec![0.5, 1.0, 2.5], vec![0.0, 0.5]], vec![0.0, 1.0]).unwrap();
        let t = coefficient_table(&g, &grid, 8, &quad()).unwrap();
        for i in 0..grid.len() {
            let f = t.distribution(i);
            let energy: f64 = t
                .indices
                .iter()
                .zip(&t.entries[i])
                .skip(1)
                .map(|(l, e)| e.value * e.value / crate::scalar::factorial::<f64>(l[0]))
                .sum();
            assert!(energy <= f * (1.0 - f) + 1e-9, "point {i}: {energy} > {}", f * (1.0 - f));
        }
    }
}
