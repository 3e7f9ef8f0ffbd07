use std::fmt::Write as _;

use serde::Serialize;

use super::counting::LatticeCounter;
use super::distribution::{DistributionSource, DistributionTable};
use super::grid::EvaluationGrid;
use crate::error::{Error, Result};
use crate::hermite::coefficients::fmt_ext;
use crate::hermite::{hermite_all, HermiteCoeffTable, MultiIndex};
use crate::scalar::factorial;

/// Values on the `(t, x)` lattice: `values[t][point]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Surface {
    pub n: usize,
    pub t_points: Vec<f64>,
    /// `⌊N t⌋` for each `t`.
    pub prefix: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

/// Sequential empirical process together with the source of `F`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeqEmpiricalSurface {
    pub surface: Surface,
    pub source: DistributionSource,
}

impl Surface {
    /// CSV with header `t,x1..xq,value`.
    pub fn to_csv(&self, grid: &EvaluationGrid) -> String {
        let mut out = String::from("t");
        for j in 1..=grid.q() {
            let _ = write!(out, ",x{j}");
        }
        out.push_str(",value\n");
        for (t, row) in self.t_points.iter().zip(&self.values) {
            for (i, v) in row.iter().enumerate() {
                let _ = write!(out, "{t}");
                for x in grid.point(i) {
                    let _ = write!(out, ",{}", fmt_ext(x));
                }
                let _ = writeln!(out, ",{v:e}");
            }
        }
        out
    }
}

pub(crate) fn prefix_lengths(n: usize, t_points: &[f64]) -> Vec<usize> {
    t_points
        .iter()
        .map(|&t| ((n as f64 * t).floor() as usize).min(n))
        .collect()
}

fn check_sample(ys: &[f64], q: usize) -> Result<usize> {
    if q == 0 || ys.len() % q != 0 {
        return Err(Error::GridMismatch(format!(
            "sample of length {} is not a whole number of rows of width {q}",
            ys.len()
        )));
    }
    Ok(ys.len() / q)
}

/// `R_N(x, t) = #{j <= ⌊Nt⌋ : Y_j <= x} - ⌊Nt⌋ F(x)` for a row-major `N × q`
/// sample.
pub fn sequential_empirical(ys: &[f64], grid: &EvaluationGrid, f: &DistributionTable) -> Result<SeqEmpiricalSurface> {
    let q = grid.q();
    let n = check_sample(ys, q)?;
    if f.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "distribution table has {} entries, grid has {}",
            f.len(),
            grid.len()
        )));
    }
    let prefix = prefix_lengths(n, grid.t_points());
    let mut counter = LatticeCounter::new(grid);
    let mut done = 0;
    let mut values = Vec::with_capacity(prefix.len());
    for &upto in &prefix {
        while done < upto {
            counter.add(&ys[done * q..(done + 1) * q]);
            done += 1;
        }
        let nt = upto as f64;
        values.push(
            counter
                .cumulative()
                .iter()
                .zip(&f.values)
                .map(|(&c, &fx)| c as f64 - nt * fx)
                .collect(),
        );
    }
    Ok(SeqEmpiricalSurface {
        surface: Surface {
            n,
            t_points: grid.t_points().to_vec(),
            prefix,
            values,
        },
        source: f.source.clone(),
    })
}

/// `Σ_{|l|=m} J_l(x)/l! H_l(X_j)`, stored as the coefficients `J_l(x)/l!`
/// per lattice point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeadingTerm {
    pub m: usize,
    pub p: usize,
    pub indices: Vec<MultiIndex>,
    /// `coef[point][k] = J_{indices[k]}(x) / indices[k]!`
    pub coef: Vec<Vec<f64>>,
}

impl LeadingTerm {
    pub fn new(table: &HermiteCoeffTable, m: usize) -> Result<Self> {
        let (indices, values) = table.order_block(m)?;
        let norms: Vec<f64> = indices
            .iter()
            .map(|l| l.iter().map(|&k| factorial::<f64>(k)).product())
            .collect();
        let coef = values
            .into_iter()
            .map(|row| row.iter().zip(&norms).map(|(v, n)| v / n).collect())
            .collect();
        Ok(Self { m, p: table.p, indices, coef })
    }

    /// `H_l(X_j)` for every stored multi-index.
    pub fn features(&self, x: &[f64], out: &mut [f64]) {
        let tables: Vec<Vec<f64>> = x
            .iter()
            .map(|&v| hermite_all(self.m, v).expect("order checked at construction"))
            .collect();
        for (o, l) in out.iter_mut().zip(&self.indices) {
            *o = l.iter().enumerate().map(|(i, &k)| tables[i][k]).product();
        }
    }

    /// Prefix sums `Σ_{j<=n} H_l(X_j)` for `n = 0..=N`, flattened
    /// `[n * K + k]` with `K` multi-indices.
    pub fn partial_sums(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let n = check_sample(xs, self.p)?;
        let k = self.indices.len();
        let mut out = vec![0.0; (n + 1) * k];
        let mut feat = vec![0.0; k];
        for j in 0..n {
            self.features(&xs[j * self.p..(j + 1) * self.p], &mut feat);
            for i in 0..k {
                out[(j + 1) * k + i] = out[j * k + i] + feat[i];
            }
        }
        Ok(out)
    }
}

/// `(J-term)(x) d_N^{-1} Σ_{j <= ⌊Nt⌋} H(X_j)` on the lattice.
pub fn leading_term_surface(
    xs: &[f64],
    lead: &LeadingTerm,
    grid: &EvaluationGrid,
    d_n: f64,
) -> Result<Surface> {
    if lead.coef.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "coefficients cover {} points, grid has {}",
            lead.coef.len(),
            grid.len()
        )));
    }
    let sums = lead.partial_sums(xs)?;
    let n = xs.len() / lead.p;
    let k = lead.indices.len();
    let prefix = prefix_lengths(n, grid.t_points());
    let values = prefix
        .iter()
        .map(|&m| {
            let s = &sums[m * k..(m + 1) * k];
            lead.coef
                .iter()
                .map(|c| c.iter().zip(s).map(|(a, b)| a * b).sum::<f64>() / d_n)
                .collect()
        })
        .collect();
    Ok(Surface {
        n,
        t_points: grid.t_points().to_vec(),
        prefix,
        values,
    })
}
