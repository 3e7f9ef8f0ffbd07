use serde::Serialize;

use super::counting::LatticeCounter;
use super::grid::EvaluationGrid;
use crate::error::{Error, Result};
use crate::hermite::{HermiteCoeffTable, QuadratureSpec, Subordinator};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSource {
    Quadrature,
    MonteCarlo { samples: usize, seed: u64 },
}

/// `F(x) = P(G(X) <= x)` on every lattice point, with error estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionTable {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub source: DistributionSource,
}

/// Sample count of the Monte Carlo fallback.
pub const MC_SAMPLES: usize = 1_000_000;

impl DistributionTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reads the order-0 slot of a coefficient table.
    pub fn from_coefficients(table: &HermiteCoeffTable) -> Self {
        Self {
            values: table.distribution_values(),
            errors: table.entries.iter().map(|row| row[0].error).collect(),
            source: DistributionSource::Quadrature,
        }
    }

    pub fn quadrature(g: &Subordinator, grid: &EvaluationGrid, quad: &QuadratureSpec) -> Result<Self> {
        let t = crate::hermite::coefficient_table_orders(g, grid, &[0], quad)?;
        Ok(Self::from_coefficients(&t))
    }

    /// Empirical distribution of `G` on `samples` independent standard
    /// normal inputs. Errors are binomial standard errors.
    pub fn monte_carlo(g: &Subordinator, grid: &EvaluationGrid, samples: usize, seed: u64) -> Result<Self> {
        if grid.q() != g.q() {
            return Err(Error::GridMismatch(format!(
                "grid has {} axes, subordinator has {} components",
                grid.q(),
                g.q()
            )));
        }
        let mut rng = SplitMix64::new(seed);
        let mut counter = LatticeCounter::new(grid);
        let mut s = vec![0.0; g.p];
        let mut y = vec![0.0; g.q()];
        for _ in 0..samples {
            rng.fill_normal(&mut s);
            g.eval_into(&s, &mut y);
            counter.add(&y);
        }
        let n = samples as f64;
        let values: Vec<f64> = counter.cumulative().iter().map(|&c| c as f64 / n).collect();
        let errors = values.iter().map(|f| (f * (1.0 - f) / n).sqrt()).collect();
        Ok(Self {
            values,
            errors,
            source: DistributionSource::MonteCarlo { samples, seed },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::quadrature::std_normal_cdf;

    #[test]
    fn quadrature_and_monte_carlo_agree() {
        let g = Subordinator::identity();
        let grid = EvaluationGrid::from_finite(vec![vec![-1.0, 0.0, 0.7]], vec![0.0, 1.0]).unwrap();
        let q = DistributionTable::quadrature(&g, &grid, &QuadratureSpec::default()).unwrap();
        let mc = DistributionTable::monte_carlo(&g, &grid, 200_000, 5).unwrap();
        for i in 0..grid.len() {
            let x = grid.point(i)[0];
            assert!((q.values[i] - std_normal_cdf(x)).abs() < 1e-10);
            assert!((mc.values[i] - q.values[i]).abs() <= 4.0 * mc.errors[i] + 1e-12);
        }
    }
}
