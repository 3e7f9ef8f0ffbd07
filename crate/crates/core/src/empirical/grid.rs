use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::ext_real;
use crate::hermite::Subordinator;

/// Default bound on the number of x-lattice points.
pub const LATTICE_CAP: usize = 1 << 16;

/// Finite `(x, t)` lattice. Every x axis starts at `-∞` and ends at `+∞`;
/// `t` runs from 0 to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationGrid {
    #[serde(with = "ext_real::nested")]
    x_points: Vec<Vec<f64>>,
    t_points: Vec<f64>,
}

impl EvaluationGrid {
    pub fn new(x_points: Vec<Vec<f64>>, t_points: Vec<f64>) -> Result<Self> {
        Self::with_cap(x_points, t_points, LATTICE_CAP)
    }

    pub fn with_cap(x_points: Vec<Vec<f64>>, t_points: Vec<f64>, cap: usize) -> Result<Self> {
        let g = Self { x_points, t_points };
        g.validate(cap)?;
        Ok(g)
    }

    /// Adds the sentinels, sorts and removes duplicates.
    pub fn from_finite(finite: Vec<Vec<f64>>, t_points: Vec<f64>) -> Result<Self> {
        let x_points = finite
            .into_iter()
            .map(|mut axis| {
                axis.retain(|v| v.is_finite());
                axis.push(f64::NEG_INFINITY);
                axis.push(f64::INFINITY);
                axis.sort_by(f64::total_cmp);
                axis.dedup();
                axis
            })
            .collect();
        Self::new(x_points, t_points)
    }

    /// `per_axis` points per output coordinate at equal quantile spacing of
    /// `G_j(X)`, taken from a deterministic normal pseudo-sample.
    pub fn quantile(g: &Subordinator, per_axis: usize, t_points: Vec<f64>) -> Result<Self> {
        let sample = pseudo_sample(g, 8192);
        let finite = (0..g.q())
            .map(|j| {
                let mut col: Vec<f64> = sample.iter().map(|y| y[j]).collect();
                col.sort_by(f64::total_cmp);
                (1..=per_axis)
                    .map(|k| col[(k * col.len() / (per_axis + 1)).min(col.len() - 1)])
                    .collect()
            })
            .collect();
        Self::from_finite(finite, t_points)
    }

    fn validate(&self, cap: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGrid(m));
        if self.x_points.is_empty() {
            return bad("need at least one x axis".into());
        }
        for (j, axis) in self.x_points.iter().enumerate() {
            if axis.len() < 2
                || axis[0] != f64::NEG_INFINITY
                || *axis.last().unwrap() != f64::INFINITY
            {
                return bad(format!("axis {}: sentinels -inf and +inf required", j + 1));
            }
            if axis.windows(2).any(|w| !(w[0] < w[1])) {
                return bad(format!("axis {}: points must be strictly increasing", j + 1));
            }
        }
        let t = &self.t_points;
        if t.first() != Some(&0.0) || t.last() != Some(&1.0) || t.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("t points must increase strictly from 0 to 1".into());
        }
        let size = self
            .x_points
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.len()));
        match size {
            Some(n) if n <= cap => Ok(()),
            _ => Err(Error::SizeCapExceeded {
                requested: size.unwrap_or(usize::MAX),
                cap,
            }),
        }
    }

    pub fn q(&self) -> usize {
        self.x_points.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.x_points
    }

    pub fn t_points(&self) -> &[f64] {
        &self.t_points
    }

    pub fn shape(&self) -> Vec<usize> {
        self.x_points.iter().map(Vec::len).collect()
    }

    /// Number of x-lattice points.
    pub fn len(&self) -> usize {
        self.x_points.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lattice coordinates of flat index `flat` (last axis fastest).
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.q()];
        for j in (0..self.q()).rev() {
            let n = self.x_points[j].len();
            idx[j] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.x_points)
            .fold(0, |acc, (&i, axis)| acc * axis.len() + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .zip(&self.x_points)
            .map(|(&i, axis)| axis[i])
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|f| self.point(f))
    }

    /// Flat index of the lattice point equal to `x`, if present.
    pub fn find(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.q() {
            return None;
        }
        let idx: Option<Vec<usize>> = x
            .iter()
            .zip(&self.x_points)
            .map(|(v, axis)| axis.iter().position(|a| a == v))
            .collect();
        idx.map(|i| self.ravel(&i))
    }

    /// True if the point carries a sentinel that makes every indicator
    /// constant: any `-∞`, or all `+∞`.
    pub fn is_degenerate(x: &[f64]) -> bool {
        x.iter().any(|&v| v == f64::NEG_INFINITY) || x.iter().all(|&v| v == f64::INFINITY)
    }
}

/// `G` applied to a deterministic stratified standard normal sample.
pub(crate) fn pseudo_sample(g: &Subordinator, n: usize) -> Vec<Vec<f64>> {
    pseudo_inputs(g.p, n).iter().map(|s| g.eval(s)).collect()
}

/// Deterministic standard normal points in `R^p`: stratified in the first
/// coordinate, Halton in the others.
pub(crate) fn pseudo_inputs(p: usize, n: usize) -> Vec<Vec<f64>> {
    let normal = Normal::standard();
    const BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    (0..n)
        .map(|i| {
            (0..p)
                .map(|k| {
                    let u = if k == 0 {
                        (i as f64 + 0.5) / n as f64
                    } else {
                        let b = BASES[(k - 1) % BASES.len()];
                        let mut f = 1.0 / b as f64;
                        let (mut r, mut m) = (0.0, i as u64 + 1);
                        while m > 0 {
                            r += f * (m % b) as f64;
                            m /= b;
                            f /= b as f64;
                        }
                        r
                    };
                    normal.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12))
                })
                .collect()
        })
        .collect()
}

/// Default `t` resolution for surfaces.
pub fn default_t_points() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentinels_are_required() {
        assert!(EvaluationGrid::new(vec![vec![0.0, f64::INFINITY]], vec![0.0, 1.0]).is_err());
        assert!(EvaluationGrid::new(vec![vec![f64::NEG_INFINITY, 0.0, f64::INFINITY]], vec![0.0, 1.0]).is_ok());
        assert!(EvaluationGrid::new(vec![vec![f64::NEG_INFINITY, f64::INFINITY]], vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn ravel_roundtrip() {
        let g = EvaluationGrid::from_finite(vec![vec![0.0, 1.0], vec![2.0]], vec![0.0, 1.0]).unwrap();
        assert_eq!(g.shape(), vec![4, 3]);
        for f in 0..g.len() {
            assert_eq!(g.ravel(&g.unravel(f)), f);
        }
        assert_eq!(g.point(g.find(&[1.0, 2.0]).unwrap()), vec![1.0, 2.0]);
    }

    #[test]
    fn quantile_axes() {
        let g = EvaluationGrid::quantile(&Subordinator::identity(), 33, default_t_points()).unwrap();
        let axis = &g.axes()[0];
        assert_eq!(axis.len(), 35);
        // median of the pseudo sample sits at 0
        assert!(axis[17].abs() < 1e-3);
    }

    #[test]
    fn lattice_cap() {
        let axis: Vec<f64> = (0..300).map(f64::from).collect();
        let r = EvaluationGrid::from_finite(vec![axis.clone(), axis], vec![0.0, 1.0]);
        assert!(matches!(r, Err(Error::SizeCapExceeded { .. })));
    }
}
