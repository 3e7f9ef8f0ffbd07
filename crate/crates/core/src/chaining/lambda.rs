//! Monotone functions `Λ_j` controlling the chaining construction.
//!
//! For a subordinator `G` with rank `m`,
//! `Λ_j(x) = F_j(x) + Σ_{|l|=m} ∫_{G_j(s) <= x} |H_l(s)| / l! φ(s) ds`,
//! which for a single input coordinate reduces to
//! `F_j(x) + ∫_{G_j(s) <= x} |H_m(s)| / m! φ(s) ds`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::grid::pseudo_inputs;
use crate::error::{Error, Result};
use crate::hermite::quadrature::{integrate_region, Weight};
use crate::hermite::{multi_indices, MultiIndex, QuadratureSpec, Subordinator};
use crate::scalar::factorial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    /// One Gaussian input, several functionals of it.
    UnivariateSubordination,
    /// A Gaussian vector input.
    MultivariateSubordination,
}

/// Default number of quantile knots per axis.
pub const DEFAULT_KNOTS: usize = 4096;

/// A nondecreasing right-continuous function on `[-∞, ∞]` given by a table:
/// knot values `value[i] = Λ(knot[i])` and left limits `left[i] = Λ(knot[i]-)`.
/// Between knots it is evaluated exactly when an exact source is attached,
/// otherwise by linear interpolation from `value[i]` to `left[i + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaAxis {
    pub knots: Vec<f64>,
    pub value: Vec<f64>,
    pub left: Vec<f64>,
    pub total: f64,
}

impl LambdaAxis {
    /// Table over finite knots: zero below the first knot, `total` from the
    /// last one on.
    pub fn from_table(knots: Vec<f64>, value: Vec<f64>, left: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        let bad = |m: &str| Err(Error::InvalidModel(format!("lambda table: {m}")));
        if n == 0 || value.len() != n || left.len() != n {
            return bad("knots, values and left limits must have equal nonzero length");
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) || knots.iter().any(|k| !k.is_finite()) {
            return bad("knots must be finite and strictly increasing");
        }
        let mut prev = 0.0;
        for i in 0..n {
            if !(left[i] >= prev && value[i] >= left[i]) {
                return bad("values must be nondecreasing with left[i] <= value[i]");
            }
            prev = value[i];
        }
        let total = value[n - 1];
        Ok(Self { knots, value, left, total })
    }

    fn interpolate(&self, x: f64) -> f64 {
        if x < self.knots[0] {
            return 0.0;
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        if i + 1 == self.knots.len() {
            return self.total;
        }
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let w = (x - a) / (b - a);
        self.value[i] + w * (self.left[i + 1] - self.value[i])
    }

    fn interpolate_left(&self, x: f64) -> f64 {
        if x <= self.knots[0] {
            return 0.0;
        }
        let i = self.knots.partition_point(|&k| k < x);
        if i < self.knots.len() && self.knots[i] == x {
            return self.left[i];
        }
        self.interpolate(x)
    }

    /// Generalized inverse `inf{x : Λ(x) >= level}` on the interpolated table.
    fn interpolate_inverse(&self, level: f64) -> f64 {
        if level <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let i = self.value.partition_point(|&v| v < level);
        if i == self.value.len() {
            return f64::INFINITY;
        }
        if i == 0 || self.left[i] < level {
            return self.knots[i];
        }
        let (a, b) = (self.knots[i - 1], self.knots[i]);
        let (va, vb) = (self.value[i - 1], self.left[i]);
        (a + (level - va) / (vb - va) * (b - a)).min(b)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaSpec {
    pub m: usize,
    pub mode: LambdaMode,
    pub total: f64,
    pub axes: Vec<LambdaAxis>,
    #[serde(skip)]
    exact: Option<Exact>,
}

#[derive(Debug, Clone)]
struct Exact {
    g: Subordinator,
    quad: QuadratureSpec,
    indices: Vec<MultiIndex>,
    /// `E|H_k(X)|` for `k <= m`.
    abs_moments: Vec<f64>,
}

impl Exact {
    fn value(&self, j: usize, x: f64, left: bool) -> Result<f64> {
        if x == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let x = if left { x.next_down() } else { x };
        let comp = &self.g.components[j];
        if let (Some(i), Some(c)) = (comp.coordinate(), comp.on_first_input()) {
            // only coordinate i enters; the others integrate to E|H_k|
            let line = Subordinator { p: 1, components: vec![c] };
            let f = integrate_region(&line, &[x], &[Weight::Hermite(0)], &self.quad)?.value;
            let mut own = vec![f64::NAN; self.abs_moments.len()];
            let mut acc = f;
            for l in &self.indices {
                let k = l[i];
                if own[k].is_nan() {
                    own[k] = integrate_region(&line, &[x], &[Weight::AbsHermite(k)], &self.quad)?.value;
                }
                let norm: f64 = l.iter().map(|&k| factorial::<f64>(k)).product();
                let rest: f64 = (0..self.g.p).filter(|&k| k != i).map(|k| self.abs_moments[l[k]]).product();
                acc += own[k] * rest / norm;
            }
            return Ok(acc);
        }
        let marginal = self.g.marginal(j);
        let f = integrate_region(&marginal, &[x], &vec![Weight::Hermite(0); self.g.p], &self.quad)?.value;
        let mut acc = f;
        for l in &self.indices {
            let norm: f64 = l.iter().map(|&k| factorial::<f64>(k)).product();
            let w: Vec<Weight> = l.iter().map(|&k| Weight::AbsHermite(k)).collect();
            let integral = integrate_region(&marginal, &[x], &w, &self.quad)?.value;
            acc += integral / norm;
        }
        Ok(acc)
    }
}

impl LambdaSpec {
    /// Builds tables for every output coordinate of `g`.
    pub fn build(g: &Subordinator, m: usize, mode: LambdaMode, quad: &QuadratureSpec) -> Result<Self> {
        Self::build_with_knots(g, m, mode, quad, DEFAULT_KNOTS)
    }

    pub fn build_with_knots(
        g: &Subordinator,
        m: usize,
        mode: LambdaMode,
        quad: &QuadratureSpec,
        knots: usize,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config { field: "m".into(), message: "rank must be at least 1".into() });
        }
        if mode == LambdaMode::UnivariateSubordination && g.p != 1 {
            return Err(Error::InvalidSubordinator(
                "univariate subordination needs a single Gaussian input".into(),
            ));
        }
        let id = Subordinator::identity();
        let abs_moments = (0..=m)
            .map(|k| integrate_region(&id, &[f64::INFINITY], &[Weight::AbsHermite(k)], quad).map(|e| e.value))
            .collect::<Result<Vec<_>>>()?;
        let indices = multi_indices(g.p, m);
        let total = 1.0
            + indices
                .iter()
                .map(|l| l.iter().map(|&k| abs_moments[k] / factorial::<f64>(k)).product::<f64>())
                .sum::<f64>();
        let exact = Exact {
            g: g.clone(),
            quad: *quad,
            indices: indices.clone(),
            abs_moments,
        };
        // knots at equal Λ-mass spacing of a weighted pseudo sample
        let inputs = pseudo_inputs(g.p, 4 * knots.max(256));
        let weights: Vec<f64> = inputs
            .iter()
            .map(|s| {
                1.0 + indices
                    .iter()
                    .map(|l| {
                        l.iter()
                            .zip(s)
                            .map(|(&k, &v)| Weight::AbsHermite(k).eval(v) / factorial::<f64>(k))
                            .product::<f64>()
                    })
                    .sum::<f64>()
            })
            .collect();
        let axes = (0..g.q())
            .map(|j| {
                let comp = &g.components[j];
                let mut pts: Vec<(f64, f64)> =
                    inputs.iter().zip(&weights).map(|(s, &w)| (comp.eval(s), w)).collect();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mass: f64 = pts.iter().map(|p| p.1).sum();
                let mut ks: Vec<f64> = Vec::with_capacity(knots + 8);
                let mut acc = 0.0;
                let mut next = 1;
                for &(y, w) in &pts {
                    acc += w;
                    while next <= knots && acc >= mass * next as f64 / (knots + 1) as f64 {
                        ks.push(y);
                        next += 1;
                    }
                }
                ks.extend(comp.atoms());
                ks.push(f64::NEG_INFINITY);
                ks.push(f64::INFINITY);
                ks.sort_by(f64::total_cmp);
                ks.dedup();
                let atoms = comp.atoms();
                let vals: Vec<(f64, f64)> = ks
                    .par_iter()
                    .map(|&k| {
                        if k == f64::NEG_INFINITY {
                            return Ok((0.0, 0.0));
                        }
                        if k == f64::INFINITY {
                            return Ok((total, total));
                        }
                        let v = exact.value(j, k, false)?;
                        let l = if atoms.contains(&k) { exact.value(j, k, true)? } else { v };
                        Ok((v, l.min(v)))
                    })
                    .collect::<Result<_>>()?;
                Ok(LambdaAxis {
                    knots: ks,
                    value: vals.iter().map(|v| v.0).collect(),
                    left: vals.iter().map(|v| v.1).collect(),
                    total,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            m,
            mode,
            total,
            axes,
            exact: Some(exact),
        })
    }

    /// Spec from explicit tables sharing a common total mass.
    pub fn from_tables(axes: Vec<LambdaAxis>, m: usize, mode: LambdaMode) -> Result<Self> {
        let total = axes
            .first()
            .map(|a| a.total)
            .ok_or_else(|| Error::InvalidModel("lambda spec needs an axis".into()))?;
        if axes.iter().any(|a| (a.total - total).abs() > 1e-12 * total.max(1.0)) {
            return Err(Error::InvalidModel("lambda axes must share Λ(∞)".into()));
        }
        Ok(Self { m, mode, total, axes, exact: None })
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    /// `Λ_j(x)`.
    pub fn value(&self, j: usize, x: f64) -> Result<f64> {
        if x == f64::INFINITY {
            return Ok(self.total);
        }
        match &self.exact {
            Some(e) => e.value(j, x, false),
            None => Ok(self.axes[j].interpolate(x)),
        }
    }

    /// `Λ_j(x-)`.
    pub fn left_limit(&self, j: usize, x: f64) -> Result<f64> {
        if x == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        if x == f64::INFINITY {
            return Ok(self.total);
        }
        match &self.exact {
            Some(e) => e.value(j, x, true),
            None => Ok(self.axes[j].interpolate_left(x)),
        }
    }

    /// `Λ(x) = Σ_j Λ_j(x_j)`.
    pub fn joint(&self, x: &[f64]) -> Result<f64> {
        x.iter().enumerate().map(|(j, &v)| self.value(j, v)).sum()
    }

    /// `inf{x : Λ_j(x) >= level}`. The table brackets the answer; with an
    /// exact source it is refined by bisection on exact values.
    pub fn inverse(&self, j: usize, level: f64) -> Result<f64> {
        let axis = &self.axes[j];
        if level <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if self.exact.is_none() {
            return Ok(axis.interpolate_inverse(level));
        }
        let i = axis.value.partition_point(|&v| v < level);
        if i == axis.value.len() {
            return Ok(f64::INFINITY);
        }
        if i == 0 || axis.left[i] < level {
            return Ok(axis.knots[i]);
        }
        let (mut lo, mut hi) = (axis.knots[i - 1], axis.knots[i]);
        if lo == f64::NEG_INFINITY {
            let mut step = 1.0;
            lo = hi.min(0.0) - step;
            while self.value(j, lo)? >= level {
                step *= 2.0;
                lo = hi.min(0.0) - step;
                if step > 1e300 {
                    return Ok(f64::NEG_INFINITY);
                }
            }
        }
        if hi == f64::INFINITY {
            let mut step = 1.0;
            hi = lo.max(0.0) + step;
            while self.value(j, hi)? < level {
                step *= 2.0;
                hi = lo.max(0.0) + step;
                if step > 1e300 {
                    return Ok(f64::INFINITY);
                }
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 1e-13 * (1.0 + hi.abs()) {
                break;
            }
            if self.value(j, mid)? >= level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn totals() {
        let id = LambdaSpec::build_with_knots(&Subordinator::identity(), 1, LambdaMode::UnivariateSubordination, &quad(), 256)
            .unwrap();
        assert!((id.total - (1.0 + (2.0 / std::f64::consts::PI).sqrt())).abs() < 1e-10);
        assert_eq!(id.value(0, f64::NEG_INFINITY).unwrap(), 0.0);
        assert!((id.value(0, 0.0).unwrap() - id.total / 2.0).abs() < 1e-10);
        let sq = LambdaSpec::build_with_knots(&Subordinator::square(), 2, LambdaMode::UnivariateSubordination, &quad(), 256)
            .unwrap();
        let phi1 = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((sq.total - (1.0 + 2.0 * phi1)).abs() < 1e-10);
        assert!((sq.total - 1.483_941_4).abs() < 1e-7);
    }

    #[test]
    fn generalized_inverse() {
        let id = LambdaSpec::build_with_knots(&Subordinator::identity(), 1, LambdaMode::UnivariateSubordination, &quad(), 256)
            .unwrap();
        assert!(id.inverse(0, id.total / 2.0).unwrap().abs() < 1e-9);
        let x = id.inverse(0, 0.3).unwrap();
        assert!((id.value(0, x).unwrap() - 0.3).abs() < 1e-9);
        // a table with an atom: the inverse of a level inside the jump is the atom
        let t = LambdaAxis::from_table(vec![0.0, 1.0, 2.0], vec![0.2, 0.8, 1.0], vec![0.0, 0.4, 1.0]).unwrap();
        let spec = LambdaSpec::from_tables(vec![t], 1, LambdaMode::UnivariateSubordination).unwrap();
        assert_eq!(spec.inverse(0, 0.1).unwrap(), 0.0);
        assert_eq!(spec.inverse(0, 0.6).unwrap(), 1.0);
        assert!((spec.inverse(0, 0.3).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(spec.left_limit(0, 1.0).unwrap(), 0.4);
    }
}
