use rayon::prelude::*;
use serde::Serialize;

use super::coefficients::hermite_coefficient;
use super::poly::{multi_indices, MultiIndex};
use super::quadrature::QuadratureSpec;
use super::subordinator::Subordinator;
use crate::empirical::EvaluationGrid;
use crate::error::{Error, Result};

/// Pointwise Hermite rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointRank {
    Finite(usize),
    /// Every coefficient up to `qmax` is zero.
    ExceedsQmax,
}

impl PointRank {
    pub fn finite(self) -> Option<usize> {
        match self {
            PointRank::Finite(m) => Some(m),
            PointRank::ExceedsQmax => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankWitness {
    pub point: Vec<f64>,
    pub index: MultiIndex,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermiteRankResult {
    pub pointwise: Vec<PointRank>,
    pub family: PointRank,
    pub witness: Option<RankWitness>,
    pub tol: f64,
    pub qmax: usize,
}

/// Threshold below which a coefficient counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-7;

/// Returns `Some(nonzero?)`, or `None` when the error bound is too wide to
/// decide.
fn classify(value: f64, error: f64, tol: f64) -> Option<bool> {
    if value.abs() > tol.max(10.0 * error) {
        Some(true)
    } else if error <= tol {
        Some(false)
    } else {
        None
    }
}

/// First order `q <= qmax` with a coefficient above `tol`, with the largest
/// coefficient of that order.
fn rank_with_witness(
    g: &Subordinator,
    x: &[f64],
    qmax: usize,
    tol: f64,
    quad: &QuadratureSpec,
) -> Result<(PointRank, Option<RankWitness>)> {
    if qmax == 0 {
        return Err(Error::Config {
            field: "qmax".into(),
            message: "must be at least 1".into(),
        });
    }
    if EvaluationGrid::is_degenerate(x) {
        return Ok((PointRank::ExceedsQmax, None));
    }
    for q in 1..=qmax {
        let mut best: Option<RankWitness> = None;
        for l in multi_indices(g.p, q) {
            let e = hermite_coefficient(g, x, &l, quad)?;
            match classify(e.value, e.error, tol) {
                Some(true) => {
                    if best.as_ref().map_or(true, |b| e.value.abs() > b.value.abs()) {
                        best = Some(RankWitness {
                            point: x.to_vec(),
                            index: l,
                            value: e.value,
                            error: e.error,
                        });
                    }
                }
                Some(false) => {}
                None => {
                    return Err(Error::QuadratureNotConverged {
                        estimate: e.error,
                        tolerance: tol,
                    })
                }
            }
        }
        if best.is_some() {
            return Ok((PointRank::Finite(q), best));
        }
    }
    Ok((PointRank::ExceedsQmax, None))
}

pub fn hermite_rank_at(
    g: &Subordinator,
    x: &[f64],
    qmax: usize,
    tol: f64,
    quad: &QuadratureSpec,
) -> Result<PointRank> {
    rank_with_witness(g, x, qmax, tol, quad).map(|r| r.0)
}

/// Minimum of the pointwise ranks over the lattice. The witness is the
/// lattice point with the largest coefficient at the family order.
pub fn hermite_rank_family(
    g: &Subordinator,
    grid: &EvaluationGrid,
    qmax: usize,
    tol: f64,
    quad: &QuadratureSpec,
) -> Result<HermiteRankResult> {
    if grid.q() != g.q() {
        return Err(Error::GridMismatch(format!(
            "grid has {} axes, subordinator has {} components",
            grid.q(),
            g.q()
        )));
    }
    let per_point: Vec<(PointRank, Option<RankWitness>)> = (0..grid.len())
        .into_par_iter()
        .map(|i| rank_with_witness(g, &grid.point(i), qmax, tol, quad))
        .collect::<Result<_>>()?;
    let family = per_point
        .iter()
        .map(|r| r.0)
        .min()
        .unwrap_or(PointRank::ExceedsQmax);
    let witness = per_point
        .iter()
        .filter(|r| r.0 == family)
        .filter_map(|r| r.1.clone())
        .max_by(|a, b| a.value.abs().total_cmp(&b.value.abs()));
    Ok(HermiteRankResult {
        pointwise: per_point.into_iter().map(|r| r.0).collect(),
        family,
        witness,
        tol,
        qmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::grid::default_t_points;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn pointwise_ranks() {
        let id = Subordinator::identity();
        assert_eq!(hermite_rank_at(&id, &[0.0], 6, 1e-7, &quad()).unwrap(), PointRank::Finite(1));
        let sq = Subordinator::square();
        let c2 = 2.0 * 2f64.ln();
        assert_eq!(hermite_rank_at(&sq, &[c2], 6, 1e-7, &quad()).unwrap(), PointRank::Finite(2));
        assert_eq!(
            hermite_rank_at(&sq, &[f64::INFINITY], 6, 1e-7, &quad()).unwrap(),
            PointRank::ExceedsQmax
        );
    }

    #[test]
    fn family_ranks() {
        let sq = Subordinator::square();
        let grid = EvaluationGrid::quantile(&sq, 33, default_t_points()).unwrap();
        let r = hermite_rank_family(&sq, &grid, 6, 1e-7, &quad()).unwrap();
        assert_eq!(r.family, PointRank::Finite(2));
        assert_eq!(r.witness.unwrap().index, vec![2]);
        let id = Subordinator::identity();
        let grid = EvaluationGrid::quantile(&id, 33, default_t_points()).unwrap();
        assert_eq!(hermite_rank_family(&id, &grid, 6, 1e-7, &quad()).unwrap().family, PointRank::Finite(1));
    }

    #[test]
    fn undecidable_coefficients_are_reported() {
        assert_eq!(classify(1e-3, 0.0, 1e-7), Some(true));
        assert_eq!(classify(1e-9, 1e-12, 1e-7), Some(false));
        assert_eq!(classify(1e-6, 1e-6, 1e-7), None);
    }
}
