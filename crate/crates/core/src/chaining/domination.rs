use serde::Serialize;

use super::lambda::LambdaSpec;
use crate::error::{Error, Result};
use crate::hermite::{hermite_coefficient, multi_indices, QuadratureSpec, Subordinator};
use crate::scalar::factorial;

/// Default slack for quadrature noise.
pub const DOMINATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub pairs: usize,
    /// Smallest `ΔΛ - ΔF` over the pairs.
    pub worst_f_margin: f64,
    /// Smallest `ΔΛ - Σ_{|l|=m} |ΔJ_l| / l!` over the pairs.
    pub worst_j_margin: f64,
    pub worst_pair: usize,
    pub violations: usize,
    pub tol: f64,
}

/// For every pair `x <= y`: `F(y) - F(x) <= Λ(y) - Λ(x)` and
/// `Σ_{|l|=m} |J_l(y) - J_l(x)| / l! <= Λ(y) - Λ(x)`, up to `tol`.
pub fn lambda_domination_check(
    g: &Subordinator,
    lambda: &LambdaSpec,
    pairs: &[(Vec<f64>, Vec<f64>)],
    quad: &QuadratureSpec,
    tol: f64,
) -> Result<DominationReport> {
    let indices = multi_indices(g.p, lambda.m);
    let zero = vec![0usize; g.p];
    let mut report = DominationReport {
        pairs: pairs.len(),
        worst_f_margin: f64::INFINITY,
        worst_j_margin: f64::INFINITY,
        worst_pair: 0,
        violations: 0,
        tol,
    };
    for (idx, (x, y)) in pairs.iter().enumerate() {
        if x.len() != g.q() || y.len() != g.q() {
            return Err(Error::DimensionMismatch { expected: g.q(), got: x.len().min(y.len()) });
        }
        if x.iter().zip(y).any(|(a, b)| a > b) {
            return Err(Error::InvalidGrid(format!("pair {idx} is not ordered x <= y")));
        }
        let dl = lambda.joint(y)? - lambda.joint(x)?;
        let df = hermite_coefficient(g, y, &zero, quad)?.value - hermite_coefficient(g, x, &zero, quad)?.value;
        let mut dj = 0.0;
        for l in &indices {
            let norm: f64 = l.iter().map(|&k| factorial::<f64>(k)).product();
            let inc = hermite_coefficient(g, y, l, quad)?.value - hermite_coefficient(g, x, l, quad)?.value;
            dj += inc.abs() / norm;
        }
        let (mf, mj) = (dl - df, dl - dj);
        if mf < -tol || mj < -tol {
            report.violations += 1;
        }
        if mf.min(mj) < report.worst_f_margin.min(report.worst_j_margin) {
            report.worst_pair = idx;
        }
        report.worst_f_margin = report.worst_f_margin.min(mf);
        report.worst_j_margin = report.worst_j_margin.min(mj);
    }
    if report.violations > 0 {
        return Err(Error::DominationViolated {
            margin: report.worst_f_margin.min(report.worst_j_margin),
            pair: report.worst_pair,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaining::lambda::LambdaMode;

    #[test]
    fn identity_extremes() {
        let g = Subordinator::identity();
        let quad = QuadratureSpec::default();
        let lam = LambdaSpec::build_with_knots(&g, 1, LambdaMode::UnivariateSubordination, &quad, 128).unwrap();
        let pairs = vec![
            (vec![0.3], vec![0.3]),
            (vec![f64::NEG_INFINITY], vec![f64::INFINITY]),
            (vec![-1.0], vec![0.5]),
        ];
        let r = lambda_domination_check(&g, &lam, &pairs, &quad, DOMINATION_TOL).unwrap();
        assert_eq!(r.violations, 0);
        assert!((lam.joint(&[f64::INFINITY]).unwrap() - 1.797_884_6).abs() < 1e-7);
    }
}
