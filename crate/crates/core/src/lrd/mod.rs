//! Long-range dependent Gaussian processes: covariance laws and exact samplers.

mod levinson;
pub mod matrix;
mod sampler;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use levinson::Whittle;
pub use matrix::{cholesky, default_pivot_tolerance, Cholesky, Matrix};
pub use sampler::{sample_path, sample_paths, GaussianPath, SAMPLER_CAP};

/// Default cap on `N * p` for dense covariance assembly.
pub const COVARIANCE_CAP: usize = 8192;

/// Slowly varying factor `L(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SlowlyVarying<T> {
    /// `L(k) = c`.
    Constant { c: T },
    /// `L(k) = (1 + ln k)^a`.
    LogPower { a: T },
}

impl<T: Real> SlowlyVarying<T> {
    pub fn eval(&self, k: usize) -> T {
        match *self {
            SlowlyVarying::Constant { c } => c,
            SlowlyVarying::LogPower { a } => (T::one() + T::of_usize(k).ln()).powf(a),
        }
    }
}

impl<T: Real> Default for SlowlyVarying<T> {
    fn default() -> Self {
        SlowlyVarying::Constant { c: T::one() }
    }
}

/// Law of the base autocovariance at lags `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagLaw {
    /// Fractional Gaussian noise with Hurst index `H = 1 - D/2`.
    Fgn,
    /// `L(k) k^{-D}` taken literally.
    PurePower,
    /// No serial dependence. `D` is only carried for admissibility gates.
    Iid,
}

/// Covariance structure of a stationary `p`-variate Gaussian process with
/// unit-variance, mutually uncorrelated coordinates at lag 0 and
/// cross-covariances `c_ij * (lag law)` at lags `k >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub struct CovarianceModel<T> {
    pub p: usize,
    #[serde(rename = "D")]
    pub d: T,
    #[serde(default)]
    pub slowly_varying: SlowlyVarying<T>,
    pub kind: LagLaw,
    pub cross: Vec<Vec<T>>,
}

impl<T: Real> CovarianceModel<T> {
    pub fn new(
        d: T,
        slowly_varying: SlowlyVarying<T>,
        kind: LagLaw,
        cross: Vec<Vec<T>>,
    ) -> Result<Self> {
        let model = Self {
            p: cross.len(),
            d,
            slowly_varying,
            kind,
            cross,
        };
        model.validate()?;
        Ok(model)
    }

    /// Univariate fractional Gaussian noise with `H = 1 - D/2`.
    pub fn fgn(d: T) -> Result<Self> {
        Self::new(d, SlowlyVarying::default(), LagLaw::Fgn, vec![vec![T::one()]])
    }

    /// `p`-variate fGn-type law: `r^{(i,j)}(k) = c_ij γ_H(k)` for `k >= 1`.
    pub fn fgn_multivariate(d: T, cross: Vec<Vec<T>>) -> Result<Self> {
        Self::new(d, SlowlyVarying::default(), LagLaw::Fgn, cross)
    }

    pub fn pure_power(d: T, slowly_varying: SlowlyVarying<T>, cross: Vec<Vec<T>>) -> Result<Self> {
        Self::new(d, slowly_varying, LagLaw::PurePower, cross)
    }

    /// White noise in `p` coordinates; `d` is kept for admissibility checks.
    pub fn iid(p: usize, d: T) -> Result<Self> {
        let cross = (0..p)
            .map(|i| (0..p).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        Self::new(d, SlowlyVarying::default(), LagLaw::Iid, cross)
    }

    pub fn hurst(&self) -> T {
        T::one() - self.d / T::of(2.0)
    }

    /// Check the structural invariants. Positive definiteness is decided
    /// separately by the Cholesky pivot check.
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidModel(m));
        if self.p == 0 {
            return invalid("p must be positive".into());
        }
        if !(self.d > T::zero() && self.d < T::one()) {
            return invalid(format!("D = {} must lie in (0, 1)", self.d));
        }
        if self.cross.len() != self.p || self.cross.iter().any(|row| row.len() != self.p) {
            return invalid(format!("cross must be a {0}x{0} matrix", self.p));
        }
        for i in 0..self.p {
            if !(self.cross[i][i] > T::zero()) {
                return invalid(format!("cross[{i}][{i}] must be positive"));
            }
            for j in 0..self.p {
                let (a, b) = (self.cross[i][j], self.cross[j][i]);
                if !a.is_finite() {
                    return invalid(format!("cross[{i}][{j}] is not finite"));
                }
                if (a - b).abs() > T::epsilon() * (a.abs() + b.abs()) {
                    return invalid(format!("cross is not symmetric at ({i}, {j})"));
                }
            }
        }
        match (self.kind, self.slowly_varying) {
            (LagLaw::Fgn | LagLaw::Iid, SlowlyVarying::Constant { c }) if c == T::one() => Ok(()),
            (LagLaw::Fgn | LagLaw::Iid, _) => {
                invalid("fgn and iid laws fix L; slowly_varying must be constant 1".into())
            }
            (LagLaw::PurePower, SlowlyVarying::Constant { c }) if !(c > T::zero()) => {
                invalid("constant L must be positive".into())
            }
            (LagLaw::PurePower, SlowlyVarying::LogPower { a }) if !(a >= T::zero()) => {
                invalid("log power exponent must be nonnegative".into())
            }
            _ => Ok(()),
        }
    }

    /// `r^{(i,j)}(k) = E X^{(i)}_1 X^{(j)}_{k+1}` with zero-based coordinates.
    pub fn autocovariance(&self, i: usize, j: usize, k: usize) -> Result<T> {
        for idx in [i, j] {
            if idx >= self.p {
                return Err(Error::IndexOutOfRange {
                    what: "component",
                    index: idx,
                    max: self.p - 1,
                });
            }
        }
        Ok(self.r(i, j, k))
    }

    /// Unchecked [`autocovariance`](Self::autocovariance).
    #[inline]
    pub(crate) fn r(&self, i: usize, j: usize, k: usize) -> T {
        if k == 0 {
            return if i == j { T::one() } else { T::zero() };
        }
        let c = self.cross[i][j];
        match self.kind {
            LagLaw::Iid => T::zero(),
            LagLaw::PurePower => {
                c * self.slowly_varying.eval(k) * T::of_usize(k).powf(-self.d)
            }
            LagLaw::Fgn => c * fgn_autocovariance(self.hurst(), k),
        }
    }

    /// Lag-`k` cross-covariance matrix `Γ(k)_{ab} = E X^{(a)}_{t+k} X^{(b)}_t`.
    pub fn lag_matrix(&self, k: usize) -> Matrix<T> {
        let mut m = Matrix::zeros(self.p, self.p);
        for a in 0..self.p {
            for b in 0..self.p {
                m[(a, b)] = self.r(b, a, k);
            }
        }
        m
    }

    /// `ψ(k)`: the larger of the maximal absolute row sum and the maximal
    /// absolute column sum of `[r^{(i,j)}(k)]`.
    pub fn psi(&self, k: usize) -> T {
        let p = self.p;
        let mut best = T::zero();
        for i in 0..p {
            let row = (0..p).fold(T::zero(), |s, j| s + self.r(i, j, k).abs());
            let col = (0..p).fold(T::zero(), |s, j| s + self.r(j, i, k).abs());
            best = best.max(row).max(col);
        }
        best
    }

    /// Smallest block size `b <= cap` with `ψ(b k) <= 1` for `k = 1..=horizon`.
    pub fn psi_block_size(&self, cap: usize, horizon: usize) -> Option<usize> {
        (1..=cap).find(|&b| (1..=horizon).all(|k| self.psi(b * k) <= T::one()))
    }

    /// Dense `Np x Np` block-Toeplitz covariance of `(X_1, ..., X_N)` in
    /// time-major order, factorized to certify positive definiteness.
    pub fn build_covariance(&self, n: usize, cap: usize) -> Result<CovarianceMatrix<T>> {
        self.validate()?;
        let p = self.p;
        let size = n * p;
        if n == 0 {
            return Err(Error::InvalidModel("N must be at least 1".into()));
        }
        if size > cap {
            return Err(Error::SizeCapExceeded {
                requested: size,
                cap,
            });
        }
        let lags: Vec<Matrix<T>> = (0..n).map(|k| self.lag_matrix(k)).collect();
        let mut m = Matrix::zeros(size, size);
        for s in 0..n {
            for t in 0..n {
                for a in 0..p {
                    for b in 0..p {
                        // Cov(X_s^a, X_t^b)
                        m[(s * p + a, t * p + b)] = if s >= t {
                            lags[s - t][(a, b)]
                        } else {
                            lags[t - s][(b, a)]
                        };
                    }
                }
            }
        }
        let factor = cholesky(&m, default_pivot_tolerance())?;
        Ok(CovarianceMatrix {
            p,
            n,
            matrix: m,
            factor,
        })
    }
}

/// `γ_H(k) = ((k+1)^{2H} - 2k^{2H} + (k-1)^{2H}) / 2`, evaluated without the
/// catastrophic cancellation of the naive form for large `k`.
pub fn fgn_autocovariance<T: Real>(hurst: T, k: usize) -> T {
    let two_h = hurst + hurst;
    let half = T::of(0.5);
    match k {
        0 => T::one(),
        1 => half * (T::of(2.0).powf(two_h) - T::of(2.0)),
        _ => {
            let kf = T::of_usize(k);
            let x = kf.recip();
            let up = (two_h * x.ln_1p()).exp_m1();
            let down = (two_h * (-x).ln_1p()).exp_m1();
            half * kf.powf(two_h) * (up + down)
        }
    }
}

/// Output of [`CovarianceModel::build_covariance`].
#[derive(Debug, Clone)]
pub struct CovarianceMatrix<T> {
    pub p: usize,
    pub n: usize,
    pub matrix: Matrix<T>,
    pub factor: Cholesky<T>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_variance_at_lag_zero() {
        let m = CovarianceModel::pure_power(0.4, SlowlyVarying::default(), vec![vec![1.0]]).unwrap();
        assert_eq!(m.autocovariance(0, 0, 0).unwrap(), 1.0);
    }

    #[test]
    fn fgn_lag_one() {
        let m = CovarianceModel::fgn(0.5).unwrap();
        let r1 = m.autocovariance(0, 0, 1).unwrap();
        assert!((r1 - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn pure_power_cross_term() {
        let m = CovarianceModel::<f64>::pure_power(
            0.5,
            SlowlyVarying::default(),
            vec![vec![1.0, 0.3], vec![0.3, 1.0]],
        )
        .unwrap();
        assert!((m.autocovariance(0, 1, 4).unwrap() - 0.15).abs() < 1e-15);
        assert_eq!(m.autocovariance(0, 1, 0).unwrap(), 0.0);
        assert_eq!(m.autocovariance(1, 0, 4).unwrap(), m.autocovariance(0, 1, 4).unwrap());
        assert!(matches!(
            m.autocovariance(2, 0, 1),
            Err(Error::IndexOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn fgn_stable_form_matches_naive() {
        for &h in &[0.55, 0.75, 0.95] {
            for k in 1..200usize {
                let kf = k as f64;
                let naive = 0.5
                    * ((kf + 1.0).powf(2.0 * h) - 2.0 * kf.powf(2.0 * h) + (kf - 1.0).powf(2.0 * h));
                let stable = fgn_autocovariance(h, k);
                assert!((naive - stable).abs() < 1e-11, "h={h} k={k}");
            }
        }
        // asymptotic law H(2H-1) k^{-D}
        let h = 0.8;
        let k = 100_000usize;
        let ratio = fgn_autocovariance(h, k) / (h * (2.0 * h - 1.0) * (k as f64).powf(2.0 * h - 2.0));
        assert!((ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn log_power_slowly_varying() {
        let l = SlowlyVarying::LogPower { a: 2.0 };
        assert_eq!(l.eval(1), 1.0);
        assert!((l.eval(10) - (1.0 + 10f64.ln()).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn validation_errors() {
        assert!(CovarianceModel::fgn(1.5).is_err());
        assert!(CovarianceModel::fgn(0.0).is_err());
        assert!(CovarianceModel::fgn_multivariate(0.4, vec![vec![1.0, 0.2], vec![0.3, 1.0]]).is_err());
        assert!(CovarianceModel::new(
            0.4,
            SlowlyVarying::LogPower { a: 1.0 },
            LagLaw::Fgn,
            vec![vec![1.0]]
        )
        .is_err());
    }

    #[test]
    fn psi_examples() {
        let m = CovarianceModel::<f64>::pure_power(0.5, SlowlyVarying::default(), vec![vec![1.0]]).unwrap();
        assert!((m.psi(4) - 0.5).abs() < 1e-15);
        let m2 = CovarianceModel::<f64>::pure_power(
            0.5,
            SlowlyVarying::default(),
            vec![vec![1.0, 0.5], vec![0.5, 1.0]],
        )
        .unwrap();
        assert!((m2.psi(1) - 1.5).abs() < 1e-15);
        // r(k) at scale 1 for k=1, so the block size is the first b with 1.5 b^{-1/2} <= 1
        assert_eq!(m2.psi_block_size(100, 64), Some(3));
        let f = CovarianceModel::fgn_multivariate(0.4, vec![vec![1.0, 0.4], vec![0.4, 1.0]]).unwrap();
        let ladder: Vec<f64> = (0..12).map(|e| f.psi(1 << e)).collect();
        assert!(ladder.windows(2).all(|w| w[1] < w[0]));
        assert!(*ladder.last().unwrap() < 0.05);
    }

    #[test]
    fn covariance_examples() {
        let iid = CovarianceModel::iid(1, 0.4).unwrap();
        let c = iid.build_covariance(3, COVARIANCE_CAP).unwrap();
        assert_eq!(c.matrix, Matrix::identity(3));

        let f = CovarianceModel::fgn(0.5).unwrap();
        let c = f.build_covariance(2, COVARIANCE_CAP).unwrap();
        let r1 = 2f64.sqrt() - 1.0;
        assert!((c.matrix[(0, 1)] - r1).abs() < 1e-15 && (c.matrix[(1, 0)] - r1).abs() < 1e-15);
        assert_eq!(c.matrix[(0, 0)], 1.0);

        assert!(matches!(
            f.build_covariance(9000, COVARIANCE_CAP),
            Err(Error::SizeCapExceeded { .. })
        ));
    }

    #[test]
    fn pure_power_with_unit_constant_is_singular() {
        // r(0) = r(1) = 1 forces X_2 = X_1.
        let m = CovarianceModel::pure_power(0.4, SlowlyVarying::default(), vec![vec![1.0]]).unwrap();
        assert!(matches!(
            m.build_covariance(4, COVARIANCE_CAP),
            Err(Error::NotPositiveDefinite { row: 1, .. })
        ));
    }

    #[test]
    fn strongly_coupled_pure_power_is_decided_by_pivots() {
        let m = CovarianceModel::pure_power(
            0.1,
            SlowlyVarying::Constant { c: 0.5 },
            vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        )
        .unwrap();
        match m.build_covariance(512, COVARIANCE_CAP) {
            Ok(c) => assert!(c.factor.smallest_pivot > 0.0),
            Err(Error::NotPositiveDefinite { smallest_pivot, .. }) => {
                assert!(smallest_pivot <= 8.0 * f64::EPSILON.sqrt())
            }
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn generic_over_f32() {
        let m = CovarianceModel::<f32>::fgn(0.5).unwrap();
        assert!((m.autocovariance(0, 0, 1).unwrap() - 0.414_213_56).abs() < 1e-6);
    }
}
