//! Whittle's multivariate Durbin–Levinson recursion.
//!
//! For a stationary `p`-variate series with lag matrices
//! `Γ(h) = E X_{t+h} X_tᵀ`, step `t` produces the forward coefficients
//! `Φ_{t,1..t}` and innovation covariance `V_t` of
//!
//! ```text
//! X_t = Σ_{j=1}^{t} Φ_{t,j} X_{t-j} + V_t^{1/2} z_t
//! ```
//!
//! With `V_t^{1/2}` the lower Cholesky factor this is row block `t` of the
//! lower Cholesky factor of the time-major block-Toeplitz covariance, so the
//! recursion samples exactly the same `L z` as a dense factorization while
//! holding only `O(N p²)` coefficients.

use super::matrix::{cholesky, default_pivot_tolerance, Cholesky, Matrix};
use super::CovarianceModel;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub struct Whittle<T> {
    p: usize,
    t: usize,
    gammas: Vec<Matrix<T>>,
    /// Forward coefficients `Φ_{t,j}`, `j = 1..=t`, flattened `p x p` blocks.
    phi: Vec<T>,
    /// Backward coefficients `Ψ_{t,j}`.
    psi: Vec<T>,
    v: Matrix<T>,
    v_back: Matrix<T>,
    v_chol: Cholesky<T>,
    v_back_chol: Cholesky<T>,
    smallest_pivot: T,
    tol: T,
}

impl<T: Real> Whittle<T> {
    /// Start the recursion at `t = 0` (`V_0 = Γ(0)`), precomputing lags up to `n - 1`.
    pub fn new(model: &CovarianceModel<T>, n: usize) -> Result<Self> {
        model.validate()?;
        let gammas: Vec<Matrix<T>> = (0..n.max(1)).map(|k| model.lag_matrix(k)).collect();
        let tol = default_pivot_tolerance();
        let v = gammas[0].clone();
        let v_chol = checked_cholesky(&v, tol, 0)?;
        let smallest_pivot = v_chol.smallest_pivot;
        Ok(Self {
            p: model.p,
            t: 0,
            phi: Vec::new(),
            psi: Vec::new(),
            v_back: v.clone(),
            v_back_chol: v_chol.clone(),
            v,
            v_chol,
            gammas,
            smallest_pivot,
            tol,
        })
    }

    pub fn time(&self) -> usize {
        self.t
    }

    /// `Φ_{t,j}` as a `p x p` row-major block, `1 <= j <= t`.
    pub fn coefficient(&self, j: usize) -> &[T] {
        let pp = self.p * self.p;
        &self.phi[(j - 1) * pp..j * pp]
    }

    /// All forward coefficients of the current step, block `j-1` = `Φ_{t,j}`.
    pub fn coefficients(&self) -> &[T] {
        &self.phi
    }

    /// Lower Cholesky factor of the current innovation covariance `V_t`.
    pub fn innovation_factor(&self) -> &Matrix<T> {
        &self.v_chol.lower
    }

    pub fn innovation_covariance(&self) -> &Matrix<T> {
        &self.v
    }

    pub fn smallest_pivot(&self) -> T {
        self.smallest_pivot
    }

    /// Advance from step `t` to `t + 1`.
    pub fn step(&mut self) -> Result<()> {
        let p = self.p;
        let pp = p * p;
        let t = self.t;
        let next = t + 1;
        if next >= self.gammas.len() {
            return Err(Error::SizeCapExceeded {
                requested: next + 1,
                cap: self.gammas.len(),
            });
        }
        // Δ = Γ(t+1) - Σ_{j=1}^{t} Φ_{t,j} Γ(t+1-j)
        let mut delta = self.gammas[next].clone();
        for j in 1..=t {
            let a = &self.phi[(j - 1) * pp..j * pp];
            let g = &self.gammas[next - j];
            sub_product(&mut delta, a, g.as_slice(), p);
        }
        let delta_t = delta.transpose();
        let phi_new = self.v_back_chol.right_divide(&delta);
        let psi_new = self.v_chol.right_divide(&delta_t);

        let mut phi = vec![T::zero(); next * pp];
        let mut psi = vec![T::zero(); next * pp];
        for k in 1..=t {
            let dst = (k - 1) * pp;
            phi[dst..dst + pp].copy_from_slice(&self.phi[dst..dst + pp]);
            psi[dst..dst + pp].copy_from_slice(&self.psi[dst..dst + pp]);
            let mirror = (t - k) * pp;
            sub_product_slices(
                &mut phi[dst..dst + pp],
                phi_new.as_slice(),
                &self.psi[mirror..mirror + pp],
                p,
            );
            sub_product_slices(
                &mut psi[dst..dst + pp],
                psi_new.as_slice(),
                &self.phi[mirror..mirror + pp],
                p,
            );
        }
        phi[t * pp..].copy_from_slice(phi_new.as_slice());
        psi[t * pp..].copy_from_slice(psi_new.as_slice());

        let mut v = self.v.sub(&phi_new.mul(&delta_t));
        let mut v_back = self.v_back.sub(&psi_new.mul(&delta));
        symmetrize(&mut v);
        symmetrize(&mut v_back);
        let v_chol = checked_cholesky(&v, self.tol, next * p)?;
        let v_back_chol = checked_cholesky(&v_back, self.tol, next * p)?;
        self.smallest_pivot = self.smallest_pivot.min(v_chol.smallest_pivot);

        self.phi = phi;
        self.psi = psi;
        self.v = v;
        self.v_back = v_back;
        self.v_chol = v_chol;
        self.v_back_chol = v_back_chol;
        self.t = next;
        Ok(())
    }

    /// Dense lower factor `L` of the `Np x Np` covariance implied by the
    /// recursion (test and diagnostics helper; `O(N³ p³)`).
    pub fn dense_factor(model: &CovarianceModel<T>, n: usize) -> Result<Matrix<T>> {
        let p = model.p;
        let size = n * p;
        let mut w = Whittle::new(model, n)?;
        // Columns of L are the paths driven by unit innovations.
        let mut l = Matrix::zeros(size, size);
        for t in 0..n {
            if t > 0 {
                w.step()?;
            }
            for col in 0..size {
                for a in 0..p {
                    let mut acc = T::zero();
                    for j in 1..=t {
                        let c = w.coefficient(j);
                        for b in 0..p {
                            acc = acc + c[a * p + b] * l[((t - j) * p + b, col)];
                        }
                    }
                    if col / p == t {
                        acc = acc + w.innovation_factor()[(a, col % p)];
                    }
                    l[(t * p + a, col)] = acc;
                }
            }
        }
        Ok(l)
    }
}

fn checked_cholesky<T: Real>(m: &Matrix<T>, tol: T, row_offset: usize) -> Result<Cholesky<T>> {
    cholesky(m, tol).map_err(|e| match e {
        Error::NotPositiveDefinite {
            smallest_pivot,
            row,
        } => Error::NotPositiveDefinite {
            smallest_pivot,
            row: row + row_offset,
        },
        other => other,
    })
}

fn symmetrize<T: Real>(m: &mut Matrix<T>) {
    let half = T::of(0.5);
    for i in 0..m.rows() {
        for j in 0..i {
            let s = half * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
}

/// `out -= a * b` for `p x p` blocks.
fn sub_product<T: Real>(out: &mut Matrix<T>, a: &[T], b: &[T], p: usize) {
    for i in 0..p {
        for k in 0..p {
            let aik = a[i * p + k];
            for j in 0..p {
                out[(i, j)] = out[(i, j)] - aik * b[k * p + j];
            }
        }
    }
}

fn sub_product_slices<T: Real>(out: &mut [T], a: &[T], b: &[T], p: usize) {
    for i in 0..p {
        for k in 0..p {
            let aik = a[i * p + k];
            for j in 0..p {
                out[i * p + j] = out[i * p + j] - aik * b[k * p + j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrd::{SlowlyVarying, COVARIANCE_CAP};

    fn check_against_dense(model: &CovarianceModel<f64>, n: usize) {
        let dense = model.build_covariance(n, COVARIANCE_CAP).unwrap();
        let l = Whittle::dense_factor(model, n).unwrap();
        // same factor as the dense Cholesky
        assert!(l.max_abs_diff(&dense.factor.lower) < 1e-10);
        // and it reproduces the covariance
        let back = l.mul(&l.transpose());
        assert!(back.max_abs_diff(&dense.matrix) < 1e-10);
    }

    #[test]
    fn univariate_fgn_matches_dense_cholesky() {
        check_against_dense(&CovarianceModel::fgn(0.4).unwrap(), 40);
        check_against_dense(&CovarianceModel::fgn(0.1).unwrap(), 25);
    }

    #[test]
    fn multivariate_matches_dense_cholesky() {
        let m = CovarianceModel::fgn_multivariate(
            0.4,
            vec![vec![1.0, 0.4, -0.2], vec![0.4, 1.0, 0.1], vec![-0.2, 0.1, 1.0]],
        )
        .unwrap();
        check_against_dense(&m, 20);
        let pp = CovarianceModel::pure_power(
            0.6,
            SlowlyVarying::Constant { c: 0.4 },
            vec![vec![1.0, 0.5], vec![0.5, 0.8]],
        )
        .unwrap();
        check_against_dense(&pp, 30);
    }

    #[test]
    fn singular_law_is_reported_with_its_row() {
        let m = CovarianceModel::pure_power(0.4, SlowlyVarying::default(), vec![vec![1.0]]).unwrap();
        let mut w = Whittle::new(&m, 5).unwrap();
        assert!(matches!(w.step(), Err(Error::NotPositiveDefinite { row: 1, .. })));
    }
}
