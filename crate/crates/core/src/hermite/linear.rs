//! Expansion of `H_m(a · x)` for a unit vector `a` into products of
//! univariate Hermite polynomials:
//!
//! ```text
//! H_m(Σ_j a_j x_j) = Σ_{m_1+...+m_p=m} m!/(m_1!...m_p!) Π_j a_j^{m_j} H_{m_j}(x_j)
//! ```

use serde::Serialize;

use super::poly::{hermite, multi_indices, MultiIndex, MAX_ORDER};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermiteExpansion<T> {
    pub order: usize,
    pub terms: Vec<(MultiIndex, T)>,
}

impl<T: Real> HermiteExpansion<T> {
    pub fn coefficient(&self, l: &[usize]) -> Option<T> {
        self.terms.iter().find(|(k, _)| k == l).map(|(_, c)| *c)
    }

    /// Evaluate `Σ c_l H_{l_1}(x_1)...H_{l_p}(x_p)`.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        let p = self.terms.first().map_or(0, |(l, _)| l.len());
        if x.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: x.len(),
            });
        }
        // H_0..H_m per coordinate, then sum the products
        let tables: Vec<Vec<T>> = x
            .iter()
            .map(|&xi| super::poly::hermite_all(self.order, xi))
            .collect::<Result<_>>()?;
        Ok(self.terms.iter().fold(T::zero(), |acc, (l, c)| {
            let prod = l
                .iter()
                .enumerate()
                .fold(T::one(), |pr, (j, &lj)| pr * tables[j][lj]);
            acc + *c * prod
        }))
    }
}

/// Unit-norm tolerance on `|a|² - 1`.
pub const UNIT_NORM_TOL: f64 = 1e-12;

pub fn expand_hermite_linear<T: Real>(m: usize, a: &[T]) -> Result<HermiteExpansion<T>> {
    if m > MAX_ORDER {
        return Err(Error::OrderTooLarge(m));
    }
    let norm2 = a.iter().fold(T::zero(), |s, &v| s + v * v);
    let tol = T::of(UNIT_NORM_TOL).max(T::epsilon() * T::of(16.0));
    if a.is_empty() || !((norm2 - T::one()).abs() <= tol) {
        return Err(Error::NotUnitNorm(norm2.to_f64_lossy()));
    }
    let terms = multi_indices(a.len(), m)
        .into_iter()
        .map(|l| {
            let c = multinomial::<T>(&l)
                * l
                    .iter()
                    .zip(a)
                    .fold(T::one(), |acc, (&k, &aj)| acc * aj.powi(k as i32));
            (l, c)
        })
        .collect();
    Ok(HermiteExpansion { order: m, terms })
}

/// `(l_1 + ... + l_p)! / (l_1! ... l_p!)` as a product of binomials.
fn multinomial<T: Real>(l: &[usize]) -> T {
    let mut total = 0usize;
    let mut acc = T::one();
    for &k in l {
        for i in 1..=k {
            total += 1;
            acc = acc * T::of_usize(total) / T::of_usize(i);
        }
    }
    acc
}

/// Direct evaluation `H_m(a · x)`, the reference side of the identity.
pub fn hermite_of_projection<T: Real>(m: usize, a: &[T], x: &[T]) -> Result<T> {
    if a.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: x.len(),
        });
    }
    let s = a.iter().zip(x).fold(T::zero(), |acc, (&u, &v)| acc + u * v);
    hermite(m, s)
}
