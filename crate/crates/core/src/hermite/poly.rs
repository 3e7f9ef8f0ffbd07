//! Probabilists' Hermite polynomials.

use crate::error::{Error, Result};
use crate::scalar::{factorial, Real, Ring};

/// Largest supported order.
pub const MAX_ORDER: usize = 64;

/// Multi-index `(l_1, ..., l_p)`.
pub type MultiIndex = Vec<usize>;

/// `H_n(y)` by the three-term recurrence `H_{n+1} = y H_n - n H_{n-1}`.
///
/// Works over any [`Ring`], so `hermite::<i64>(n, 0)` is exact.
pub fn hermite<T: Ring>(n: usize, y: T) -> Result<T> {
    if n > MAX_ORDER {
        return Err(Error::OrderTooLarge(n));
    }
    let mut prev = T::one();
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = y.clone();
    for k in 1..n {
        let next = y.clone() * cur.clone() - T::from_usize(k).expect("k fits") * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `[H_0(y), ..., H_nmax(y)]`.
pub fn hermite_all<T: Ring>(nmax: usize, y: T) -> Result<Vec<T>> {
    if nmax > MAX_ORDER {
        return Err(Error::OrderTooLarge(nmax));
    }
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(T::one());
    if nmax >= 1 {
        out.push(y.clone());
    }
    for k in 1..nmax {
        let next =
            y.clone() * out[k].clone() - T::from_usize(k).expect("k fits") * out[k - 1].clone();
        out.push(next);
    }
    Ok(out)
}

/// `H_{l_1}(x_1) ... H_{l_p}(x_p)`.
pub fn hermite_multi<T: Ring>(l: &[usize], x: &[T]) -> Result<T> {
    if l.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: l.len(),
            got: x.len(),
        });
    }
    l.iter()
        .zip(x)
        .try_fold(T::one(), |acc, (&n, xi)| Ok(acc * hermite(n, xi.clone())?))
}

/// Monomial coefficients of `H_n`, lowest degree first.
pub fn hermite_coefficients(n: usize) -> Result<Vec<f64>> {
    if n > MAX_ORDER {
        return Err(Error::OrderTooLarge(n));
    }
    let mut prev = vec![1.0];
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = vec![0.0, 1.0];
    for k in 1..n {
        let mut next = vec![0.0; k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// All multi-indices of length `p` with `l_1 + ... + l_p = total`, in
/// descending lexicographic order (`(2,0), (1,1), (0,2)`).
pub fn multi_indices(p: usize, total: usize) -> Vec<MultiIndex> {
    fn rec(p: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == p {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=left).rev() {
            prefix.push(first);
            rec(p, left - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if p == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(p, total, &mut Vec::with_capacity(p), &mut out);
    out
}

/// `l_1! ... l_p!`.
pub fn multi_factorial<T: Real>(l: &[usize]) -> T {
    l.iter().fold(T::one(), |acc, &k| acc * factorial::<T>(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::double_factorial;
    use num_rational::Ratio;

    #[test]
    fn small_values() {
        assert_eq!(hermite(0, 3.7).unwrap(), 1.0);
        assert_eq!(hermite(3, 2.0).unwrap(), 2.0);
        assert_eq!(hermite(4, 0.0).unwrap(), 3.0);
        assert!(matches!(hermite(65, 0.0), Err(Error::OrderTooLarge(65))));
    }

    #[test]
    fn exact_rings() {
        assert_eq!(hermite::<i64>(6, 0).unwrap(), -15);
        let half = Ratio::new(1i64, 2);
        // H_3(1/2) = 1/8 - 3/2
        assert_eq!(hermite(3, half).unwrap(), Ratio::new(-11, 8));
        for m in (0..=14).step_by(2) {
            let sign = if (m / 2) % 2 == 0 { 1 } else { -1 };
            assert_eq!(
                hermite::<i128>(m, 0).unwrap(),
                sign * double_factorial(m as i64 - 1)
            );
        }
    }

    #[test]
    fn multi_products() {
        assert_eq!(hermite_multi(&[0, 0], &[1.3, -2.0]).unwrap(), 1.0);
        assert_eq!(hermite_multi(&[1, 2], &[1.0, 2.0]).unwrap(), 3.0);
        assert_eq!(hermite_multi(&[3, 0, 1], &[2.0, 9.0, -1.0]).unwrap(), -2.0);
        assert!(matches!(
            hermite_multi(&[1, 2], &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn coefficient_form_matches_recurrence() {
        for n in 0..12 {
            let c = hermite_coefficients(n).unwrap();
            for &y in &[-2.5, -0.3, 0.0, 1.1, 3.0] {
                let poly = c.iter().rev().fold(0.0, |acc, &ci| acc * y + ci);
                let rec = hermite(n, y).unwrap();
                assert!((poly - rec).abs() <= 1e-9 * rec.abs().max(1.0));
            }
        }
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(1, 3), vec![vec![3]]);
        // C(m + p - 1, m) indices
        assert_eq!(multi_indices(3, 4).len(), 15);
        assert_eq!(multi_indices(4, 6).len(), 84);
        assert!(multi_indices(3, 4).iter().all(|l| l.iter().sum::<usize>() == 4));
    }

    #[test]
    fn all_orders_at_once() {
        let v = hermite_all(6, 1.7f64).unwrap();
        for (n, h) in v.iter().enumerate() {
            assert!((h - hermite(n, 1.7).unwrap()).abs() < 1e-12);
        }
    }
}
