//! Scalar abstractions.
//!
//! Polynomial algebra only needs a commutative ring with an embedding of the
//! naturals, so it runs unchanged on machine integers, rationals and floats.
//! Everything that takes square roots, logarithms or powers needs [`Real`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Commutative ring with a map from the naturals. Implemented for every
/// `Num + Clone + FromPrimitive` type: `i64`, `i128`, `Ratio<i64>`, `f32`, `f64`, ...
pub trait Ring: Num + Clone + FromPrimitive + Debug {}

impl<T> Ring for T where T: Num + Clone + FromPrimitive + Debug {}

/// Floating point scalar used by the numerical kernels (`f32` or `f64`).
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless for `f64`, rounding for `f32`.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable in every Real")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize is representable in every Real")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `n!` as a float. Exact for `n <= 22` in `f64`.
pub fn factorial<T: Real>(n: usize) -> T {
    (2..=n).fold(T::one(), |acc, k| acc * T::of_usize(k))
}

/// `(n-1)!!`-style double factorial `n!! = n (n-2) (n-4) ...`, with `0!! = (-1)!! = 1`.
pub fn double_factorial(n: i64) -> i128 {
    let mut acc: i128 = 1;
    let mut k = n;
    while k > 1 {
        acc *= k as i128;
        k -= 2;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert_eq!(factorial::<f64>(0), 1.0);
        assert_eq!(factorial::<f64>(5), 120.0);
        assert_eq!(factorial::<f32>(4), 24.0);
        assert_eq!(double_factorial(-1), 1);
        assert_eq!(double_factorial(0), 1);
        assert_eq!(double_factorial(7), 105);
        assert_eq!(double_factorial(8), 384);
    }
}
