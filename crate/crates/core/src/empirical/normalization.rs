use crate::scalar::{factorial, Real};

/// `d_N` with `d_N^2 = Var(Σ_{j<=N} H_m(X_j)) = m! [N + 2 Σ_{k<N} (N - k) r(k)^m]`.
pub fn normalization<T: Real>(r: impl Fn(usize) -> T, m: usize, n: usize) -> T {
    assert!(m >= 1, "Hermite rank is at least 1");
    let nn = T::of_usize(n);
    let mut lagged = T::zero();
    for k in 1..n {
        lagged = lagged + T::of_usize(n - k) * r(k).powi(m as i32);
    }
    (factorial::<T>(m) * (nn + T::of(2.0) * lagged)).sqrt()
}

/// `d_n` for every `n` in `1..=n_max`, by the recursion
/// `d_{n+1}^2 = d_n^2 + m! [1 + 2 Σ_{k<=n} r(k)^m]`.
pub fn normalization_ladder<T: Real>(r: impl Fn(usize) -> T, m: usize, n_max: usize) -> Vec<T> {
    let fact = factorial::<T>(m);
    let mut out = Vec::with_capacity(n_max);
    let mut var = T::zero();
    let mut tail = T::zero();
    for n in 1..=n_max {
        if n > 1 {
            tail = tail + r(n - 1).powi(m as i32);
        }
        var = var + fact * (T::one() + T::of(2.0) * tail);
        out.push(var.sqrt());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrd::fgn_autocovariance;

    #[test]
    fn small_cases() {
        assert!((normalization(|_| 0.0f64, 1, 5).powi(2) - 5.0).abs() < 1e-12);
        let rho = 0.3f64;
        assert!((normalization(|_| rho, 1, 2).powi(2) - (2.0 + 2.0 * rho)).abs() < 1e-12);
        assert!((normalization(|_| rho, 2, 2).powi(2) - 2.0 * (2.0 + 2.0 * rho * rho)).abs() < 1e-12);
    }

    #[test]
    fn ladder_matches_direct() {
        let r = |k| fgn_autocovariance(0.8f64, k);
        let ladder = normalization_ladder(r, 2, 300);
        for n in [1, 2, 17, 300] {
            assert!((ladder[n - 1] - normalization(r, 2, n)).abs() < 1e-9 * ladder[n - 1]);
        }
        assert!(ladder.windows(2).all(|w| w[1] > w[0]));
        assert!(ladder.iter().enumerate().all(|(i, d)| d * d >= 2.0 * (i + 1) as f64 - 1e-9));
    }

    #[test]
    fn fgn_partial_sum_variance_is_a_power() {
        // Var(X_1 + ... + X_N) = N^{2H} for fractional Gaussian noise
        for n in [1usize, 2, 10, 1000] {
            let d = normalization(|k| fgn_autocovariance(0.7f64, k), 1, n);
            assert!((d * d - (n as f64).powf(1.4)).abs() < 1e-9 * d * d);
        }
    }

    #[test]
    fn single_precision() {
        let d = normalization(|k| fgn_autocovariance(0.75f32, k), 1, 64);
        let d64 = normalization(|k| fgn_autocovariance(0.75f64, k), 1, 64);
        assert!((d as f64 - d64).abs() < 1e-3 * d64);
    }
}
