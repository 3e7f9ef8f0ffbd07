use rayon::prelude::*;
use serde::Serialize;

use super::levinson::Whittle;
use super::CovarianceModel;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::scalar::Real;

/// Cap on `N * p` for the sampler.
pub const SAMPLER_CAP: usize = 1 << 20;

/// One exact realization of `(X_1, ..., X_N)`, row `j` holding `X_{j+1}`.
#[derive(Debug, Clone, Serialize)]
pub struct GaussianPath<T> {
    pub model: CovarianceModel<T>,
    pub n: usize,
    pub seed: u64,
    values: Vec<T>,
}

impl<T: Real> GaussianPath<T> {
    pub fn p(&self) -> usize {
        self.model.p
    }

    /// Row-major `N x p` values.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, j: usize) -> &[T] {
        let p = self.model.p;
        &self.values[j * p..(j + 1) * p]
    }

    pub fn component(&self, i: usize) -> impl Iterator<Item = T> + '_ {
        let p = self.model.p;
        self.values.iter().skip(i).step_by(p).copied()
    }

    /// CSV with header `j,x1,...,xp`, `j` starting at 1.
    pub fn to_csv(&self) -> String {
        let p = self.p();
        let mut out = String::from("j");
        for i in 1..=p {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for j in 0..self.n {
            out.push_str(&(j + 1).to_string());
            for v in self.row(j) {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Sample one path. Equivalent to `sample_paths(model, n, &[seed])`.
pub fn sample_path<T: Real>(model: &CovarianceModel<T>, n: usize, seed: u64) -> Result<GaussianPath<T>> {
    Ok(sample_paths(model, n, &[seed])?.remove(0))
}

struct PathState<T> {
    rng: SplitMix64,
    values: Vec<T>,
    z: Vec<f64>,
}

/// Sample one path per seed, sharing a single pass of the Whittle recursion.
///
/// Each path consumes its own normal stream in time-major order
/// (`z_1^{(1)}, ..., z_1^{(p)}, z_2^{(1)}, ...`), so a path depends only on
/// `(model, seed)` and the path of length `n` is a prefix of the path of
/// any greater length with the same seed.
pub fn sample_paths<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
    seeds: &[u64],
) -> Result<Vec<GaussianPath<T>>> {
    model.validate()?;
    let p = model.p;
    if n == 0 {
        return Err(Error::InvalidModel("N must be at least 1".into()));
    }
    if n * p > SAMPLER_CAP {
        return Err(Error::SizeCapExceeded {
            requested: n * p,
            cap: SAMPLER_CAP,
        });
    }
    let mut whittle = Whittle::new(model, n)?;
    let mut states: Vec<PathState<T>> = seeds
        .iter()
        .map(|&s| PathState {
            rng: SplitMix64::new(s),
            values: Vec::with_capacity(n * p),
            z: vec![0.0; p],
        })
        .collect();
    for t in 0..n {
        if t > 0 {
            whittle.step()?;
        }
        let w = &whittle;
        states.par_iter_mut().for_each(|st| advance(st, w, p));
    }
    Ok(states
        .into_iter()
        .zip(seeds)
        .map(|(st, &seed)| GaussianPath {
            model: model.clone(),
            n,
            seed,
            values: st.values,
        })
        .collect())
}

fn advance<T: Real>(st: &mut PathState<T>, w: &Whittle<T>, p: usize) {
    let t = w.time();
    let pp = p * p;
    st.rng.fill_normal(&mut st.z);
    let mut next = vec![T::zero(); p];
    let coeffs = w.coefficients();
    if p == 1 {
        // X_t = Σ_j φ_j X_{t-j}; coefficient j pairs with value t-j
        let vals = &st.values;
        let mut acc = T::zero();
        for (c, x) in coeffs.iter().zip(vals.iter().rev()) {
            acc = acc + *c * *x;
        }
        next[0] = acc;
    } else {
        for j in 1..=t {
            let c = &coeffs[(j - 1) * pp..j * pp];
            let x = &st.values[(t - j) * p..(t - j + 1) * p];
            for a in 0..p {
                let mut acc = next[a];
                for b in 0..p {
                    acc = acc + c[a * p + b] * x[b];
                }
                next[a] = acc;
            }
        }
    }
    let lf = w.innovation_factor();
    for a in 0..p {
        let mut acc = next[a];
        for b in 0..=a {
            acc = acc + lf[(a, b)] * T::of(st.z[b]);
        }
        st.values.push(acc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrd::Whittle;

    #[test]
    fn deterministic_and_prefix_consistent() {
        let m = CovarianceModel::fgn(0.4).unwrap();
        let a = sample_path(&m, 64, 9).unwrap();
        let b = sample_path(&m, 64, 9).unwrap();
        assert_eq!(a.values(), b.values());
        let long = sample_path(&m, 100, 9).unwrap();
        assert_eq!(&long.values()[..64], a.values());
        let batch = sample_paths(&m, 64, &[3, 9]).unwrap();
        assert_eq!(batch[1].values(), a.values());
    }

    #[test]
    fn sample_equals_dense_factor_times_normals() {
        let m = CovarianceModel::fgn_multivariate(0.4, vec![vec![1.0, 0.4], vec![0.4, 1.0]]).unwrap();
        let n = 12;
        let path = sample_path(&m, n, 77).unwrap();
        let l = Whittle::dense_factor(&m, n).unwrap();
        let mut g = SplitMix64::new(77);
        let mut z = vec![0.0; n * 2];
        g.fill_normal(&mut z);
        let lz = l.mul_vec(&z);
        for (x, y) in path.values().iter().zip(&lz) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn inadmissible_cross_scale_is_rejected_by_both_routes() {
        // C = [[1, .4], [.4, 1]] has eigenvalue 1.4; with H = 0.85 the fGn
        // Toeplitz spectrum dips below 1 - 1/1.4, so the block matrix is indefinite.
        let m = CovarianceModel::fgn_multivariate(0.3, vec![vec![1.0, 0.4], vec![0.4, 1.0]]).unwrap();
        assert!(matches!(
            m.build_covariance(12, crate::lrd::COVARIANCE_CAP),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            sample_path(&m, 12, 1),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn iid_lag_one_autocovariance_is_small() {
        let m = CovarianceModel::iid(1, 0.5).unwrap();
        let n = 10_000;
        let path = sample_path(&m, n, 5).unwrap();
        let x: Vec<f64> = path.component(0).collect();
        let r1 = x.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1) as f64;
        assert!(r1.abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn csv_header() {
        let m = CovarianceModel::fgn(0.5).unwrap();
        let csv = sample_path(&m, 3, 1).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "j,x1");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("3,"));
    }
}
