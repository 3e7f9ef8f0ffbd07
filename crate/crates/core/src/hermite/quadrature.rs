//! Gaussian-weighted integrals over sublevel regions `{G(s) <= x}`.
//!
//! One input dimension uses adaptive Gauss-Kronrod (7/15) panels whose
//! endpoints include every discontinuity of the indicator, so no panel
//! straddles a jump. Two and three dimensions nest the same rule, resolving
//! linear components at the innermost level. Higher dimensions use randomized
//! Halton points.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::intervals::IntervalSet;
use super::poly::{hermite_coefficients, MAX_ORDER};
use super::subordinator::{linear_level_set, real_roots, Component, Subordinator};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Absolute error target for the adaptive rule.
    pub abs_tol: f64,
    /// Panel budget per one-dimensional integral.
    pub max_panels: usize,
    /// Largest input dimension handled by nested quadrature.
    pub nested_max_p: usize,
    pub qmc_points: usize,
    pub qmc_shifts: usize,
    pub qmc_seed: u64,
    /// Largest acceptable standard error of a QMC estimate.
    pub qmc_max_se: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_panels: 4000,
            nested_max_p: 3,
            qmc_points: 200_000,
            qmc_shifts: 10,
            qmc_seed: 0x5EED_0F_4A17,
            qmc_max_se: 5e-3,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let cfg = |field: &str, message: &str| {
            Err(Error::Config {
                field: format!("quadrature.{field}"),
                message: message.into(),
            })
        };
        if !(self.abs_tol > 0.0) {
            return cfg("abs_tol", "must be positive");
        }
        if self.max_panels < 8 {
            return cfg("max_panels", "must be at least 8");
        }
        if self.qmc_shifts < 2 || self.qmc_points < self.qmc_shifts {
            return cfg("qmc_shifts", "need at least two shifts and one point per shift");
        }
        Ok(())
    }
}

/// Value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// One Kronrod panel. `f` returns a value and an absolute error carried in
/// from nested integrals.
fn gk15<F: FnMut(f64) -> (f64, f64)>(f: &mut F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (fc, ec) = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut carried = WGK[7] * ec;
    for i in 0..7 {
        let dx = h * XGK[i];
        let (f1, e1) = f(c - dx);
        let (f2, e2) = f(c + dx);
        kron += WGK[i] * (f1 + f2);
        carried += WGK[i] * (e1 + e2);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    Panel {
        a,
        b,
        value: kron * h,
        error: ((kron - gauss) * h).abs() + carried * h.abs(),
    }
}

/// Adaptive integration over the given initial panels, bisecting the worst
/// panel until the summed error is below `tol` or the budget is spent.
pub(crate) fn adaptive<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    initial: &[(f64, f64)],
    tol: f64,
    max_panels: usize,
) -> Estimate {
    let mut panels: Vec<Panel> = initial.iter().map(|&(a, b)| gk15(&mut f, a, b)).collect();
    let sum_err = |ps: &[Panel]| ps.iter().map(|p| p.error).sum::<f64>();
    while panels.len() < max_panels && sum_err(&panels) > tol {
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            break;
        }
        panels[worst] = gk15(&mut f, p.a, mid);
        panels.push(gk15(&mut f, mid, p.b));
    }
    Estimate {
        value: panels.iter().map(|p| p.value).sum(),
        error: sum_err(&panels),
    }
}

/// Integrand weight in one input coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// `H_l(s)`
    Hermite(usize),
    /// `|H_l(s)|`
    AbsHermite(usize),
}

impl Weight {
    fn order(self) -> usize {
        match self {
            Weight::Hermite(l) | Weight::AbsHermite(l) => l,
        }
    }

    pub fn eval(self, s: f64) -> f64 {
        let l = self.order();
        let (mut prev, mut cur) = (1.0, s);
        if l == 0 {
            return 1.0;
        }
        for k in 1..l {
            let next = s * cur - k as f64 * prev;
            prev = cur;
            cur = next;
        }
        match self {
            Weight::Hermite(_) => cur,
            Weight::AbsHermite(_) => cur.abs(),
        }
    }
}

pub fn std_normal_pdf(s: f64) -> f64 {
    (-0.5 * s * s).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn std_normal_cdf(s: f64) -> f64 {
    Normal::standard().cdf(s)
}

fn truncation(order: usize) -> f64 {
    10.0 + 2.0 * (order as f64).sqrt()
}

/// `∫_{G(s) <= x} Π_k w_k(s_k) φ_p(s) ds`. Coordinates of `x` equal to `+∞`
/// impose no constraint; any `-∞` makes the region empty.
pub fn integrate_region(
    g: &Subordinator,
    x: &[f64],
    weights: &[Weight],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if x.len() != g.q() {
        return Err(Error::DimensionMismatch { expected: g.q(), got: x.len() });
    }
    if weights.len() != g.p {
        return Err(Error::DimensionMismatch { expected: g.p, got: weights.len() });
    }
    if let Some(&l) = weights.iter().map(|w| w.order()).find(|&l| l > MAX_ORDER).as_ref() {
        return Err(Error::OrderTooLarge(l));
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidGrid("NaN evaluation point".into()));
    }
    if x.iter().any(|&v| v == f64::NEG_INFINITY) {
        return Ok(Estimate::default());
    }
    let active: Vec<(&Component, f64)> = g
        .components
        .iter()
        .zip(x)
        .filter(|(_, &v)| v < f64::INFINITY)
        .map(|(c, &v)| (c, v))
        .collect();
    if g.p <= spec.nested_max_p {
        let region = Nested::new(g.p, &active, weights, spec)?;
        let mut prefix = Vec::with_capacity(g.p);
        let est = region.level(0, &mut prefix, spec.abs_tol);
        if !(est.error <= spec.abs_tol) {
            return Err(Error::QuadratureNotConverged {
                estimate: est.error,
                tolerance: spec.abs_tol,
            });
        }
        Ok(est)
    } else {
        qmc(g.p, &active, weights, spec)
    }
}

struct Nested<'a> {
    p: usize,
    /// Per coordinate: sublevel set of all single-coordinate constraints.
    domains: Vec<IntervalSet>,
    /// Per coordinate: extra interior breakpoints (roots of |H_l|).
    kinks: Vec<Vec<f64>>,
    linear: Vec<(&'a [f64], f64)>,
    weights: &'a [Weight],
    max_panels: usize,
}

impl<'a> Nested<'a> {
    fn new(
        p: usize,
        active: &[(&'a Component, f64)],
        weights: &'a [Weight],
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        let mut domains: Vec<IntervalSet> = weights
            .iter()
            .map(|w| IntervalSet::full().truncate(truncation(w.order())))
            .collect();
        let mut linear = Vec::new();
        for &(c, v) in active {
            match c {
                Component::Linear { weights } => linear.push((weights.as_slice(), v)),
                other => {
                    let k = other.coordinate().expect("single-coordinate component");
                    domains[k] = domains[k].intersect(&other.level_set(v));
                }
            }
        }
        let kinks = weights
            .iter()
            .map(|w| match *w {
                Weight::AbsHermite(l) if l >= 1 => Ok(real_roots(&hermite_coefficients(l)?)),
                _ => Ok(Vec::new()),
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            p,
            domains,
            kinks,
            linear,
            weights,
            max_panels: spec.max_panels,
        })
    }

    fn panels(&self, set: &IntervalSet, k: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &(a, b) in set.pieces() {
            let mut cuts = vec![a];
            cuts.extend(self.kinks[k].iter().copied().filter(|&r| r > a && r < b));
            cuts.push(b);
            for w in cuts.windows(2) {
                let n = ((w[1] - w[0]).ceil() as usize).max(1);
                let h = (w[1] - w[0]) / n as f64;
                for i in 0..n {
                    let lo = w[0] + h * i as f64;
                    let hi = if i + 1 == n { w[1] } else { lo + h };
                    out.push((lo, hi));
                }
            }
        }
        out
    }

    fn level(&self, k: usize, prefix: &mut Vec<f64>, tol: f64) -> Estimate {
        let mut set = self.domains[k].clone();
        if k + 1 == self.p {
            for &(a, v) in &self.linear {
                let rest: f64 = a[..k].iter().zip(prefix.iter()).map(|(u, s)| u * s).sum();
                set = set.intersect(&linear_level_set(a[k], rest, v));
                if set.is_empty() {
                    break;
                }
            }
        }
        if set.is_empty() {
            return Estimate::default();
        }
        let panels = self.panels(&set, k);
        let w = self.weights[k];
        let inner_tol = tol / 16.0;
        adaptive(
            |s| {
                let dens = w.eval(s) * std_normal_pdf(s);
                if k + 1 == self.p {
                    (dens, 0.0)
                } else {
                    prefix.push(s);
                    let inner = self.level(k + 1, prefix, inner_tol);
                    prefix.pop();
                    (dens * inner.value, dens.abs() * inner.error)
                }
            },
            &panels,
            tol,
            self.max_panels,
        )
    }
}

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn qmc(
    p: usize,
    active: &[(&Component, f64)],
    weights: &[Weight],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if p > PRIMES.len() {
        return Err(Error::InvalidSubordinator(format!(
            "input dimension {p} exceeds the QMC limit {}",
            PRIMES.len()
        )));
    }
    let normal = Normal::standard();
    let per_shift = spec.qmc_points / spec.qmc_shifts;
    let mut rng = SplitMix64::new(spec.qmc_seed);
    let mut means = Vec::with_capacity(spec.qmc_shifts);
    let mut s = vec![0.0; p];
    for _ in 0..spec.qmc_shifts {
        let shift: Vec<f64> = (0..p).map(|_| rng.next_f64()).collect();
        let mut acc = 0.0;
        for i in 1..=per_shift as u64 {
            for k in 0..p {
                let u = (radical_inverse(i, PRIMES[k]) + shift[k]).fract();
                s[k] = normal.inverse_cdf(u.clamp(1e-16, 1.0 - 1e-16));
            }
            if active.iter().all(|(c, v)| c.eval(&s) <= *v) {
                acc += weights.iter().zip(&s).map(|(w, &sk)| w.eval(sk)).product::<f64>();
            }
        }
        means.push(acc / per_shift as f64);
    }
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    if !(se <= spec.qmc_max_se) {
        return Err(Error::QuadratureNotConverged {
            estimate: se,
            tolerance: spec.qmc_max_se,
        });
    }
    Ok(Estimate { value: mean, error: se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::factorial;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn orthogonality() {
        // ∫ H_q H_r φ = δ_qr q!, via the single-coordinate identity map
        let g = Subordinator::identity();
        for q in 0..=10usize {
            for r in 0..=10usize {
                let val = crate::hermite::quadrature::adaptive(
                    |s| (Weight::Hermite(q).eval(s) * Weight::Hermite(r).eval(s) * std_normal_pdf(s), 0.0),
                    &(-16..16).map(|i| (i as f64, i as f64 + 1.0)).collect::<Vec<_>>(),
                    1e-12,
                    4000,
                )
                .value;
                let want = if q == r { factorial::<f64>(q) } else { 0.0 };
                assert!((val - want).abs() < 1e-8, "q={q} r={r} got {val}");
            }
        }
        let mass = integrate_region(&g, &[f64::INFINITY], &[Weight::Hermite(0)], &spec()).unwrap();
        assert!((mass.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_oracles() {
        let g = Subordinator::identity();
        let half = integrate_region(&g, &[0.0], &[Weight::Hermite(0)], &spec()).unwrap();
        assert!((half.value - 0.5).abs() < 1e-12);
        let j1 = integrate_region(&g, &[0.0], &[Weight::Hermite(1)], &spec()).unwrap();
        assert!((j1.value + std_normal_pdf(0.0)).abs() < 1e-12);
        let abs1 = integrate_region(&g, &[f64::INFINITY], &[Weight::AbsHermite(1)], &spec()).unwrap();
        assert!((abs1.value - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        let abs2 = integrate_region(&g, &[f64::INFINITY], &[Weight::AbsHermite(2)], &spec()).unwrap();
        assert!((abs2.value - 4.0 * std_normal_pdf(1.0)).abs() < 1e-12);
        let none = integrate_region(&g, &[f64::NEG_INFINITY], &[Weight::Hermite(0)], &spec()).unwrap();
        assert_eq!(none.value, 0.0);
    }

    #[test]
    fn nested_regions() {
        // P(X1 <= 0, X2 <= 0) = 1/4 for independent inputs
        let g = Subordinator::identity_p(2);
        let q = integrate_region(&g, &[0.0, 0.0], &[Weight::Hermite(0); 2], &spec()).unwrap();
        assert!((q.value - 0.25).abs() < 1e-11);
        // P((X1 + X2)/√2 <= 1) = Φ(1)
        let r = 0.5f64.sqrt();
        let lin = Subordinator::new(2, vec![Component::Linear { weights: vec![r, r] }]).unwrap();
        let v = integrate_region(&lin, &[1.0], &[Weight::Hermite(0); 2], &spec()).unwrap();
        assert!((v.value - std_normal_cdf(1.0)).abs() < 1e-9, "{}", v.value);
        // E[1{(X1 + X2)/√2 <= 0} X1] = -φ(0)/√2
        let w = integrate_region(&lin, &[0.0], &[Weight::Hermite(1), Weight::Hermite(0)], &spec()).unwrap();
        assert!((w.value + r * std_normal_pdf(0.0)).abs() < 1e-9, "{}", w.value);
        let g3 = Subordinator::identity_p(3);
        let c = integrate_region(&g3, &[0.0, 1.0, f64::INFINITY], &[Weight::Hermite(1), Weight::Hermite(0), Weight::Hermite(2)], &spec())
            .unwrap();
        assert!(c.value.abs() < 1e-9);
    }

    #[test]
    fn quasi_monte_carlo_dimension_four() {
        let g = Subordinator::identity_p(4);
        let spec = QuadratureSpec { qmc_points: 40_000, ..spec() };
        let est = integrate_region(&g, &[0.0; 4], &[Weight::Hermite(0); 4], &spec).unwrap();
        assert!((est.value - 1.0 / 16.0).abs() < 5.0 * est.error.max(1e-4), "{est:?}");
    }
}
