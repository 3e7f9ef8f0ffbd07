//! Maps `G: R^p -> R^q` assembled from a small component catalog.

use serde::{Deserialize, Serialize};

use super::intervals::IntervalSet;
use crate::error::{Error, Result};
use crate::ext_real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    #[serde(with = "ext_real")]
    pub lo: f64,
    #[serde(with = "ext_real")]
    pub hi: f64,
}

/// One output coordinate of `G`. `input` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Component {
    Identity { input: usize },
    Square { input: usize },
    Abs { input: usize },
    /// `c_0 + c_1 s + c_2 s^2 + ...`
    Poly { input: usize, coefficients: Vec<f64> },
    /// Indicator of an open union of intervals.
    Indicator { input: usize, intervals: Vec<Interval> },
    Linear { weights: Vec<f64> },
}

impl Component {
    /// Zero-based input coordinate, or `None` for linear components.
    pub fn coordinate(&self) -> Option<usize> {
        match self {
            Component::Identity { input }
            | Component::Square { input }
            | Component::Abs { input }
            | Component::Poly { input, .. }
            | Component::Indicator { input, .. } => Some(input - 1),
            Component::Linear { .. } => None,
        }
    }

    /// The same map reading input 1; `None` for linear components.
    pub fn on_first_input(&self) -> Option<Component> {
        let mut c = self.clone();
        match &mut c {
            Component::Identity { input }
            | Component::Square { input }
            | Component::Abs { input }
            | Component::Poly { input, .. }
            | Component::Indicator { input, .. } => *input = 1,
            Component::Linear { .. } => return None,
        }
        Some(c)
    }

    /// Value on a scalar argument (single-coordinate components only).
    pub fn eval_scalar(&self, s: f64) -> f64 {
        match self {
            Component::Identity { .. } => s,
            Component::Square { .. } => s * s,
            Component::Abs { .. } => s.abs(),
            Component::Poly { coefficients, .. } => horner(coefficients, s),
            Component::Indicator { intervals, .. } => {
                if intervals.iter().any(|iv| iv.lo < s && s < iv.hi) {
                    1.0
                } else {
                    0.0
                }
            }
            Component::Linear { weights } => weights.first().copied().unwrap_or(0.0) * s,
        }
    }

    pub fn eval(&self, s: &[f64]) -> f64 {
        match self {
            Component::Linear { weights } => weights.iter().zip(s).map(|(a, v)| a * v).sum(),
            other => other.eval_scalar(s[other.coordinate().unwrap()]),
        }
    }

    /// `{s : g(s) <= x}` for a single-coordinate component, where `x` may be
    /// infinite. Boundaries are exact up to root finding.
    pub fn level_set(&self, x: f64) -> IntervalSet {
        if x == f64::INFINITY {
            return IntervalSet::full();
        }
        if x == f64::NEG_INFINITY {
            return IntervalSet::empty();
        }
        match self {
            Component::Identity { .. } => IntervalSet::interval(f64::NEG_INFINITY, x),
            Component::Square { .. } if x < 0.0 => IntervalSet::empty(),
            Component::Square { .. } => IntervalSet::interval(-x.sqrt(), x.sqrt()),
            Component::Abs { .. } if x < 0.0 => IntervalSet::empty(),
            Component::Abs { .. } => IntervalSet::interval(-x, x),
            Component::Poly { coefficients, .. } => poly_sublevel(coefficients, x),
            Component::Indicator { intervals, .. } => {
                if x < 0.0 {
                    IntervalSet::empty()
                } else if x < 1.0 {
                    indicator_set(intervals).complement()
                } else {
                    IntervalSet::full()
                }
            }
            Component::Linear { weights } => {
                linear_level_set(weights.first().copied().unwrap_or(0.0), 0.0, x)
            }
        }
    }

    /// Points where `g` has an atom.
    pub fn atoms(&self) -> Vec<f64> {
        match self {
            Component::Indicator { .. } => vec![0.0, 1.0],
            Component::Poly { coefficients, .. } => {
                let c = trimmed(coefficients);
                if c.len() <= 1 {
                    vec![c.first().copied().unwrap_or(0.0)]
                } else {
                    Vec::new()
                }
            }
            Component::Linear { weights } if weights.iter().all(|&w| w == 0.0) => vec![0.0],
            _ => Vec::new(),
        }
    }
}

/// `{s : a s + rest <= x}`.
pub fn linear_level_set(a: f64, rest: f64, x: f64) -> IntervalSet {
    if a > 0.0 {
        IntervalSet::interval(f64::NEG_INFINITY, (x - rest) / a)
    } else if a < 0.0 {
        IntervalSet::interval((x - rest) / a, f64::INFINITY)
    } else if rest <= x {
        IntervalSet::full()
    } else {
        IntervalSet::empty()
    }
}

fn indicator_set(intervals: &[Interval]) -> IntervalSet {
    IntervalSet::from_pieces(intervals.iter().map(|iv| (iv.lo, iv.hi)).collect())
}

pub(crate) fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * s + ci)
}

fn trimmed(c: &[f64]) -> &[f64] {
    let mut n = c.len();
    while n > 0 && c[n - 1] == 0.0 {
        n -= 1;
    }
    &c[..n]
}

/// Real roots of a polynomial (coefficients lowest degree first), sorted.
pub fn real_roots(coefficients: &[f64]) -> Vec<f64> {
    let c = trimmed(coefficients);
    match c.len() {
        0 | 1 => return Vec::new(),
        2 => return vec![-c[0] / c[1]],
        _ => {}
    }
    let lead = *c.last().unwrap();
    let bound = 1.0 + c[..c.len() - 1].iter().map(|v| (v / lead).abs()).fold(0.0, f64::max);
    let deriv: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
    let mut marks = vec![-bound];
    marks.extend(real_roots(&deriv).into_iter().filter(|r| r.abs() < bound));
    marks.push(bound);
    let mut roots: Vec<f64> = Vec::new();
    for w in marks.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (horner(c, a), horner(c, b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        // monotone on [a, b]: plain bisection down to adjacent floats
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if horner(c, mid).signum() == fa.signum() {
                a = mid;
            } else {
                b = mid;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if horner(c, bound) == 0.0 {
        roots.push(bound);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs().max(1.0));
    roots
}

/// `{s : P(s) <= x}` by sign inspection between consecutive roots.
fn poly_sublevel(coefficients: &[f64], x: f64) -> IntervalSet {
    let mut shifted = coefficients.to_vec();
    if shifted.is_empty() {
        shifted.push(0.0);
    }
    shifted[0] -= x;
    let c = trimmed(&shifted);
    if c.len() <= 1 {
        let v = c.first().copied().unwrap_or(0.0);
        return if v <= 0.0 { IntervalSet::full() } else { IntervalSet::empty() };
    }
    let roots = real_roots(c);
    let mut cuts = vec![f64::NEG_INFINITY];
    cuts.extend(roots.iter().copied());
    cuts.push(f64::INFINITY);
    let probe = |a: f64, b: f64| -> f64 {
        match (a.is_finite(), b.is_finite()) {
            (true, true) => 0.5 * (a + b),
            (false, true) => b - 1.0,
            (true, false) => a + 1.0,
            (false, false) => 0.0,
        }
    };
    let pieces = cuts
        .windows(2)
        .filter(|w| horner(c, probe(w[0], w[1])) <= 0.0)
        .map(|w| (w[0], w[1]))
        .collect();
    IntervalSet::from_pieces(pieces)
}

/// `G: R^p -> R^q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subordinator {
    pub p: usize,
    pub components: Vec<Component>,
}

impl Subordinator {
    pub fn new(p: usize, components: Vec<Component>) -> Result<Self> {
        let g = Self { p, components };
        g.validate()?;
        Ok(g)
    }

    pub fn identity() -> Self {
        Self::new(1, vec![Component::Identity { input: 1 }]).unwrap()
    }

    pub fn square() -> Self {
        Self::new(1, vec![Component::Square { input: 1 }]).unwrap()
    }

    /// Coordinatewise identity on `R^p`.
    pub fn identity_p(p: usize) -> Self {
        Self::new(p, (1..=p).map(|input| Component::Identity { input }).collect()).unwrap()
    }

    pub fn q(&self) -> usize {
        self.components.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Err(Error::InvalidSubordinator(message));
        if self.p == 0 || self.components.is_empty() {
            return bad("need p >= 1 and at least one component".into());
        }
        for (k, c) in self.components.iter().enumerate() {
            match c {
                Component::Linear { weights } => {
                    if weights.len() != self.p {
                        return bad(format!("component {}: linear weights need length {}", k + 1, self.p));
                    }
                    if weights.iter().any(|w| !w.is_finite()) {
                        return bad(format!("component {}: linear weights must be finite", k + 1));
                    }
                }
                other => {
                    let input = other.coordinate().map_or(0, |i| i + 1);
                    if input == 0 || input > self.p {
                        return bad(format!("component {}: input {} outside [1, {}]", k + 1, input, self.p));
                    }
                }
            }
            if let Component::Poly { coefficients, .. } = c {
                if coefficients.is_empty() || coefficients.iter().any(|v| !v.is_finite()) {
                    return bad(format!("component {}: polynomial coefficients must be finite and nonempty", k + 1));
                }
            }
            if let Component::Indicator { intervals, .. } = c {
                let mut prev = f64::NEG_INFINITY;
                for (i, iv) in intervals.iter().enumerate() {
                    if iv.lo.is_nan() || iv.hi.is_nan() || !(iv.lo < iv.hi) || (i > 0 && iv.lo < prev) {
                        return bad(format!(
                            "component {}: indicator intervals must be sorted, disjoint and nonempty",
                            k + 1
                        ));
                    }
                    prev = iv.hi;
                }
            }
        }
        Ok(())
    }

    /// `G(s)` written into `out`.
    pub fn eval_into(&self, s: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(s);
        }
    }

    pub fn eval(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.q()];
        self.eval_into(s, &mut out);
        out
    }

    /// True if no component mixes input coordinates.
    pub fn is_separable(&self) -> bool {
        self.components.iter().all(|c| c.coordinate().is_some())
    }

    /// The single-component map `s -> G_j(s)` as its own subordinator.
    pub fn marginal(&self, j: usize) -> Subordinator {
        Subordinator {
            p: self.p,
            components: vec![self.components[j].clone()],
        }
    }
}
