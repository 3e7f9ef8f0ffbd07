//! Dyadic chaining points, quality-k partitions and the decomposition of a
//! lower quadrant into partition cells.

use serde::{Deserialize, Serialize};

use super::lambda::LambdaSpec;
use crate::error::{Error, Result};
use crate::ext_real;

/// Largest supported chaining level.
pub const MAX_LEVEL: usize = 20;

/// `x_0 = -∞ <= x_1 <= ... <= x_{2^k} = +∞` with
/// `x_i = inf{x : Λ_j(x) >= Λ(∞) i 2^{-k}}`.
pub fn chaining_points(lambda: &LambdaSpec, j: usize, k: usize) -> Result<Vec<f64>> {
    if k > MAX_LEVEL {
        return Err(Error::CapExceeded(format!("chaining level {k} > {MAX_LEVEL}")));
    }
    if j >= lambda.dims() {
        return Err(Error::IndexOutOfRange { what: "dimension", index: j + 1, max: lambda.dims() });
    }
    let n = 1usize << k;
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(f64::NEG_INFINITY);
    for i in 1..n {
        let level = lambda.total * i as f64 / n as f64;
        pts.push(lambda.inverse(j, level)?);
    }
    pts.push(f64::INFINITY);
    Ok(pts)
}

/// Largest `Λ_j(x_{i+1}-) - Λ_j(x_i) - Λ(∞) 2^{-k}` over `i`; nonpositive
/// when the increment bound holds.
pub fn increment_excess(lambda: &LambdaSpec, j: usize, k: usize, points: &[f64]) -> Result<f64> {
    let bound = lambda.total / (1usize << k) as f64;
    let mut worst = f64::NEG_INFINITY;
    for w in points.windows(2) {
        let inc = lambda.left_limit(j, w[1])? - lambda.value(j, w[0])?;
        worst = worst.max(inc - bound);
    }
    Ok(worst)
}

/// Chaining points of every dimension at levels `0..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionScheme {
    pub dims: usize,
    pub quality: usize,
    /// `levels[j][k]` holds the `2^k + 1` points of dimension `j` at level `k`.
    pub levels: Vec<Vec<Level>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Level(#[serde(with = "ext_real::vec")] pub Vec<f64>);

impl PartitionScheme {
    /// Level-`K` points are computed once; coarser levels are the
    /// subsequences `x_i(k) = x_{i 2^{K-k}}(K)`.
    pub fn build(lambda: &LambdaSpec, quality: usize) -> Result<Self> {
        let finest = (0..lambda.dims())
            .map(|j| chaining_points(lambda, j, quality))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_finest(finest, quality))
    }

    pub fn from_finest(finest: Vec<Vec<f64>>, quality: usize) -> Self {
        let levels: Vec<Vec<Level>> = finest
            .into_iter()
            .map(|pts| {
                (0..=quality)
                    .map(|k| Level(pts.iter().step_by(1 << (quality - k)).copied().collect()))
                    .collect()
            })
            .collect();
        Self {
            dims: levels.len(),
            quality,
            levels,
        }
    }

    pub fn points(&self, j: usize, k: usize) -> &[f64] {
        &self.levels[j][k].0
    }

    /// `i_k(x) = max{i : x_i(k) < x}` (0 when none), so `x` lies in the
    /// half-open cell `(x_i(k), x_{i+1}(k)]`.
    pub fn cell_index(&self, j: usize, k: usize, x: f64) -> usize {
        let pts = self.points(j, k);
        pts.partition_point(|&p| p < x).saturating_sub(1).min(pts.len() - 2)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme serializes")
    }
}

/// Level tuples `(k_1, ..., k_p)` with `max k_j = k`, grouped by `k = 1..=K`.
pub fn enumerate_partitions(p: usize, quality: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    if p == 0 || p > 4 || quality > 12 {
        return Err(Error::CapExceeded(format!(
            "partition enumeration supports 1 <= p <= 4 and K <= 12, got p = {p}, K = {quality}"
        )));
    }
    let mut groups = vec![Vec::new(); quality];
    let mut tuple = vec![0usize; p];
    loop {
        let k = *tuple.iter().max().unwrap();
        if k >= 1 {
            groups[k - 1].push(tuple.clone());
        }
        let mut pos = p;
        loop {
            if pos == 0 {
                return Ok(groups);
            }
            pos -= 1;
            if tuple[pos] < quality {
                tuple[pos] += 1;
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// Box `(lower, upper]` belonging to the partition with the given levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub levels: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Cell {
    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &hi))| lo < v && v <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub cells: Vec<Cell>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Disjoint cells whose union is `{y : y <= a_x(K)}`. Cell sides in
/// dimension `j` are `(x_{i_l}(l), x_{i_{l+1}}(l+1)]` for `l < K`; only
/// nonempty cells are returned.
pub fn decompose(x: &[f64], quality: usize, scheme: &PartitionScheme) -> Result<Decomposition> {
    if x.len() != scheme.dims {
        return Err(Error::DimensionMismatch { expected: scheme.dims, got: x.len() });
    }
    if quality > scheme.quality {
        return Err(Error::CapExceeded(format!("quality {quality} above scheme quality {}", scheme.quality)));
    }
    let p = scheme.dims;
    // sides[j][l] = (lo, hi) for level l + 1
    let sides: Vec<Vec<(f64, f64)>> = (0..p)
        .map(|j| {
            (0..quality)
                .map(|l| {
                    let lo = scheme.points(j, l)[scheme.cell_index(j, l, x[j])];
                    let hi = scheme.points(j, l + 1)[scheme.cell_index(j, l + 1, x[j])];
                    (lo, hi)
                })
                .collect()
        })
        .collect();
    let a: Vec<f64> = (0..p)
        .map(|j| scheme.points(j, quality)[scheme.cell_index(j, quality, x[j])])
        .collect();
    let b: Vec<f64> = (0..p)
        .map(|j| scheme.points(j, quality)[scheme.cell_index(j, quality, x[j]) + 1])
        .collect();
    let mut cells = Vec::new();
    if quality > 0 && x.iter().all(|&v| v > f64::NEG_INFINITY) {
        let mut l = vec![0usize; p];
        'outer: loop {
            if (0..p).all(|j| sides[j][l[j]].0 < sides[j][l[j]].1) {
                cells.push(Cell {
                    levels: l.iter().map(|v| v + 1).collect(),
                    lower: (0..p).map(|j| sides[j][l[j]].0).collect(),
                    upper: (0..p).map(|j| sides[j][l[j]].1).collect(),
                });
            }
            for pos in (0..p).rev() {
                if l[pos] + 1 < quality {
                    l[pos] += 1;
                    continue 'outer;
                }
                l[pos] = 0;
            }
            break;
        }
    }
    Ok(Decomposition { cells, a, b })
}

/// Violations found by probing a decomposition.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ProbeReport {
    pub probes: usize,
    /// Probes covered by more than one cell.
    pub overlaps: usize,
    /// Probes below `a_x` covered by no cell, or above it covered by some.
    pub coverage: usize,
    /// Cells that are not cells of their own partition, or corners out of order.
    pub structure: usize,
}

impl ProbeReport {
    pub fn violations(&self) -> usize {
        self.overlaps + self.coverage + self.structure
    }
}

/// Brute-force membership check on the lattice spanned by `probe_axes`.
pub fn verify_decomposition(
    x: &[f64],
    d: &Decomposition,
    scheme: &PartitionScheme,
    probe_axes: &[Vec<f64>],
) -> ProbeReport {
    let p = scheme.dims;
    let mut report = ProbeReport::default();
    for (j, &xj) in x.iter().enumerate() {
        if !(d.a[j] <= xj && xj <= d.b[j]) {
            report.structure += 1;
        }
    }
    for c in &d.cells {
        for j in 0..p {
            let pts = scheme.points(j, c.levels[j]);
            let ok = pts.windows(2).any(|w| w[0] == c.lower[j] && w[1] == c.upper[j]);
            if !ok {
                report.structure += 1;
            }
        }
    }
    let sizes: Vec<usize> = probe_axes.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let mut y = vec![0.0; p];
    for flat in 0..total {
        let mut rest = flat;
        for j in (0..p).rev() {
            y[j] = probe_axes[j][rest % sizes[j]];
            rest /= sizes[j];
        }
        let hits = d.cells.iter().filter(|c| c.contains(&y)).count();
        let below = y.iter().zip(&d.a).all(|(v, a)| v <= a);
        report.probes += 1;
        if hits > 1 {
            report.overlaps += 1;
        }
        if (below && hits == 0) || (!below && hits > 0) {
            report.coverage += 1;
        }
    }
    report
}

/// Probe coordinates for dimension `j`: every finite level-`K` point, points
/// just below and above it, cell midpoints, the point `x_j` itself and
/// values outside the finite range, topped up with an even fill to `size`.
pub fn probe_axis(scheme: &PartitionScheme, j: usize, x: f64, size: usize) -> Vec<f64> {
    let pts: Vec<f64> = scheme
        .points(j, scheme.quality)
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    let mut out = Vec::new();
    for &v in &pts {
        let eps = 1e-9 * (1.0 + v.abs());
        out.extend([v, v - eps, v + eps]);
    }
    for w in pts.windows(2) {
        out.push(0.5 * (w[0] + w[1]));
    }
    if x.is_finite() {
        out.push(x);
    }
    let (lo, hi) = match (pts.first(), pts.last()) {
        (Some(&a), Some(&b)) => (a - 1.0 - (b - a).abs(), b + 1.0 + (b - a).abs()),
        _ => (-1.0, 1.0),
    };
    out.extend([lo, hi]);
    let fill = size.saturating_sub(out.len());
    for i in 0..fill {
        out.push(lo + (hi - lo) * (i as f64 + 0.5) / fill as f64);
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Probe coordinates for dimension `j` built from the boundaries the
/// decomposition actually uses. Membership is constant between consecutive
/// boundaries, so the values at, just beside and between them, together
/// with one value outside on each side, reach every region.
pub fn boundary_probe_axis(d: &Decomposition, j: usize, x: f64) -> Vec<f64> {
    let mut bounds: Vec<f64> = d
        .cells
        .iter()
        .flat_map(|c| [c.lower[j], c.upper[j]])
        .chain([d.a[j], d.b[j], x])
        .filter(|v| v.is_finite())
        .collect();
    bounds.sort_by(f64::total_cmp);
    bounds.dedup();
    let mut out = Vec::with_capacity(4 * bounds.len() + 2);
    for &v in &bounds {
        let eps = 1e-9 * (1.0 + v.abs());
        out.extend([v - eps, v, v + eps]);
    }
    for w in bounds.windows(2) {
        out.push(0.5 * (w[0] + w[1]));
    }
    match (bounds.first(), bounds.last()) {
        (Some(&lo), Some(&hi)) => out.extend([lo - 1.0, hi + 1.0]),
        _ => out.extend([-1.0, 1.0]),
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaining::lambda::{LambdaAxis, LambdaMode};

    fn uniform_scheme(p: usize, quality: usize) -> PartitionScheme {
        // Λ_j(x) = x on [0, 1] in every dimension
        let finest: Vec<Vec<f64>> = (0..p)
            .map(|_| {
                let n = 1usize << quality;
                let mut v: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
                v[0] = f64::NEG_INFINITY;
                v[n] = f64::INFINITY;
                v
            })
            .collect();
        PartitionScheme::from_finest(finest, quality)
    }

    #[test]
    fn counts_per_quality() {
        let g = enumerate_partitions(2, 3).unwrap();
        assert_eq!(g.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 5, 7]);
        let g = enumerate_partitions(3, 2).unwrap();
        assert_eq!(g.iter().map(Vec::len).collect::<Vec<_>>(), vec![7, 19]);
        assert!(enumerate_partitions(1, 5).unwrap().iter().all(|v| v.len() == 1));
        assert!(enumerate_partitions(5, 2).is_err());
        assert!(enumerate_partitions(2, 13).is_err());
    }

    #[test]
    fn one_dimensional_decomposition() {
        let s = uniform_scheme(1, 1);
        let d = decompose(&[0.7], 1, &s).unwrap();
        assert_eq!(d.cells.len(), 1);
        assert_eq!(d.cells[0].lower, vec![f64::NEG_INFINITY]);
        assert_eq!(d.cells[0].upper, vec![0.5]);
        assert_eq!(d.a, vec![0.5]);
        assert_eq!(d.b, vec![f64::INFINITY]);
        let none = decompose(&[f64::NEG_INFINITY], 1, &s).unwrap();
        assert!(none.cells.is_empty());
        assert_eq!(none.a, vec![f64::NEG_INFINITY]);
    }

    #[test]
    fn probes_find_no_violations() {
        let s = uniform_scheme(2, 3);
        for x in [[0.3, 0.9], [0.125, 0.6], [f64::INFINITY, 0.2], [1.5, -0.1]] {
            let d = decompose(&x, 3, &s).unwrap();
            let axes: Vec<Vec<f64>> = (0..2).map(|j| probe_axis(&s, j, x[j], 60)).collect();
            let r = verify_decomposition(&x, &d, &s, &axes);
            assert_eq!(r.violations(), 0, "{x:?}: {r:?}");
        }
    }

    #[test]
    fn atoms_give_repeated_points() {
        let t = LambdaAxis::from_table(vec![0.0, 1.0], vec![0.9, 1.0], vec![0.0, 0.95]).unwrap();
        let spec = LambdaSpec::from_tables(vec![t], 1, LambdaMode::UnivariateSubordination).unwrap();
        let pts = chaining_points(&spec, 0, 2).unwrap();
        assert_eq!(pts[1], 0.0);
        assert_eq!(pts[2], 0.0);
        assert_eq!(pts[3], 0.0);
        assert!(increment_excess(&spec, 0, 2, &pts).unwrap() <= 1e-12);
        let scheme = PartitionScheme::build(&spec, 2).unwrap();
        let d = decompose(&[0.5], 2, &scheme).unwrap();
        let r = verify_decomposition(&[0.5], &d, &scheme, &[probe_axis(&scheme, 0, 0.5, 50)]);
        assert_eq!(r.violations(), 0);
        let json = scheme.to_json();
        assert!(json.contains("\"-inf\""));
    }
}
