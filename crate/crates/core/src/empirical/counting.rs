//! Exact lower-quadrant counting on a lattice: histogram into cells, then a
//! prefix sum along every axis.

use super::grid::EvaluationGrid;

/// Index of the first lattice value `>= y`, i.e. `y <= axis[i]` iff `i >= cell`.
pub(crate) fn cell(axis: &[f64], y: f64) -> usize {
    axis.partition_point(|&a| a < y)
}

#[derive(Debug, Clone)]
pub(crate) struct LatticeCounter<'a> {
    grid: &'a EvaluationGrid,
    hist: Vec<u64>,
}

impl<'a> LatticeCounter<'a> {
    pub fn new(grid: &'a EvaluationGrid) -> Self {
        Self {
            grid,
            hist: vec![0; grid.len()],
        }
    }

    /// Adds one observation (length `q`).
    pub fn add(&mut self, y: &[f64]) {
        let mut flat = 0;
        for (axis, &v) in self.grid.axes().iter().zip(y) {
            let c = cell(axis, v);
            if c == axis.len() {
                // NaN or +inf never lies below a finite quadrant
                return;
            }
            flat = flat * axis.len() + c;
        }
        self.hist[flat] += 1;
    }

    /// `#{Y <= x}` for every lattice point `x`.
    pub fn cumulative(&self) -> Vec<u64> {
        let mut acc = self.hist.clone();
        let shape = self.grid.shape();
        let mut stride = 1;
        for j in (0..shape.len()).rev() {
            let n = shape[j];
            let block = stride * n;
            for start in (0..acc.len()).step_by(block) {
                for off in 0..stride {
                    for i in 1..n {
                        let cur = start + off + i * stride;
                        acc[cur] += acc[cur - stride];
                    }
                }
            }
            stride = block;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_count() {
        let grid = EvaluationGrid::from_finite(vec![vec![-1.0, 0.0, 1.0], vec![0.5, 2.0]], vec![0.0, 1.0]).unwrap();
        let ys = [[0.0, 0.5], [-2.0, 3.0], [1.0, 1.0], [0.3, -7.0], [5.0, 0.0]];
        let mut c = LatticeCounter::new(&grid);
        for y in &ys {
            c.add(y);
        }
        let cum = c.cumulative();
        for (i, x) in grid.points().enumerate() {
            let naive = ys.iter().filter(|y| y[0] <= x[0] && y[1] <= x[1]).count() as u64;
            assert_eq!(cum[i], naive, "x = {x:?}");
        }
    }
}
