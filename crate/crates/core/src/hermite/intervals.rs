//! Finite unions of intervals on the extended real line.
//!
//! Endpoints carry no open/closed flag: every consumer integrates against a
//! density, where the distinction has measure zero. Degenerate pieces are
//! dropped.

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    pieces: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self { pieces: Vec::new() }
    }

    pub fn full() -> Self {
        Self {
            pieces: vec![(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::from_pieces(vec![(lo, hi)])
    }

    /// Sorts and merges overlapping or touching pieces.
    pub fn from_pieces(mut pieces: Vec<(f64, f64)>) -> Self {
        pieces.retain(|&(a, b)| a < b);
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Self { pieces: out }
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, s: f64) -> bool {
        self.pieces.iter().any(|&(a, b)| a <= s && s <= b)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a0, a1) = self.pieces[i];
            let (b0, b1) = other.pieces[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { pieces: out }
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut cursor = f64::NEG_INFINITY;
        for &(a, b) in &self.pieces {
            if cursor < a {
                out.push((cursor, a));
            }
            cursor = b;
        }
        if cursor < f64::INFINITY {
            out.push((cursor, f64::INFINITY));
        }
        Self { pieces: out }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.pieces.clone();
        all.extend_from_slice(&other.pieces);
        Self::from_pieces(all)
    }

    /// Clip to `[-t, t]`.
    pub fn truncate(&self, t: f64) -> Self {
        self.intersect(&Self::interval(-t, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = IntervalSet::from_pieces(vec![(2.0, 3.0), (-1.0, 0.5), (0.5, 1.0)]);
        assert_eq!(a.pieces(), &[(-1.0, 1.0), (2.0, 3.0)]);
        let c = a.complement();
        assert_eq!(
            c.pieces(),
            &[(f64::NEG_INFINITY, -1.0), (1.0, 2.0), (3.0, f64::INFINITY)]
        );
        assert!(a.intersect(&c).is_empty());
        assert_eq!(a.union(&c), IntervalSet::full());
        let b = IntervalSet::interval(0.0, 2.5);
        assert_eq!(a.intersect(&b).pieces(), &[(0.0, 1.0), (2.0, 2.5)]);
        assert!(IntervalSet::full().complement().is_empty());
    }
}
