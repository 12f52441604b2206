//! Young diagrams with `n` boxes and at most `d` rows.
//!
//! Diagrams are stored as exactly `d` weakly decreasing parts (trailing zeros
//! included), so box additions `e_i` and box moves `f_ij = e_i - e_j` are plain
//! coordinate arithmetic. Lattices are enumerated in reverse-lexicographic
//! order: `(n, 0, ..)` first, the most balanced diagram last.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default ceiling on the number of diagrams a [`LatticeIndex`] may hold.
pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct YoungDiagram(Vec<u32>);

impl YoungDiagram {
    /// Builds a diagram from its rows; rejects rows that increase.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("diagram needs at least one row".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "parts {parts:?} are not weakly decreasing"
            )));
        }
        Ok(Self(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Number of boxes.
    pub fn boxes(&self) -> usize {
        self.0.iter().map(|&p| p as usize).sum()
    }

    /// Number of rows available, i.e. `d`.
    pub fn rows(&self) -> usize {
        self.0.len()
    }

    /// `μ + e_i`, if it is still a diagram.
    pub fn add_box(&self, row: usize) -> Option<YoungDiagram> {
        if row > 0 && self.0[row - 1] == self.0[row] {
            return None;
        }
        let mut parts = self.0.clone();
        parts[row] += 1;
        Some(Self(parts))
    }

    /// `μ+□`: every valid single-box addition, ordered by row.
    pub fn add_box_set(&self) -> Vec<YoungDiagram> {
        (0..self.rows()).filter_map(|i| self.add_box(i)).collect()
    }

    /// `#(μ+□)` without allocating the set.
    pub fn add_box_count(&self) -> u32 {
        1 + self.0.windows(2).filter(|w| w[0] > w[1]).count() as u32
    }

    /// `μ + f_ij`, if it is still a diagram.
    pub fn shift(&self, f: ShiftVector) -> Option<YoungDiagram> {
        let (i, j) = (f.i, f.j);
        if self.0[j] == 0 {
            return None;
        }
        let mut parts = self.0.clone();
        parts[i] += 1;
        parts[j] -= 1;
        // only rows i and j moved, so only their neighbours need checking
        let ok = |k: usize| k == 0 || k >= parts.len() || parts[k - 1] >= parts[k];
        if ok(i) && ok(i + 1) && ok(j) && ok(j + 1) {
            Some(Self(parts))
        } else {
            None
        }
    }

    /// All `ν = μ + f_ij` (`i ≠ j`) that are diagrams of the same size.
    pub fn shift_neighbors(&self) -> Vec<YoungDiagram> {
        ShiftVector::all(self.rows())
            .filter_map(|f| self.shift(f))
            .collect()
    }

    /// True when every row is strictly longer than the next and the last row is non-empty.
    pub fn is_strict_interior(&self) -> bool {
        self.0.windows(2).all(|w| w[0] > w[1]) && self.0.last().is_some_and(|&p| p > 0)
    }
}

impl fmt::Debug for YoungDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for YoungDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

/// The box move `f_ij = e_i - e_j` (zero-based rows).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ShiftVector {
    pub i: usize,
    pub j: usize,
}

impl ShiftVector {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::InvalidArgument(format!("shift needs i != j, got {i}")));
        }
        Ok(Self { i, j })
    }

    /// All `d(d-1)` ordered pairs, row-major.
    pub fn all(d: usize) -> impl Iterator<Item = ShiftVector> {
        (0..d).flat_map(move |i| (0..d).filter(move |&j| j != i).map(move |j| ShiftVector { i, j }))
    }

    pub fn apply(&self, point: &mut [i64]) {
        point[self.i] += 1;
        point[self.j] -= 1;
    }
}

/// Streams the diagrams of `n` boxes in at most `d` rows in reverse-lexicographic order.
pub fn diagrams(n: usize, d: usize) -> Diagrams {
    let mut first = vec![0u32; d.max(1)];
    if d >= 1 {
        first[0] = n as u32;
    }
    Diagrams { current: (d >= 1).then_some(first) }
}

pub struct Diagrams {
    current: Option<Vec<u32>>,
}

impl Iterator for Diagrams {
    type Item = YoungDiagram;

    fn next(&mut self) -> Option<YoungDiagram> {
        let out = self.current.take()?;
        self.current = successor(&out);
        Some(YoungDiagram(out))
    }
}

/// Next diagram in reverse-lexicographic order: lower the rightmost row that can
/// drop by one while the rows after it absorb the freed box, then refill greedily.
fn successor(parts: &[u32]) -> Option<Vec<u32>> {
    let d = parts.len();
    let mut suffix: u64 = 0;
    for i in (0..d.saturating_sub(1)).rev() {
        suffix += parts[i + 1] as u64;
        let p = parts[i];
        if p > 0 && (p as u64 - 1) * (d - 1 - i) as u64 > suffix {
            let mut next = parts.to_vec();
            next[i] = p - 1;
            let cap = p - 1;
            let mut rem = suffix + 1;
            for slot in next.iter_mut().skip(i + 1) {
                let take = rem.min(cap as u64);
                *slot = take as u32;
                rem -= take;
            }
            return Some(next);
        }
    }
    None
}

/// Deterministic index over 𝕐_d^n.
#[derive(Clone, Debug)]
pub struct LatticeIndex {
    n: usize,
    d: usize,
    diagrams: Vec<YoungDiagram>,
    position: HashMap<YoungDiagram, usize>,
}

impl LatticeIndex {
    /// Enumerates with the default dimension cap.
    pub fn enumerate(n: usize, d: usize) -> Result<Self> {
        Self::enumerate_capped(n, d, DEFAULT_DIMENSION_CAP)
    }

    pub fn enumerate_capped(n: usize, d: usize, cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        if n > u32::MAX as usize / 2 {
            return Err(Error::InvalidArgument(format!("n={n} is too large")));
        }
        let mut list = Vec::new();
        for mu in diagrams(n, d) {
            if list.len() == cap {
                return Err(Error::Capacity { n, d, cap });
            }
            list.push(mu);
        }
        let position = list.iter().cloned().enumerate().map(|(k, m)| (m, k)).collect();
        Ok(Self { n, d, diagrams: list, position })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.diagrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagrams.is_empty()
    }

    pub fn diagrams(&self) -> &[YoungDiagram] {
        &self.diagrams
    }

    pub fn get(&self, k: usize) -> Option<&YoungDiagram> {
        self.diagrams.get(k)
    }

    pub fn position(&self, mu: &YoungDiagram) -> Option<usize> {
        self.position.get(mu).copied()
    }

    /// One diagram per line, parts comma-separated.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        for mu in &self.diagrams {
            writeln!(out, "{mu}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn yd(p: &[u32]) -> YoungDiagram {
        YoungDiagram::new(p.to_vec()).unwrap()
    }

    #[test]
    fn small_lattices() {
        let l = LatticeIndex::enumerate(1, 2).unwrap();
        assert_eq!(l.diagrams(), &[yd(&[1, 0])]);

        let l = LatticeIndex::enumerate(2, 2).unwrap();
        assert_eq!(l.diagrams(), &[yd(&[2, 0]), yd(&[1, 1])]);

        let l = LatticeIndex::enumerate(6, 3).unwrap();
        assert_eq!(l.len(), 7);
        assert_eq!(l.get(0), Some(&yd(&[6, 0, 0])));
        assert_eq!(l.get(6), Some(&yd(&[2, 2, 2])));
    }

    #[test]
    fn zero_boxes_and_bad_d() {
        let l = LatticeIndex::enumerate(0, 3).unwrap();
        assert_eq!(l.diagrams(), &[yd(&[0, 0, 0])]);
        assert!(LatticeIndex::enumerate(3, 0).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let err = LatticeIndex::enumerate_capped(6, 3, 6).unwrap_err();
        assert!(matches!(err, Error::Capacity { cap: 6, .. }));
        assert_eq!(LatticeIndex::enumerate_capped(6, 3, 7).unwrap().len(), 7);
    }

    #[test]
    fn ordering_is_reverse_lexicographic() {
        let l = LatticeIndex::enumerate(12, 4).unwrap();
        for w in l.diagrams().windows(2) {
            assert!(w[0] > w[1]);
        }
        for (k, mu) in l.diagrams().iter().enumerate() {
            assert_eq!(l.position(mu), Some(k));
        }
    }

    #[test]
    fn add_box_examples() {
        assert_eq!(yd(&[1, 0]).add_box_set(), vec![yd(&[2, 0]), yd(&[1, 1])]);
        assert_eq!(yd(&[1, 1, 1]).add_box_set(), vec![yd(&[2, 1, 1])]);
        for d in 1..6 {
            let mut p = vec![0; d];
            p[0] = 7;
            let mut q = p.clone();
            q[0] = 8;
            assert!(yd(&p).add_box_set().contains(&yd(&q)));
        }
    }

    #[test]
    fn shift_examples() {
        assert_eq!(yd(&[2, 0]).shift_neighbors(), vec![yd(&[1, 1])]);
        let mut got = yd(&[2, 1, 0]).shift_neighbors();
        got.sort();
        assert_eq!(got, vec![yd(&[1, 1, 1]), yd(&[3, 0, 0])]);
        for n in 2..9u32 {
            assert_eq!(yd(&[n, 0]).shift_neighbors().len(), 1);
            let half = [n.div_ceil(2), n / 2];
            assert_eq!(yd(&half).shift_neighbors().len(), 1);
        }
    }

    #[test]
    fn add_box_count_matches_set() {
        for mu in diagrams(9, 4) {
            assert_eq!(mu.add_box_count() as usize, mu.add_box_set().len());
        }
    }

    #[test]
    fn dump_format() {
        let l = LatticeIndex::enumerate(2, 2).unwrap();
        let mut buf = Vec::new();
        l.write_dump(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "2,0\n1,1\n");
    }

    #[test]
    fn shift_vector_rejects_equal_rows() {
        assert!(ShiftVector::new(1, 1).is_err());
        assert_eq!(ShiftVector::all(3).count(), 6);
    }
}
