use std::cmp::Ordering;
use std::fmt::Write;

use crate::chart::{Chart, MAX_LEVEL};
use crate::error::{Result, WormError};

/// Index set `S ⊆ {1..k}` as a bitmask: bit `a-1` set means `a ∈ S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(pub(crate) u8);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_indices(indices: &[usize]) -> Result<IndexSet> {
        let mut bits = 0u8;
        for &a in indices {
            if a == 0 || a > MAX_LEVEL {
                return Err(WormError::IndexOutOfRange { index: a, max: MAX_LEVEL });
            }
            let bit = 1u8 << (a - 1);
            if bits & bit != 0 {
                return Err(WormError::Parse {
                    pos: 0,
                    msg: format!("index {a} repeated in generator subset"),
                });
            }
            bits |= bit;
        }
        Ok(IndexSet(bits))
    }

    pub fn singleton(a: usize) -> IndexSet {
        IndexSet(1 << (a - 1))
    }

    /// All subsets of `{1..k}` ordered by size, then lexicographically.
    pub fn all(k: usize) -> Vec<IndexSet> {
        let mut v: Vec<IndexSet> = (0..(1u16 << k)).map(|b| IndexSet(b as u8)).collect();
        v.sort();
        v
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_odd(self) -> bool {
        self.len() % 2 == 1
    }

    pub fn contains(self, a: usize) -> bool {
        a >= 1 && a <= MAX_LEVEL && self.0 & (1 << (a - 1)) != 0
    }

    /// Elements in increasing order, 1-based.
    pub fn elements(self) -> Vec<usize> {
        (1..=MAX_LEVEL).filter(|&a| self.contains(a)).collect()
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn intersects(self, other: IndexSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn without(self, a: usize) -> IndexSet {
        IndexSet(self.0 & !(1 << (a - 1)))
    }

    /// Number of elements strictly smaller than `a`.
    pub fn count_below(self, a: usize) -> usize {
        (self.0 & ((1u16 << (a - 1)) - 1) as u8).count_ones() as usize
    }

    /// Number of elements strictly larger than `a`.
    pub fn count_above(self, a: usize) -> usize {
        ((self.0 as u16) >> a).count_ones() as usize
    }

    /// `d_a` applied to the sorted composite `d_S`: the sign and the new set,
    /// or `None` when `a ∈ S`.
    pub fn insert(self, a: usize) -> Option<(i32, IndexSet)> {
        if self.contains(a) {
            return None;
        }
        let sign = if self.count_below(a) % 2 == 0 { 1 } else { -1 };
        Some((sign, IndexSet(self.0 | (1 << (a - 1)))))
    }

    pub fn label(self) -> String {
        let mut s = String::from("{");
        for (i, a) in self.elements().into_iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{a}");
        }
        s.push('}');
        s
    }
}

impl Ord for IndexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.elements().cmp(&other.elements()))
    }
}

impl PartialOrd for IndexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The generator `d_S x^i` with `S` non-empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub set: IndexSet,
    pub coord: usize,
}

impl Generator {
    pub fn new(chart: &Chart, set: IndexSet, coord: usize) -> Result<Generator> {
        if set.is_empty() {
            return Err(WormError::Parse { pos: 0, msg: "generator subset must be non-empty".into() });
        }
        if let Some(&a) = set.elements().iter().find(|&&a| a > chart.level()) {
            return Err(WormError::IndexOutOfRange { index: a, max: chart.level() });
        }
        if coord >= chart.dim() {
            return Err(WormError::UnknownCoordinate(format!("#{coord}")));
        }
        Ok(Generator { set, coord })
    }

    pub fn is_odd(&self) -> bool {
        self.set.is_odd()
    }

    /// Indicator vector of `S` in N^k.
    pub fn multidegree(&self, k: usize) -> Vec<usize> {
        (1..=k).map(|a| usize::from(self.set.contains(a))).collect()
    }

    /// `d{1,2}x` style name.
    pub fn label(&self, chart: &Chart) -> String {
        format!("d{}{}", self.set.label(), chart.coord(self.coord))
    }

    /// Every generator of a chart in canonical order.
    pub fn all(chart: &Chart) -> Vec<Generator> {
        let mut v: Vec<Generator> = IndexSet::all(chart.level())
            .into_iter()
            .filter(|s| !s.is_empty())
            .flat_map(|set| (0..chart.dim()).map(move |coord| Generator { set, coord }))
            .collect();
        v.sort();
        v
    }
}

impl Ord for Generator {
    fn cmp(&self, other: &Self) -> Ordering {
        self.set.cmp(&other.set).then(self.coord.cmp(&other.coord))
    }
}

impl PartialOrd for Generator {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_groups_by_size() {
        let s = |v: &[usize]| IndexSet::from_indices(v).unwrap();
        let mut sets = vec![s(&[2, 3]), s(&[1]), s(&[1, 2, 3]), s(&[3]), s(&[1, 3]), s(&[1, 2])];
        sets.sort();
        let labels: Vec<String> = sets.iter().map(|x| x.label()).collect();
        assert_eq!(labels, ["{1}", "{3}", "{1,2}", "{1,3}", "{2,3}", "{1,2,3}"]);
    }

    #[test]
    fn insert_sign_counts_smaller_indices() {
        let s = IndexSet::from_indices(&[1]).unwrap();
        assert_eq!(s.insert(2), Some((-1, IndexSet::from_indices(&[1, 2]).unwrap())));
        assert_eq!(IndexSet::singleton(2).insert(1).unwrap().0, 1);
        assert_eq!(s.insert(1), None);
        let s13 = IndexSet::from_indices(&[1, 3]).unwrap();
        assert_eq!(s13.insert(2).unwrap().0, -1);
        assert_eq!(s13.count_above(1), 1);
    }

    #[test]
    fn generator_validation() {
        let c = Chart::new("U", &["x"], 2).unwrap();
        assert!(Generator::new(&c, IndexSet::from_indices(&[3]).unwrap(), 0).is_err());
        assert!(Generator::new(&c, IndexSet::EMPTY, 0).is_err());
        assert_eq!(Generator::all(&c).len(), 3);
    }
}
