use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::Metric;

/// An unordered vertex pair, stored with the smaller index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair(pub usize, pub usize);

impl Pair {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b { Pair(a, b) } else { Pair(b, a) }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0 == v || self.1 == v
    }
}

/// A set of vertex-disjoint pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching {
    pairs: BTreeSet<Pair>,
}

impl Matching {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a matching, rejecting self-loops and shared vertices.
    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Result<Self> {
        let mut m = Self::new();
        let mut seen = BTreeSet::new();
        for (a, b) in pairs {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            for v in [a, b] {
                if !seen.insert(v) {
                    return Err(Error::NotDisjoint(v));
                }
            }
            m.pairs.insert(Pair::new(a, b));
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.pairs.iter().copied()
    }

    pub fn as_set(&self) -> &BTreeSet<Pair> {
        &self.pairs
    }

    pub fn contains(&self, p: Pair) -> bool {
        self.pairs.contains(&p)
    }

    /// Inserts a pair. Fails if either endpoint is already covered.
    pub fn insert(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        for v in [a, b] {
            if self.covers(v) {
                return Err(Error::NotDisjoint(v));
            }
        }
        self.pairs.insert(Pair::new(a, b));
        Ok(())
    }

    pub fn remove(&mut self, p: Pair) -> bool {
        self.pairs.remove(&p)
    }

    pub fn covers(&self, v: usize) -> bool {
        self.pairs.iter().any(|p| p.contains(v))
    }

    /// The partner of every vertex in `0..size`, `None` when uncovered.
    pub fn mates(&self, size: usize) -> Result<Vec<Option<usize>>> {
        let mut mate = vec![None; size];
        for Pair(a, b) in self.pairs() {
            for v in [a, b] {
                if v >= size {
                    return Err(Error::VertexOutOfRange { vertex: v, size });
                }
            }
            mate[a] = Some(b);
            mate[b] = Some(a);
        }
        Ok(mate)
    }

    /// Checks that every vertex in `0..size` is covered exactly once.
    pub fn check_perfect(&self, size: usize) -> Result<()> {
        let mate = self.mates(size)?;
        match mate.iter().position(Option::is_none) {
            Some(v) => Err(Error::NotPerfect(v)),
            None => Ok(()),
        }
    }

    /// Pairs of `self` that are not in `other`.
    pub fn difference(&self, other: &Matching) -> Vec<Pair> {
        self.pairs.difference(&other.pairs).copied().collect()
    }

    /// Pair list as plain tuples, sorted.
    pub fn to_vec(&self) -> Vec<(usize, usize)> {
        self.pairs().map(|Pair(a, b)| (a, b)).collect()
    }
}

impl FromIterator<Pair> for Matching {
    /// Collects pairs without a disjointness check; callers guarantee it.
    fn from_iter<I: IntoIterator<Item = Pair>>(iter: I) -> Self {
        Self { pairs: iter.into_iter().collect() }
    }
}

/// Total metric cost of all pairs.
pub fn cost<M: Metric + ?Sized>(metric: &M, matching: &Matching) -> Result<i64> {
    let size = metric.size();
    matching.pairs().try_fold(0i64, |acc, Pair(a, b)| {
        for v in [a, b] {
            if v >= size {
                return Err(Error::VertexOutOfRange { vertex: v, size });
            }
        }
        Ok(acc + metric.dist(a, b))
    })
}

pub fn symmetric_difference<T: Ord + Clone>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> BTreeSet<T> {
    a.symmetric_difference(b).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::line::LineInstance;

    #[test]
    fn cost_on_the_line() {
        let line = LineInstance::new(vec![0, 2, 5, 6]).unwrap();
        let m = Matching::from_pairs([(0, 1), (2, 3)]).unwrap();
        assert_eq!(cost(&line, &m).unwrap(), 3);
        assert_eq!(cost(&line, &Matching::new()).unwrap(), 0);
        let out = Matching::from_pairs([(0, 9)]).unwrap();
        assert!(matches!(cost(&line, &out), Err(Error::VertexOutOfRange { vertex: 9, .. })));
    }

    #[test]
    fn construction_rejects_shared_vertices() {
        assert!(matches!(Matching::from_pairs([(0, 1), (1, 2)]), Err(Error::NotDisjoint(1))));
        assert!(matches!(Matching::from_pairs([(3, 3)]), Err(Error::SelfLoop(3))));
        let m = Matching::from_pairs([(2, 0)]).unwrap();
        assert!(m.contains(Pair(0, 2)));
        assert!(matches!(m.check_perfect(4), Err(Error::NotPerfect(1))));
    }

    #[test]
    fn symmetric_difference_basics() {
        let a: BTreeSet<Pair> = [Pair(4, 7), Pair(8, 11), Pair(12, 15)].into();
        let b: BTreeSet<Pair> = [Pair(3, 4), Pair(7, 8), Pair(11, 12), Pair(15, 16)].into();
        assert!(symmetric_difference(&a, &a).is_empty());
        assert_eq!(symmetric_difference(&a, &BTreeSet::new()), a);
        let union: BTreeSet<Pair> = a.union(&b).copied().collect();
        assert_eq!(symmetric_difference(&a, &b), union);
    }
}
