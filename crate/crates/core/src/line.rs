//! Points on the line, intervals of line edges and the gain functional.
//!
//! The line `L` is the Hamiltonian path through the sorted stage-1 points.
//! L-edge `j` joins `points[j]` and `points[j + 1]`; its cost is their
//! distance. An [`Interval`] is a contiguous run of L-edges and an
//! [`EdgeSubset`] an arbitrary set of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{Matching, Pair};
use crate::metric::Metric;

/// Stage-1 input on the line: strictly increasing integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LineInstance {
    points: Vec<i64>,
}

impl LineInstance {
    pub fn new(points: Vec<i64>) -> Result<Self> {
        if points.len() < 2 || !points.len().is_multiple_of(2) {
            return Err(Error::OddOrEmpty(points.len()));
        }
        if let Some(w) = points.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NotStrictlyIncreasing {
                index: w + 1,
                prev: points[w],
                next: points[w + 1],
            });
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[i64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.points.len() - 1
    }

    pub fn edge_cost(&self, edge: usize) -> i64 {
        self.points[edge + 1] - self.points[edge]
    }

    pub fn interval_cost(&self, iv: Interval) -> i64 {
        self.points[iv.hi + 1] - self.points[iv.lo]
    }

    /// The optimal matching `O₁` as an edge set: every even L-edge.
    pub fn optimal_edges(&self) -> EdgeSubset {
        let mut x = EdgeSubset::empty(self.edge_count());
        for j in (0..self.edge_count()).step_by(2) {
            x.insert(j);
        }
        x
    }

    pub fn interval(&self, lo: usize, hi: usize) -> Result<Interval> {
        Interval::new(lo, hi, self.edge_count())
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.len() {
            return Err(Error::VertexOutOfRange { vertex: v, size: self.len() });
        }
        Ok(())
    }

    /// The L-edges between the two endpoints of a pair.
    pub fn line_projection(&self, pair: Pair) -> Result<Interval> {
        let Pair(v, w) = pair;
        self.check_vertex(v)?;
        self.check_vertex(w)?;
        if v == w {
            return Err(Error::SelfLoop(v));
        }
        Interval::new(v, w - 1, self.edge_count())
    }

    /// Largest number of matching pairs whose projections share an L-edge.
    pub fn stab_count(&self, matching: &Matching) -> Result<usize> {
        let mut delta = vec![0i64; self.edge_count() + 1];
        for p in matching.pairs() {
            let iv = self.line_projection(p)?;
            delta[iv.lo] += 1;
            delta[iv.hi + 1] -= 1;
        }
        let mut best = 0;
        let mut run = 0;
        for d in &delta[..self.edge_count()] {
            run += d;
            best = best.max(run);
        }
        Ok(best as usize)
    }

    pub fn check_edges(&self, set: &EdgeSubset) -> Result<()> {
        if set.universe() != self.edge_count() {
            return Err(Error::EdgeCountMismatch { expected: self.edge_count(), got: set.universe() });
        }
        Ok(())
    }
}

impl Metric for LineInstance {
    fn size(&self) -> usize {
        self.points.len()
    }

    fn dist(&self, a: usize, b: usize) -> i64 {
        (self.points[a] - self.points[b]).abs()
    }
}

/// The contiguous L-edge range `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize, edges: usize) -> Result<Self> {
        if lo > hi || hi >= edges {
            return Err(Error::BadInterval { lo, hi, edges });
        }
        Ok(Self { lo, hi })
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn contains_edge(&self, e: usize) -> bool {
        self.lo <= e && e <= self.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn strictly_contains(&self, other: &Interval) -> bool {
        self.contains(other) && self != other
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Vertex indices of the two boundary points.
    pub fn endpoints(&self) -> Pair {
        Pair(self.lo, self.hi + 1)
    }

    pub fn edges(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

/// A set of L-edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSubset {
    bits: Vec<bool>,
}

impl EdgeSubset {
    pub fn empty(edges: usize) -> Self {
        Self { bits: vec![false; edges] }
    }

    pub fn from_interval(iv: Interval, edges: usize) -> Self {
        let mut s = Self::empty(edges);
        s.insert_interval(iv);
        s
    }

    pub fn from_edges<I: IntoIterator<Item = usize>>(edges: usize, members: I) -> Result<Self> {
        let mut s = Self::empty(edges);
        for e in members {
            if e >= edges {
                return Err(Error::BadInterval { lo: e, hi: e, edges });
            }
            s.insert(e);
        }
        Ok(s)
    }

    /// Number of L-edges the set ranges over.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.bits[e]
    }

    pub fn insert(&mut self, e: usize) {
        self.bits[e] = true;
    }

    pub fn remove(&mut self, e: usize) {
        self.bits[e] = false;
    }

    pub fn insert_interval(&mut self, iv: Interval) {
        self.bits[iv.lo..=iv.hi].iter_mut().for_each(|b| *b = true);
    }

    pub fn remove_interval(&mut self, iv: Interval) {
        self.bits[iv.lo..=iv.hi].iter_mut().for_each(|b| *b = false);
    }

    pub fn flip_interval(&mut self, iv: Interval) {
        self.bits[iv.lo..=iv.hi].iter_mut().for_each(|b| *b = !*b);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        debug_assert_eq!(self.universe(), other.universe());
        Self { bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn cost(&self, line: &LineInstance) -> i64 {
        self.iter().map(|e| line.edge_cost(e)).sum()
    }

    /// Maximal runs of consecutive member edges, left to right.
    pub fn runs(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut start = None;
        for (e, &b) in self.bits.iter().enumerate() {
            match (b, start) {
                (true, None) => start = Some(e),
                (false, Some(s)) => {
                    out.push(Interval { lo: s, hi: e - 1 });
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push(Interval { lo: s, hi: self.bits.len() - 1 });
        }
        out
    }

    /// Fails if two member edges share a vertex.
    pub fn check_line_matching(&self) -> Result<()> {
        match self.bits.windows(2).position(|w| w[0] && w[1]) {
            Some(e) => Err(Error::NotLineMatching(e, e + 1)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Heaviness {
    Heavy,
    Light,
    Neither,
}

/// `c(P ∩ X)` and `c(P \ X)`.
pub fn split_cost(line: &LineInstance, x: &EdgeSubset, p: &EdgeSubset) -> Result<(i64, i64)> {
    line.check_edges(x)?;
    line.check_edges(p)?;
    let mut inside = 0;
    let mut outside = 0;
    for e in p.iter() {
        if x.contains(e) {
            inside += line.edge_cost(e);
        } else {
            outside += line.edge_cost(e);
        }
    }
    Ok((inside, outside))
}

/// `g_X(P) = c(P ∩ X) − c(P \ X)`.
pub fn gain(line: &LineInstance, x: &EdgeSubset, p: &EdgeSubset) -> Result<i64> {
    let (inside, outside) = split_cost(line, x, p)?;
    Ok(inside - outside)
}

/// Heavy when `inside ≥ 2·outside`, light when `2·inside ≤ outside`.
/// The all-zero case satisfies both and is reported as heavy.
pub fn classify(inside: i64, outside: i64) -> Heaviness {
    if inside >= 2 * outside {
        Heaviness::Heavy
    } else if 2 * inside <= outside {
        Heaviness::Light
    } else {
        Heaviness::Neither
    }
}

pub fn heaviness(line: &LineInstance, x: &EdgeSubset, p: &EdgeSubset) -> Result<Heaviness> {
    let (inside, outside) = split_cost(line, x, p)?;
    Ok(classify(inside, outside))
}

pub fn is_heavy(inside: i64, outside: i64) -> bool {
    inside >= 2 * outside
}

pub fn is_light(inside: i64, outside: i64) -> bool {
    2 * inside <= outside
}

/// Second-stage arrival coordinates on the line; `k` is half their count.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LineArrivals {
    coords: Vec<i64>,
}

impl LineArrivals {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(Error::BadArrivals(coords.len()));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn k(&self) -> usize {
        self.coords.len() / 2
    }
}

/// The second-stage vertex set on the line: stage-1 points keep their
/// indices `0..n`, arrivals follow as `n..n + 2k` in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedLine {
    coords: Vec<i64>,
    stage1: usize,
}

impl ExtendedLine {
    pub fn new(line: &LineInstance, arrivals: &LineArrivals) -> Self {
        let mut coords = line.points().to_vec();
        coords.extend_from_slice(arrivals.coords());
        Self { coords, stage1: line.len() }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn stage1_len(&self) -> usize {
        self.stage1
    }

    pub fn is_stage1(&self, v: usize) -> bool {
        v < self.stage1
    }

    /// Vertices sorted by coordinate; ties keep stage-1 points first, then
    /// arrivals in input order.
    pub fn merged_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.coords.len()).collect();
        order.sort_by_key(|&v| self.coords[v]);
        order
    }

    /// Sorts a vertex subset into merged order.
    pub fn sort_vertices(&self, vertices: &mut [usize]) {
        vertices.sort_by_key(|&v| (self.coords[v], v));
    }
}

impl Metric for ExtendedLine {
    fn size(&self) -> usize {
        self.coords.len()
    }

    fn dist(&self, a: usize, b: usize) -> i64 {
        (self.coords[a] - self.coords[b]).abs()
    }
}
