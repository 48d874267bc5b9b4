//! Exact reference solvers.
//!
//! General metrics are handled by dynamic programming over vertex subsets,
//! which caps them at [`MAX_DP_VERTICES`]. On the line the consecutive
//! pairing of the sorted points is optimal and needs no search.

use crate::error::{Error, Result};
use crate::line::ExtendedLine;
use crate::matching::{Matching, Pair};
use crate::metric::Metric;

pub const MAX_DP_VERTICES: usize = 20;
pub const MAX_REPLY_PAIRS: usize = 12;

/// Pairs positions `0-1, 2-3, …` of a sorted coordinate list.
pub fn optimal_line_matching(points: &[i64]) -> Result<Matching> {
    if !points.len().is_multiple_of(2) {
        return Err(Error::OddOrEmpty(points.len()));
    }
    if points.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Parameter("line points must be sorted".into()));
    }
    Ok((0..points.len()).step_by(2).map(|i| Pair(i, i + 1)).collect())
}

/// Pairs consecutive vertices of an already ordered vertex list.
pub fn consecutive_pairing(order: &[usize]) -> Result<Matching> {
    if !order.len().is_multiple_of(2) {
        return Err(Error::OddOrEmpty(order.len()));
    }
    Matching::from_pairs(order.chunks(2).map(|c| (c[0], c[1])))
}

/// `O₂` on the line: consecutive pairing in merged order.
pub fn optimal_extended_line_matching(ext: &ExtendedLine) -> Matching {
    consecutive_pairing(&ext.merged_order()).expect("extended line has an even vertex count")
}

/// Min-cost perfect matchings of every even subset of a vertex list.
struct SubsetTable {
    verts: Vec<usize>,
    dist: Vec<Vec<i64>>,
    best: Vec<i64>,
}

impl SubsetTable {
    fn build<M: Metric + ?Sized>(metric: &M, verts: &[usize]) -> Result<Self> {
        let n = verts.len();
        if n > MAX_DP_VERTICES {
            return Err(Error::Capacity { what: "vertex count", got: n, limit: MAX_DP_VERTICES });
        }
        let size = metric.size();
        if let Some(&v) = verts.iter().find(|&&v| v >= size) {
            return Err(Error::VertexOutOfRange { vertex: v, size });
        }
        let mut verts = verts.to_vec();
        verts.sort_unstable();
        let dist: Vec<Vec<i64>> =
            verts.iter().map(|&a| verts.iter().map(|&b| metric.dist(a, b)).collect()).collect();
        let mut best = vec![i64::MAX; 1 << n];
        best[0] = 0;
        for mask in 1usize..(1 << n) {
            if mask.count_ones() % 2 != 0 {
                continue;
            }
            let low = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << low);
            let mut bits = rest;
            let mut value = i64::MAX;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let sub = best[rest & !(1 << j)];
                value = value.min(dist[low][j] + sub);
            }
            best[mask] = value;
        }
        Ok(Self { verts, dist, best })
    }

    fn value(&self, mask: usize) -> i64 {
        self.best[mask]
    }

    /// Lexicographically smallest optimal pair list for `mask`.
    fn reconstruct(&self, mut mask: usize) -> Vec<Pair> {
        let mut pairs = Vec::with_capacity(mask.count_ones() as usize / 2);
        while mask != 0 {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << low);
            let target = self.best[mask];
            let mut bits = rest;
            loop {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let sub = rest & !(1 << j);
                if self.dist[low][j] + self.best[sub] == target {
                    pairs.push(Pair(self.verts[low], self.verts[j]));
                    mask = sub;
                    break;
                }
            }
        }
        pairs
    }

    /// Local bitmask of a set of original vertex ids.
    fn mask_of(&self, vertices: impl IntoIterator<Item = usize>) -> usize {
        vertices.into_iter().fold(0, |m, v| {
            m | 1 << self.verts.binary_search(&v).expect("vertex is in the table")
        })
    }
}

/// Min-cost perfect matching on a vertex subset of `metric`.
pub fn min_perfect_matching_on<M: Metric + ?Sized>(
    metric: &M,
    verts: &[usize],
) -> Result<(Matching, i64)> {
    if !verts.len().is_multiple_of(2) {
        return Err(Error::OddOrEmpty(verts.len()));
    }
    let table = SubsetTable::build(metric, verts)?;
    let full = (1usize << verts.len()) - 1;
    let pairs = table.reconstruct(full);
    Ok((pairs.into_iter().collect(), table.value(full)))
}

/// Globally min-cost perfect matching, ties broken towards the
/// lexicographically smallest pair list.
pub fn bruteforce_min_matching<M: Metric + ?Sized>(metric: &M) -> Result<Matching> {
    let n = metric.size();
    if !n.is_multiple_of(2) {
        return Err(Error::OddOrEmpty(n));
    }
    let verts: Vec<usize> = (0..n).collect();
    Ok(min_perfect_matching_on(metric, &verts)?.0)
}

/// Min-cost matching with exactly `q` pairs.
pub fn min_cost_matching_of_size<M: Metric + ?Sized>(metric: &M, q: usize) -> Result<Matching> {
    let n = metric.size();
    if 2 * q > n {
        return Err(Error::InfeasibleSize { pairs: q, vertices: n });
    }
    let verts: Vec<usize> = (0..n).collect();
    let table = SubsetTable::build(metric, &verts)?;
    let masks: Vec<usize> =
        (0usize..(1 << n)).filter(|m| m.count_ones() as usize == 2 * q).collect();
    let optimum = masks.iter().map(|&m| table.value(m)).min().unwrap_or(0);
    let best = masks
        .into_iter()
        .filter(|&m| table.value(m) == optimum)
        .map(|m| {
            let mut pairs = table.reconstruct(m);
            pairs.sort_unstable();
            pairs
        })
        .min()
        .unwrap_or_default();
    Ok(best.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplySearchResult {
    pub feasible: bool,
    pub best_reply: Option<Matching>,
    pub best_cost: Option<i64>,
    /// First-stage pairs deleted by the best reply.
    pub removed: Vec<Pair>,
}

/// Exhaustive search for the cheapest second-stage reply that deletes at
/// most `budget` pairs of `m1`. `extended` is the full second-stage metric;
/// every vertex not covered by the kept part of `m1` is rematched optimally.
pub fn bruteforce_best_reply<M: Metric + ?Sized>(
    extended: &M,
    m1: &Matching,
    budget: usize,
) -> Result<ReplySearchResult> {
    let size = extended.size();
    if m1.len() > MAX_REPLY_PAIRS {
        return Err(Error::Capacity { what: "first-stage pairs", got: m1.len(), limit: MAX_REPLY_PAIRS });
    }
    let mate = m1.mates(size)?;
    let verts: Vec<usize> = (0..size).collect();
    let table = SubsetTable::build(extended, &verts)?;
    let pairs: Vec<Pair> = m1.pairs().collect();
    let uncovered = table.mask_of((0..size).filter(|&v| mate[v].is_none()));
    if uncovered.count_ones() % 2 != 0 {
        return Ok(ReplySearchResult { feasible: false, best_reply: None, best_cost: None, removed: vec![] });
    }
    let kept_cost: i64 = pairs.iter().map(|p| extended.dist(p.0, p.1)).sum();

    let mut best: Option<(i64, usize)> = None;
    for subset in 0usize..(1 << pairs.len()) {
        if subset.count_ones() as usize > budget {
            continue;
        }
        let mut exposed = uncovered;
        let mut cost = kept_cost;
        for (idx, p) in pairs.iter().enumerate() {
            if subset >> idx & 1 == 1 {
                exposed |= table.mask_of([p.0, p.1]);
                cost -= extended.dist(p.0, p.1);
            }
        }
        let total = cost + table.value(exposed);
        if best.is_none_or(|(c, _)| total < c) {
            best = Some((total, subset));
        }
    }

    let Some((best_cost, subset)) = best else {
        return Ok(ReplySearchResult { feasible: false, best_reply: None, best_cost: None, removed: vec![] });
    };
    let mut exposed = uncovered;
    let mut reply = Matching::new();
    let mut removed = Vec::new();
    for (idx, &p) in pairs.iter().enumerate() {
        if subset >> idx & 1 == 1 {
            exposed |= table.mask_of([p.0, p.1]);
            removed.push(p);
        } else {
            reply.insert(p.0, p.1)?;
        }
    }
    for p in table.reconstruct(exposed) {
        reply.insert(p.0, p.1)?;
    }
    Ok(ReplySearchResult { feasible: true, best_reply: Some(reply), best_cost: Some(best_cost), removed })
}
