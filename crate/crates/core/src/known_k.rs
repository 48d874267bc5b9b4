//! The (3,1)-robust strategy for a number of arrivals known in advance.
//!
//! Stage 1 keeps a min-cost matching `M̄` with `n/2 − k` pairs and matches
//! the `2k` vertices it leaves exposed at minimum cost. Stage 2 keeps `M̄`
//! and adds one shortcut pair per path component of `O₂ Δ M̄`.

use crate::error::{ensure_invariant, Error, Result};
use crate::matching::{cost, Matching, Pair};
use crate::metric::MetricInstance;
use crate::oracles::{bruteforce_min_matching, min_cost_matching_of_size, min_perfect_matching_on};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownStageOneResult {
    pub m_bar: Matching,
    pub m1: Matching,
    pub k: usize,
}

pub fn known_stage1(metric: &MetricInstance, k: usize) -> Result<KnownStageOneResult> {
    let n = metric.n();
    let half = n / 2;
    if k == 0 {
        let o1 = bruteforce_min_matching(metric)?;
        return Ok(KnownStageOneResult { m_bar: o1.clone(), m1: o1, k });
    }
    if 2 * k >= n {
        // every first-stage pair may be deleted later
        let o1 = bruteforce_min_matching(metric)?;
        return Ok(KnownStageOneResult { m_bar: Matching::new(), m1: o1, k });
    }
    let m_bar = min_cost_matching_of_size(metric, half - k)?;
    let exposed: Vec<usize> = (0..n).filter(|&v| !m_bar.covers(v)).collect();
    let (completion, _) = min_perfect_matching_on(metric, &exposed)?;
    let mut m1 = m_bar.clone();
    for Pair(a, b) in completion.pairs() {
        m1.insert(a, b)?;
    }
    m1.check_perfect(n)?;

    let o1 = bruteforce_min_matching(metric)?;
    let (c_m1, c_o1) = (cost(metric, &m1)?, cost(metric, &o1)?);
    ensure_invariant!(cost(metric, &m_bar)? <= c_o1, "c(M̄) exceeds c(O₁)");
    ensure_invariant!(c_m1 <= 3 * c_o1, "c(M₁) = {c_m1} exceeds 3·c(O₁) = {}", 3 * c_o1);
    Ok(KnownStageOneResult { m_bar, m1, k })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownStageTwoResult {
    pub m2: Matching,
    pub o2: Matching,
    pub path_components: usize,
    /// Alternating cycles of `O₂ Δ M̄`; their `M̄` pairs are kept.
    pub cycle_components: usize,
}

/// Second-stage reply on the extended metric (first `m_bar`-instance
/// vertices keep their indices, arrivals follow).
pub fn known_stage2(
    extended: &MetricInstance,
    m_bar: &Matching,
    arrivals: usize,
) -> Result<KnownStageTwoResult> {
    if arrivals == 0 || !arrivals.is_multiple_of(2) || arrivals >= extended.n() {
        return Err(Error::BadArrivals(arrivals));
    }
    let total = extended.n();
    let n1 = total - arrivals;
    m_bar.mates(n1)?;
    // every vertex left exposed by M̄ ends exactly one path component
    let endpoints = total - 2 * m_bar.len();

    let o2 = bruteforce_min_matching(extended)?;
    let diff = Diff::new(total, &o2, m_bar);
    let mut m2 = m_bar.clone();
    let mut paths = 0;
    let mut cycles = 0;
    let mut seen = vec![false; total];
    for start in 0..total {
        if seen[start] || diff.degree(start) != 1 {
            continue;
        }
        let walk = diff.walk_path(start);
        walk.iter().for_each(|&v| seen[v] = true);
        let end = *walk.last().expect("path has two endpoints");
        ensure_invariant!(
            diff.first_is_o2(start) && diff.first_is_o2(end),
            "path component {start}..{end} does not start and end with an O₂ edge"
        );
        m2.insert(start, end)?;
        paths += 1;
    }
    for v in 0..total {
        if !seen[v] && diff.degree(v) == 2 {
            let walk = diff.walk_cycle(v);
            walk.iter().for_each(|&u| seen[u] = true);
            cycles += 1;
        }
    }
    m2.check_perfect(total)?;

    let (c_m2, c_o2) = (cost(extended, &m2)?, cost(extended, &o2)?);
    ensure_invariant!(cost(extended, m_bar)? <= c_o2, "c(M̄) exceeds c(O₂)");
    ensure_invariant!(c_m2 <= 3 * c_o2, "c(M₂) = {c_m2} exceeds 3·c(O₂) = {}", 3 * c_o2);
    ensure_invariant!(
        2 * paths == endpoints,
        "expected {} path components, found {paths}",
        endpoints / 2
    );
    Ok(KnownStageTwoResult { m2, o2, path_components: paths, cycle_components: cycles })
}

/// Adjacency of `O₂ Δ M̄`: each vertex has at most one edge from each side.
struct Diff {
    o2: Vec<Option<usize>>,
    bar: Vec<Option<usize>>,
}

impl Diff {
    fn new(total: usize, o2: &Matching, m_bar: &Matching) -> Self {
        let side = |only: Vec<Pair>| {
            let mut adj = vec![None; total];
            for Pair(u, v) in only {
                adj[u] = Some(v);
                adj[v] = Some(u);
            }
            adj
        };
        Self { o2: side(o2.difference(m_bar)), bar: side(m_bar.difference(o2)) }
    }

    fn degree(&self, v: usize) -> usize {
        self.o2[v].is_some() as usize + self.bar[v].is_some() as usize
    }

    fn first_is_o2(&self, endpoint: usize) -> bool {
        self.o2[endpoint].is_some()
    }

    fn walk_path(&self, start: usize) -> Vec<usize> {
        let mut walk = vec![start];
        let mut use_o2 = self.o2[start].is_some();
        let mut cur = start;
        loop {
            let next = if use_o2 { self.o2[cur] } else { self.bar[cur] };
            match next {
                Some(v) => {
                    walk.push(v);
                    cur = v;
                    use_o2 = !use_o2;
                }
                None => return walk,
            }
        }
    }

    fn walk_cycle(&self, start: usize) -> Vec<usize> {
        let mut walk = vec![start];
        let mut cur = self.o2[start].expect("cycle vertex has an O₂ edge");
        let mut use_o2 = false;
        while cur != start {
            walk.push(cur);
            cur = if use_o2 { self.o2[cur] } else { self.bar[cur] }.expect("cycle is closed");
            use_o2 = !use_o2;
        }
        walk
    }
}
