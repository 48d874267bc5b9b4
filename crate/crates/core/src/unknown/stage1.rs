//! First stage for an unknown number of arrivals on the line.
//!
//! Starting from `X = O₁`, repeatedly pick the X-heavy interval of maximum
//! gain, fix the pair joining its endpoints and flip the interval in `X`.
//! The chosen intervals form a laminar family whose containment tree drives
//! the second stage.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_invariant, Error, Result};
use crate::line::{is_heavy, is_light, EdgeSubset, Interval, LineInstance};
use crate::matching::{Matching, Pair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Heavy,
    Light,
}

/// The containment tree of the selected intervals. Node 0 is the whole
/// line; node `i ≥ 1` is the interval chosen in iteration `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaminarTree {
    edges: usize,
    intervals: Vec<Interval>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    x_trace: Option<Vec<EdgeSubset>>,
}

impl LaminarTree {
    /// Builds the tree from the intervals of nodes `1..=n` in selection
    /// order. Fails unless every later interval is disjoint from or strictly
    /// inside each earlier one.
    pub fn from_intervals(edges: usize, chosen: &[Interval]) -> Result<Self> {
        if edges == 0 {
            return Err(Error::OddOrEmpty(0));
        }
        for iv in chosen {
            Interval::new(iv.lo, iv.hi, edges)?;
        }
        for (j, later) in chosen.iter().enumerate() {
            for (i, earlier) in chosen[..j].iter().enumerate() {
                if later.intersects(earlier) && !earlier.strictly_contains(later) {
                    return Err(Error::Invariant(format!(
                        "intervals {} {:?} and {} {:?} are not laminar",
                        i + 1,
                        earlier,
                        j + 1,
                        later
                    )));
                }
            }
        }
        let mut intervals = vec![Interval { lo: 0, hi: edges - 1 }];
        intervals.extend_from_slice(chosen);
        let count = intervals.len();
        let mut parent = vec![None; count];
        let mut children = vec![Vec::new(); count];
        let mut depth = vec![0; count];
        for j in 1..count {
            let p = (1..j)
                .filter(|&i| intervals[i].strictly_contains(&intervals[j]))
                .min_by_key(|&i| intervals[i].len())
                .unwrap_or(0);
            parent[j] = Some(p);
            children[p].push(j);
            depth[j] = depth[p] + 1;
        }
        Ok(Self { edges, intervals, parent, children, depth, x_trace: None })
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Number of iterations, i.e. non-root nodes.
    pub fn n_iters(&self) -> usize {
        self.intervals.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.intervals.len()
    }

    pub fn nodes(&self) -> std::ops::Range<usize> {
        0..self.intervals.len()
    }

    pub fn interval(&self, node: usize) -> Interval {
        self.intervals[node]
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval_set(&self, node: usize) -> EdgeSubset {
        EdgeSubset::from_interval(self.intervals[node], self.edges)
    }

    /// The fixed pair `e^(i)` joining the endpoints of `P^(i)`.
    pub fn shortcut(&self, node: usize) -> Pair {
        self.intervals[node].endpoints()
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    /// Arc count of the root path `T[i]`.
    pub fn depth(&self, node: usize) -> usize {
        self.depth[node]
    }

    pub fn tag(&self, node: usize) -> Tag {
        if self.depth[node] % 2 == 1 { Tag::Heavy } else { Tag::Light }
    }

    pub fn is_heavy(&self, node: usize) -> bool {
        self.tag(node) == Tag::Heavy
    }

    pub fn heavy_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes().filter(|&i| self.is_heavy(i))
    }

    pub fn light_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes().filter(|&i| !self.is_heavy(i))
    }

    /// Ancestors of `node` other than the root and `node` itself.
    pub fn inner_ancestors(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.parent[node];
        while let Some(p) = cur {
            if p == 0 {
                break;
            }
            out.push(p);
            cur = self.parent[p];
        }
        out
    }

    pub fn is_ancestor(&self, ancestor: usize, node: usize) -> bool {
        let mut cur = self.parent[node];
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.parent[p];
        }
        false
    }

    /// Grandchildren of a node: `LIGHT(i)` for a light node `i`.
    pub fn grandchildren(&self, node: usize) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.children[node].iter().flat_map(|&j| self.children[j].iter().copied()).collect();
        out.sort_unstable();
        out
    }

    /// `X^(i)`, the state of `X` when node `i ≥ 1` was selected.
    pub fn x_before(&self, node: usize) -> Option<&EdgeSubset> {
        match (&self.x_trace, node) {
            (Some(trace), i) if i >= 1 => trace.get(i - 1),
            _ => None,
        }
    }

    pub fn has_trace(&self) -> bool {
        self.x_trace.is_some()
    }

    /// `{e^(i) : i ≥ 1}`.
    pub fn matching(&self) -> Result<Matching> {
        Matching::from_pairs((1..self.node_count()).map(|i| {
            let Pair(a, b) = self.shortcut(i);
            (a, b)
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownStageOneResult {
    pub m1: Matching,
    pub tree: LaminarTree,
    /// Gain of each selected interval at selection time, per node `1..=n`.
    pub gains: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stage1Options {
    /// Keep every `X^(i)`; needed by the trace-based invariant checks.
    pub keep_trace: bool,
}

impl Default for Stage1Options {
    fn default() -> Self {
        Self { keep_trace: true }
    }
}

/// The maximum-gain X-heavy interval that starts and ends with an X-edge,
/// with its gain. Ties go to the smallest `lo`, then the smallest `hi`.
pub fn find_max_gain_heavy_interval(
    line: &LineInstance,
    x: &EdgeSubset,
) -> Result<Option<(Interval, i64)>> {
    line.check_edges(x)?;
    x.check_line_matching()?;
    let m = line.edge_count();
    let mut inside = vec![0i64; m + 1];
    let mut outside = vec![0i64; m + 1];
    for e in 0..m {
        let c = line.edge_cost(e);
        let (di, do_) = if x.contains(e) { (c, 0) } else { (0, c) };
        inside[e + 1] = inside[e] + di;
        outside[e + 1] = outside[e] + do_;
    }
    let members: Vec<usize> = x.iter().collect();
    let mut best: Option<(Interval, i64)> = None;
    for (a, &lo) in members.iter().enumerate() {
        for &hi in &members[a..] {
            let cin = inside[hi + 1] - inside[lo];
            let cout = outside[hi + 1] - outside[lo];
            if !is_heavy(cin, cout) {
                continue;
            }
            let g = cin - cout;
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((Interval { lo, hi }, g));
            }
        }
    }
    Ok(best)
}

pub fn build_robust_matching(line: &LineInstance) -> Result<UnknownStageOneResult> {
    build_robust_matching_with(line, Stage1Options::default())
}

pub fn build_robust_matching_with(
    line: &LineInstance,
    opts: Stage1Options,
) -> Result<UnknownStageOneResult> {
    let m = line.edge_count();
    let mut x = line.optimal_edges();
    let mut chosen: Vec<Interval> = Vec::with_capacity(line.len() / 2);
    let mut gains = Vec::with_capacity(line.len() / 2);
    let mut trace = opts.keep_trace.then(Vec::new);

    while !x.is_empty() {
        let (iv, g) = find_max_gain_heavy_interval(line, &x)?
            .ok_or_else(|| Error::Invariant("non-empty X has no heavy interval".into()))?;
        for v in iv.lo + 1..=iv.hi {
            ensure_invariant!(
                x.contains(v - 1) || x.contains(v),
                "interval {iv:?} passes vertex {v} which X leaves exposed"
            );
        }
        for (i, earlier) in chosen.iter().enumerate() {
            ensure_invariant!(
                !iv.intersects(earlier) || earlier.strictly_contains(&iv),
                "interval {iv:?} overlaps node {} {earlier:?} without nesting",
                i + 1
            );
        }
        let before = x.count();
        if let Some(t) = trace.as_mut() {
            t.push(x.clone());
        }
        x.flip_interval(iv);
        ensure_invariant!(x.count() + 1 == before, "X did not shrink by exactly one edge");
        chosen.push(iv);
        gains.push(g);
    }
    ensure_invariant!(
        chosen.len() == line.len() / 2,
        "{} iterations for {} points",
        chosen.len(),
        line.len()
    );

    let mut tree = LaminarTree::from_intervals(m, &chosen)?;
    tree.x_trace = trace;
    let m1 = tree.matching()?;
    m1.check_perfect(line.len())?;
    Ok(UnknownStageOneResult { m1, tree, gains })
}

/// Structural checks of a stage-1 run. Each returns the first violation.
pub mod checks {
    use super::*;
    use crate::matching::cost;

    fn trace(tree: &LaminarTree, i: usize) -> Result<&EdgeSubset> {
        tree.x_before(i)
            .ok_or_else(|| Error::Invariant("stage-1 run kept no X trace".into()))
    }

    pub fn laminarity(tree: &LaminarTree) -> Result<()> {
        for j in 1..tree.node_count() {
            for i in 1..j {
                let (a, b) = (tree.interval(i), tree.interval(j));
                ensure_invariant!(
                    !a.intersects(&b) || a.strictly_contains(&b),
                    "nodes {i} and {j} are neither disjoint nor nested"
                );
            }
        }
        Ok(())
    }

    /// Every `X^(i)` is a matching inside the line.
    pub fn x_within_line(tree: &LaminarTree) -> Result<()> {
        for i in 1..tree.node_count() {
            trace(tree, i)?.check_line_matching()?;
        }
        Ok(())
    }

    /// Heavy nodes see `O₁` inside their interval, light nodes its complement.
    pub fn heavy_light(line: &LineInstance, tree: &LaminarTree) -> Result<()> {
        let o1 = line.optimal_edges();
        for i in 1..tree.node_count() {
            let p = tree.interval_set(i);
            let seen = p.intersection(trace(tree, i)?);
            let expected = if tree.is_heavy(i) { p.intersection(&o1) } else { p.difference(&o1) };
            ensure_invariant!(seen == expected, "node {i} X-pattern does not match its tag");
            let (cin, cout) = (p.intersection(&o1).cost(line), p.difference(&o1).cost(line));
            if tree.is_heavy(i) {
                ensure_invariant!(is_heavy(cin, cout), "heavy node {i} is not O₁-heavy");
            } else {
                ensure_invariant!(is_light(cin, cout), "light node {i} is not O₁-light");
            }
        }
        Ok(())
    }

    /// Children of a non-root node cover at most half its cost.
    pub fn exp_decay(line: &LineInstance, tree: &LaminarTree) -> Result<()> {
        for i in 1..tree.node_count() {
            let kids: i64 = tree.children(i).iter().map(|&j| line.interval_cost(tree.interval(j))).sum();
            let own = line.interval_cost(tree.interval(i));
            ensure_invariant!(2 * kids <= own, "node {i}: children cost {kids} > half of {own}");
        }
        Ok(())
    }

    /// Below a heavy node, children hold at most a quarter of its `O₁` cost.
    pub fn opt_decay(line: &LineInstance, tree: &LaminarTree) -> Result<()> {
        let o1 = line.optimal_edges();
        let o1_cost = |n: usize| tree.interval_set(n).intersection(&o1).cost(line);
        for i in tree.heavy_nodes() {
            let kids: i64 = tree.children(i).iter().map(|&j| o1_cost(j)).sum();
            let own = o1_cost(i);
            ensure_invariant!(4 * kids <= own, "heavy node {i}: children O₁ cost {kids} > {own}/4");
        }
        Ok(())
    }

    /// Every prefix and suffix of a selected interval has non-negative gain
    /// against the X it was selected under.
    pub fn prefix_gains(line: &LineInstance, tree: &LaminarTree) -> Result<()> {
        for i in 1..tree.node_count() {
            let x = trace(tree, i)?;
            let iv = tree.interval(i);
            let signed = |e: usize| if x.contains(e) { line.edge_cost(e) } else { -line.edge_cost(e) };
            let mut run = 0;
            for e in iv.edges() {
                run += signed(e);
                ensure_invariant!(run >= 0, "node {i}: prefix ending at edge {e} has gain {run}");
            }
            run = 0;
            for e in iv.edges().rev() {
                run += signed(e);
                ensure_invariant!(run >= 0, "node {i}: suffix from edge {e} has gain {run}");
            }
        }
        Ok(())
    }

    /// Each interval was X-heavy when it was selected.
    pub fn selections_heavy(line: &LineInstance, tree: &LaminarTree) -> Result<()> {
        for i in 1..tree.node_count() {
            let x = trace(tree, i)?;
            let p = tree.interval_set(i);
            let (cin, cout) = (p.intersection(x).cost(line), p.difference(x).cost(line));
            ensure_invariant!(is_heavy(cin, cout), "node {i} was not X-heavy at selection");
        }
        Ok(())
    }

    pub fn cost_bound(line: &LineInstance, m1: &Matching) -> Result<()> {
        let c1 = cost(line, m1)?;
        let opt = line.optimal_edges().cost(line);
        ensure_invariant!(c1 <= 3 * opt, "c(M₁) = {c1} exceeds 3·c(O₁) = {}", 3 * opt);
        Ok(())
    }
}
