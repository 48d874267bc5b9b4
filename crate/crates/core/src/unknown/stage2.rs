//! Second stage for an unknown number of arrivals on the line.
//!
//! The change between `O₁` and `O₂` on the stage-1 line is cut into
//! requests. Each request is charged to the smallest light interval that
//! contains it, which decides the first-stage pairs to delete. The exposed
//! vertices are then paired consecutively along the line.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{ensure_invariant, Error, Result};
use crate::line::{EdgeSubset, ExtendedLine, Interval, LineArrivals, LineInstance};
use crate::matching::{cost, Matching, Pair};
use crate::oracles::{consecutive_pairing, optimal_extended_line_matching};
use crate::unknown::budget::{self, BudgetContext, BudgetPartition};
use crate::unknown::stage1::{LaminarTree, UnknownStageOneResult};

/// Disjoint runs of stage-1 line edges, sorted by position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RequestSet {
    #[serde(skip)]
    edges: usize,
    requests: Vec<Interval>,
}

impl RequestSet {
    pub fn new(edges: usize, mut requests: Vec<Interval>) -> Result<Self> {
        for r in &requests {
            Interval::new(r.lo, r.hi, edges)?;
        }
        requests.sort();
        for w in requests.windows(2) {
            if w[0].intersects(&w[1]) {
                return Err(Error::NotDisjoint(w[1].lo));
            }
        }
        Ok(Self { edges, requests })
    }

    pub fn requests(&self) -> &[Interval] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn union(&self) -> EdgeSubset {
        let mut all = EdgeSubset::empty(self.edges);
        for &r in &self.requests {
            all.insert_interval(r);
        }
        all
    }
}

/// `O₂ ∩ L`: pairs of `O₂` joining two stage-1 points adjacent on the line.
pub fn line_part(ext: &ExtendedLine, o2: &Matching) -> EdgeSubset {
    let n = ext.stage1_len();
    let mut out = EdgeSubset::empty(n - 1);
    for Pair(a, b) in o2.pairs() {
        if b < n && b == a + 1 {
            out.insert(a);
        }
    }
    out
}

/// The maximal runs of `(O₁ Δ O₂) ∩ L`.
pub fn compute_requests(line: &LineInstance, arrivals: &LineArrivals) -> Result<RequestSet> {
    let ext = ExtendedLine::new(line, arrivals);
    let o2 = optimal_extended_line_matching(&ext);
    let changed = line.optimal_edges().symmetric_difference(&line_part(&ext, &o2));
    RequestSet::new(line.edge_count(), changed.runs())
}

/// Requests meeting a light interval must avoid it, contain it, or lie inside it.
pub fn check_light_laminarity(tree: &LaminarTree, reqs: &RequestSet) -> Result<()> {
    for i in tree.light_nodes().filter(|&i| i != 0) {
        let p = tree.interval(i);
        for r in reqs.requests() {
            ensure_invariant!(
                !r.intersects(&p) || r.contains(&p) || p.contains(r),
                "request {r:?} partially overlaps light node {i} {p:?}"
            );
        }
    }
    Ok(())
}

/// A heavy interval touched by requests has its first and last edge covered.
pub fn check_heavy_prefixes(tree: &LaminarTree, reqs: &RequestSet) -> Result<()> {
    let covered = reqs.union();
    for j in tree.heavy_nodes() {
        let p = tree.interval(j);
        if p.edges().any(|e| covered.contains(e)) {
            ensure_invariant!(
                covered.contains(p.lo) && covered.contains(p.hi),
                "heavy node {j} {p:?} is touched by requests but its ends are not covered"
            );
        }
    }
    Ok(())
}

fn first_partial_overlap(tree: &LaminarTree, reqs: &[Interval]) -> Option<(usize, usize)> {
    for i in tree.light_nodes().filter(|&i| i != 0) {
        let p = tree.interval(i);
        if let Some(r) =
            reqs.iter().position(|r| r.intersects(&p) && !r.contains(&p) && !p.contains(r))
        {
            return Some((r, i));
        }
    }
    None
}

/// One application of the heavy-prefix rule, if any heavy node needs it.
fn extend_toward_heavy_end(tree: &LaminarTree, reqs: &mut [Interval], edges: usize) -> bool {
    for j in tree.heavy_nodes() {
        let p = tree.interval(j);
        let mut covered = EdgeSubset::empty(edges);
        for &r in reqs.iter() {
            covered.insert_interval(r);
        }
        let Some(first) = p.edges().find(|&e| covered.contains(e)) else {
            continue;
        };
        if first > p.lo {
            let r = reqs.iter_mut().find(|r| r.lo == first).expect("a request starts the covered run");
            r.lo = p.lo;
            return true;
        }
        let last = p.edges().rev().find(|&e| covered.contains(e)).expect("some edge is covered");
        if last < p.hi {
            let r = reqs.iter_mut().find(|r| r.hi == last).expect("a request ends the covered run");
            r.hi = p.hi;
            return true;
        }
    }
    false
}

fn apply_rules(tree: &LaminarTree, mut reqs: Vec<Interval>, edges: usize) -> Result<Vec<Interval>> {
    let guard = 4 * edges * tree.node_count();
    let mut steps = 0usize;
    loop {
        let mut changed = false;
        while let Some((r, i)) = first_partial_overlap(tree, &reqs) {
            let p = tree.interval(i);
            let cur = reqs[r];
            reqs[r] = if cur.lo < p.lo {
                Interval { lo: cur.lo, hi: p.lo - 1 }
            } else {
                Interval { lo: p.hi + 1, hi: cur.hi }
            };
            changed = true;
            steps += 1;
            ensure_invariant!(steps <= guard, "request normalization exceeded {guard} steps");
        }
        while extend_toward_heavy_end(tree, &mut reqs, edges) {
            changed = true;
            steps += 1;
            ensure_invariant!(steps <= guard, "request normalization exceeded {guard} steps");
        }
        if !changed {
            return Ok(reqs);
        }
    }
}

/// Trims partial overlaps with light intervals and stretches requests to the
/// ends of the heavy intervals they touch, until neither rule applies.
pub fn normalize_requests(
    line: &LineInstance,
    tree: &LaminarTree,
    raw: &RequestSet,
) -> Result<RequestSet> {
    let edges = line.edge_count();
    ensure_invariant!(
        raw.edge_count() == edges && tree.edge_count() == edges,
        "requests, tree and line disagree on the edge count"
    );
    let o1 = line.optimal_edges();
    let o2_line_cost = o1.symmetric_difference(&raw.union()).cost(line);
    let reqs = apply_rules(tree, raw.requests().to_vec(), edges)?;
    let out = RequestSet::new(edges, reqs)?;
    check_light_laminarity(tree, &out)?;
    check_heavy_prefixes(tree, &out)?;
    ensure_invariant!(out.len() <= raw.len(), "normalization added requests");
    let o_prime = o1.symmetric_difference(&out.union()).cost(line);
    ensure_invariant!(
        o_prime <= o2_line_cost,
        "c(O') = {o_prime} exceeds c(O₂ ∩ L) = {o2_line_cost}"
    );
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gap {
    pub interval: Interval,
    /// The light node whose interval holds the gap.
    pub owner: usize,
    /// The child of `owner` containing the gap.
    pub child: usize,
    /// The first grandchild of `owner` meeting the gap.
    pub i_star: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    /// `i_R` per request, in request order.
    pub i_of: Vec<usize>,
    /// `j*_R` per request.
    pub j_star: Vec<usize>,
    /// Request indices grouped by their light node.
    pub groups: BTreeMap<usize, Vec<usize>>,
    pub gaps: Vec<Gap>,
}

pub fn assign_requests(tree: &LaminarTree, reqs: &RequestSet) -> Result<Assignment> {
    let light: Vec<usize> = tree.light_nodes().collect();
    let mut i_of = Vec::with_capacity(reqs.len());
    let mut j_star = Vec::with_capacity(reqs.len());
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (idx, r) in reqs.requests().iter().enumerate() {
        let i = *light
            .iter()
            .rev()
            .find(|&&i| tree.interval(i).contains(r))
            .expect("the root contains every request");
        let j = tree.children(i).iter().copied().filter(|&j| tree.interval(j).intersects(r)).min();
        let Some(j) = j else {
            return Err(Error::Invariant(format!(
                "request {r:?} assigned to node {i} meets none of its children"
            )));
        };
        i_of.push(i);
        j_star.push(j);
        groups.entry(i).or_default().push(idx);
    }

    let mut gaps = Vec::new();
    for (&i, members) in &groups {
        let mut rest = tree.interval_set(i);
        for &idx in members {
            rest.remove_interval(reqs.requests()[idx]);
        }
        let mut found = 0;
        for g in rest.runs() {
            let Some(child) = tree.children(i).iter().copied().find(|&j| tree.interval(j).contains(&g))
            else {
                continue;
            };
            let i_star = tree.grandchildren(i).into_iter().find(|&c| tree.interval(c).intersects(&g));
            let Some(i_star) = i_star else {
                return Err(Error::Invariant(format!(
                    "gap {g:?} of node {i} meets none of its grandchildren"
                )));
            };
            gaps.push(Gap { interval: g, owner: i, child, i_star });
            found += 1;
        }
        ensure_invariant!(
            found < members.len(),
            "node {i} has {found} gaps for {} requests",
            members.len()
        );
    }
    Ok(Assignment { i_of, j_star, groups, gaps })
}

pub fn compute_removal_set(assignment: &Assignment, k: usize) -> Result<BTreeSet<usize>> {
    let mut z: BTreeSet<usize> = assignment.groups.keys().copied().filter(|&i| i != 0).collect();
    z.extend(assignment.j_star.iter().copied());
    z.extend(assignment.gaps.iter().map(|g| g.i_star));
    ensure_invariant!(z.len() <= 2 * k, "|Z| = {} exceeds 2k = {}", z.len(), 2 * k);
    Ok(z)
}

/// `H̄`: heavy nodes kept by `Z` that have a child in `Z`.
pub fn kept_heavy_parents(z: &BTreeSet<usize>, tree: &LaminarTree) -> BTreeSet<usize> {
    tree.heavy_nodes()
        .filter(|j| !z.contains(j))
        .filter(|&j| tree.children(j).iter().any(|c| z.contains(c)))
        .collect()
}

/// Swaps the removed children of each node in `H̄` for the node itself.
pub fn improve_removal_set(z: &BTreeSet<usize>, tree: &LaminarTree) -> Result<BTreeSet<usize>> {
    let h_bar = kept_heavy_parents(z, tree);
    let dropped: BTreeSet<usize> =
        h_bar.iter().flat_map(|&j| tree.children(j).iter().copied()).collect();
    let out: BTreeSet<usize> = z.union(&h_bar).copied().filter(|i| !dropped.contains(i)).collect();
    ensure_invariant!(out.len() <= z.len(), "|Z'| = {} exceeds |Z| = {}", out.len(), z.len());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub m2: Matching,
    /// `U`, the exposed vertices after deleting, in merged order.
    pub exposed: Vec<usize>,
}

/// Deletes `e^(i)` for `i ∈ removed` from `m1` and pairs the exposed
/// vertices consecutively along the line.
pub fn stage2_reply(
    line: &LineInstance,
    arrivals: &LineArrivals,
    m1: &Matching,
    tree: &LaminarTree,
    removed: &BTreeSet<usize>,
) -> Result<Reply> {
    let ext = ExtendedLine::new(line, arrivals);
    m1.check_perfect(line.len())?;
    let mut kept = m1.clone();
    for &i in removed {
        ensure_invariant!(i != 0 && i < tree.node_count(), "node {i} has no first-stage pair");
        let e = tree.shortcut(i);
        ensure_invariant!(kept.remove(e), "pair {e:?} of node {i} is not in M₁");
    }
    let mut exposed: Vec<usize> = (0..ext.coords().len()).filter(|&v| !kept.covers(v)).collect();
    ext.sort_vertices(&mut exposed);
    let mut m2 = kept;
    for Pair(a, b) in consecutive_pairing(&exposed)?.pairs() {
        m2.insert(a, b)?;
    }
    m2.check_perfect(ext.coords().len())?;
    let recourse = m1.difference(&m2).len();
    ensure_invariant!(
        recourse <= 2 * arrivals.k(),
        "recourse {recourse} exceeds 2k = {}",
        2 * arrivals.k()
    );
    Ok(Reply { m2, exposed })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovalPlan {
    pub z: BTreeSet<usize>,
    pub z_prime: BTreeSet<usize>,
    pub h_bar: BTreeSet<usize>,
    pub exposed: Vec<usize>,
    pub budget: Option<BudgetPartition>,
}

impl RemovalPlan {
    /// The set whose pairs were actually deleted.
    pub fn applied(&self, improve: bool) -> &BTreeSet<usize> {
        if improve { &self.z_prime } else { &self.z }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stage2Options {
    /// Delete `Z′` instead of `Z`. Off gives the weaker factor 19.
    pub improve: bool,
    /// Compute the charging diagnostic and check its bounds.
    pub budget: bool,
}

impl Default for Stage2Options {
    fn default() -> Self {
        Self { improve: true, budget: true }
    }
}

impl Stage2Options {
    pub fn factor(&self) -> i64 {
        if self.improve { 10 } else { 19 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownStageTwoResult {
    pub m2: Matching,
    pub o2: Matching,
    pub raw_requests: RequestSet,
    pub requests: RequestSet,
    pub assignment: Assignment,
    pub plan: RemovalPlan,
}

pub fn unknown_stage2(
    line: &LineInstance,
    arrivals: &LineArrivals,
    stage1: &UnknownStageOneResult,
    opts: Stage2Options,
) -> Result<UnknownStageTwoResult> {
    let tree = &stage1.tree;
    ensure_invariant!(tree.edge_count() == line.edge_count(), "tree was built for another line");
    let k = arrivals.k();
    let raw = compute_requests(line, arrivals)?;
    ensure_invariant!(raw.len() <= k, "{} requests for k = {k}", raw.len());
    let requests = normalize_requests(line, tree, &raw)?;
    let assignment = assign_requests(tree, &requests)?;
    let z = compute_removal_set(&assignment, k)?;
    let h_bar = kept_heavy_parents(&z, tree);
    let z_prime = improve_removal_set(&z, tree)?;
    let removed = if opts.improve { &z_prime } else { &z };
    let reply = stage2_reply(line, arrivals, &stage1.m1, tree, removed)?;

    let ext = ExtendedLine::new(line, arrivals);
    let o2 = optimal_extended_line_matching(&ext);
    let (c_m2, c_o2) = (cost(&ext, &reply.m2)?, cost(&ext, &o2)?);
    let factor = opts.factor();
    ensure_invariant!(
        c_m2 <= factor * c_o2,
        "c(M₂) = {c_m2} exceeds {factor}·c(O₂) = {}",
        factor * c_o2
    );

    let budget = if opts.budget {
        let b = budget::compute_budget_partition(line, tree, &requests, &assignment, &z)?;
        let o2_line = line_part(&ext, &o2);
        let ctx = BudgetContext {
            line,
            tree,
            budget: &b,
            o2_line: &o2_line,
            z: &z,
            improve: opts.improve,
            z_prime: &z_prime,
            c_m2,
            c_o2,
        };
        ctx.check()?;
        Some(b)
    } else {
        None
    };
    let plan = RemovalPlan { z, z_prime, h_bar, exposed: reply.exposed, budget };
    Ok(UnknownStageTwoResult { m2: reply.m2, o2, raw_requests: raw, requests, assignment, plan })
}
