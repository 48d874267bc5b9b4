//! Charging diagnostic for the second stage.
//!
//! Every stage-1 line edge lands in exactly one of the parts `A(R)`,
//! `B(R̄)` or the rest `C`, and gets a weight: a third on `A ∪ B`, one on
//! the part of `C` used by `O′ = O₁ Δ ⋃R`, zero otherwise. Weights are kept
//! multiplied by 3 so everything stays integral.

use std::collections::BTreeSet;

use crate::error::{ensure_invariant, Result};
use crate::line::{EdgeSubset, LineInstance};
use crate::unknown::stage1::LaminarTree;
use crate::unknown::stage2::{Assignment, RequestSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetPartition {
    /// `A(R)` per request.
    pub a: Vec<EdgeSubset>,
    /// `B(R̄)` per gap.
    pub b: Vec<EdgeSubset>,
    pub c: EdgeSubset,
    /// `O′ = O₁ Δ ⋃R` over the normalized requests.
    pub o_prime: EdgeSubset,
    /// `3·x(e)` per line edge, in `{0, 1, 3}`.
    pub x3: Vec<u8>,
}

impl BudgetPartition {
    /// `3·Σ_{e∈P} c(e)x(e)` over the edges of node `i`'s interval.
    pub fn weight3_in(&self, line: &LineInstance, tree: &LaminarTree, i: usize) -> i64 {
        tree.interval(i).edges().map(|e| line.edge_cost(e) * i64::from(self.x3[e])).sum()
    }

    pub fn weight3(&self, line: &LineInstance) -> i64 {
        (0..self.x3.len()).map(|e| line.edge_cost(e) * i64::from(self.x3[e])).sum()
    }
}

pub fn compute_budget_partition(
    line: &LineInstance,
    tree: &LaminarTree,
    reqs: &RequestSet,
    assignment: &Assignment,
    z: &BTreeSet<usize>,
) -> Result<BudgetPartition> {
    let m = line.edge_count();
    let a: Vec<EdgeSubset> = reqs
        .requests()
        .iter()
        .zip(&assignment.j_star)
        .map(|(&r, &j)| EdgeSubset::from_interval(r, m).difference(&tree.interval_set(j)))
        .collect();
    let b: Vec<EdgeSubset> = assignment
        .gaps
        .iter()
        .map(|g| {
            let mut part = EdgeSubset::from_interval(g.interval, m);
            for i in tree.grandchildren(g.owner).into_iter().filter(|i| z.contains(i)) {
                part.remove_interval(tree.interval(i));
            }
            part
        })
        .collect();

    let mut hits = vec![0usize; m];
    for part in a.iter().chain(&b) {
        part.iter().for_each(|e| hits[e] += 1);
    }
    if let Some(e) = hits.iter().position(|&h| h > 1) {
        ensure_invariant!(false, "edge {e} lies in {} charging parts", hits[e]);
    }
    let c = EdgeSubset::from_edges(m, (0..m).filter(|&e| hits[e] == 0))?;
    let o_prime = line.optimal_edges().symmetric_difference(&reqs.union());
    let x3 = (0..m)
        .map(|e| match (hits[e], o_prime.contains(e)) {
            (1, _) => 1,
            (_, true) => 3,
            _ => 0,
        })
        .collect();
    Ok(BudgetPartition { a, b, c, o_prime, x3 })
}

/// `Ȳ` for a removal set: surviving non-root nodes all of whose inner
/// ancestors were removed.
pub fn top_survivors(tree: &LaminarTree, removed: &BTreeSet<usize>) -> Vec<usize> {
    (1..tree.node_count())
        .filter(|i| !removed.contains(i))
        .filter(|&i| tree.inner_ancestors(i).iter().all(|a| removed.contains(a)))
        .collect()
}

/// Inputs shared by the individual bound checks.
pub struct BudgetContext<'a> {
    pub line: &'a LineInstance,
    pub tree: &'a LaminarTree,
    pub budget: &'a BudgetPartition,
    /// `O₂ ∩ L`, from the raw requests.
    pub o2_line: &'a EdgeSubset,
    pub z: &'a BTreeSet<usize>,
    pub improve: bool,
    pub z_prime: &'a BTreeSet<usize>,
    pub c_m2: i64,
    pub c_o2: i64,
}

impl BudgetContext<'_> {
    pub fn a_parts(&self) -> Result<()> {
        for (r, part) in self.budget.a.iter().enumerate() {
            let (all, used) = (part.cost(self.line), part.intersection(&self.budget.o_prime).cost(self.line));
            ensure_invariant!(all <= 3 * used, "request {r}: c(A) = {all} > 3·c(O′ ∩ A) = {}", 3 * used);
        }
        Ok(())
    }

    pub fn b_parts(&self) -> Result<()> {
        for (g, part) in self.budget.b.iter().enumerate() {
            let (all, used) = (part.cost(self.line), part.intersection(&self.budget.o_prime).cost(self.line));
            ensure_invariant!(all <= 3 * used, "gap {g}: c(B) = {all} > 3·c(O′ ∩ B) = {}", 3 * used);
        }
        Ok(())
    }

    pub fn partition(&self) -> Result<()> {
        let m = self.line.edge_count();
        let mut hits = vec![0usize; m];
        for part in self.budget.a.iter().chain(&self.budget.b).chain(std::iter::once(&self.budget.c)) {
            part.iter().for_each(|e| hits[e] += 1);
        }
        if let Some(e) = hits.iter().position(|&h| h != 1) {
            ensure_invariant!(false, "edge {e} lies in {} parts of A, B, C", hits[e]);
        }
        Ok(())
    }

    pub fn x_bounded(&self) -> Result<()> {
        let w3 = self.budget.weight3(self.line);
        let o_prime = self.budget.o_prime.cost(self.line);
        let o2_line = self.o2_line.cost(self.line);
        ensure_invariant!(w3 <= 3 * o_prime, "3·Σc·x = {w3} > 3·c(O′) = {}", 3 * o_prime);
        ensure_invariant!(o_prime <= o2_line, "c(O′) = {o_prime} > c(O₂ ∩ L) = {o2_line}");
        Ok(())
    }

    /// Per-node bounds on `Ȳ` computed from `Z`.
    pub fn survivor_bounds(&self) -> Result<()> {
        for i in top_survivors(self.tree, self.z) {
            let own = self.line.interval_cost(self.tree.interval(i));
            let w3 = self.budget.weight3_in(self.line, self.tree, i);
            if !self.tree.is_heavy(i) {
                ensure_invariant!(own <= w3, "light node {i}: c(P) = {own} > 3·Σc·x = {w3}");
            } else if self.tree.children(i).iter().any(|c| self.z.contains(c)) {
                ensure_invariant!(own <= 2 * w3, "heavy node {i}: c(P) = {own} > 6·Σc·x = {}", 2 * w3);
            } else {
                ensure_invariant!(own <= w3, "heavy node {i} without removed children: c(P) = {own} > 3·Σc·x = {w3}");
            }
        }
        Ok(())
    }

    fn applied(&self) -> &BTreeSet<usize> {
        if self.improve { self.z_prime } else { self.z }
    }

    /// Total cost of the surviving maximal intervals against `O′`.
    pub fn survivor_total(&self) -> Result<()> {
        let total: i64 = top_survivors(self.tree, self.applied())
            .into_iter()
            .map(|i| self.line.interval_cost(self.tree.interval(i)))
            .sum();
        let factor = if self.improve { 3 } else { 6 };
        let o_prime = self.budget.o_prime.cost(self.line);
        ensure_invariant!(
            total <= factor * o_prime,
            "surviving intervals cost {total} > {factor}·c(O′) = {}",
            factor * o_prime
        );
        Ok(())
    }

    /// `c(M₂) ≤ c(O₂) + 3·Σ c(P^(i))` over the surviving maximal intervals.
    pub fn reply_against_survivors(&self) -> Result<()> {
        let total: i64 = top_survivors(self.tree, self.applied())
            .into_iter()
            .map(|i| self.line.interval_cost(self.tree.interval(i)))
            .sum();
        ensure_invariant!(
            self.c_m2 <= self.c_o2 + 3 * total,
            "c(M₂) = {} > c(O₂) + 3·{total} = {}",
            self.c_m2,
            self.c_o2 + 3 * total
        );
        Ok(())
    }

    /// Every check by name, in a fixed order.
    pub fn all(&self) -> Vec<(&'static str, Result<()>)> {
        vec![
            ("budget_partition", self.partition()),
            ("budget_a_parts", self.a_parts()),
            ("budget_b_parts", self.b_parts()),
            ("budget_x_bounded", self.x_bounded()),
            ("budget_survivor_bounds", self.survivor_bounds()),
            ("budget_survivor_total", self.survivor_total()),
            ("budget_reply_vs_survivors", self.reply_against_survivors()),
        ]
    }

    pub fn check(&self) -> Result<()> {
        self.all().into_iter().try_for_each(|(_, r)| r)
    }
}
