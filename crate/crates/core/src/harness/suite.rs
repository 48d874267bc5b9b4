//! Runs every strategy on one scenario and records each checked property.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::harness::verify::{
    verify_two_stage, InvariantResult, Scenario, Status, VerificationReport,
};
use crate::known_k::{known_stage1, known_stage2, KnownStageOneResult, KnownStageTwoResult};
use crate::line::{ExtendedLine, LineArrivals, LineInstance};
use crate::matching::{cost, Matching, Pair};
use crate::metric::MetricInstance;
use crate::oracles::{optimal_extended_line_matching, MAX_DP_VERTICES};
use crate::unknown::budget::{compute_budget_partition, BudgetContext};
use crate::unknown::stage1::{build_robust_matching, checks};
use crate::unknown::stage2::{
    check_heavy_prefixes, check_light_laminarity, line_part, unknown_stage2, Stage2Options,
};

/// Every entry of a suite report, in report order.
pub const REGISTERED: &[&str] = &[
    "stage1_laminarity",
    "stage1_x_in_line",
    "stage1_heavy_light",
    "stage1_exp_decay",
    "stage1_opt_decay",
    "stage1_prefix_gains",
    "stage1_selections_heavy",
    "stage1_factor3",
    "stage2_pipeline",
    "stage2_request_count",
    "stage2_light_laminarity",
    "stage2_heavy_prefixes",
    "stage2_removal_bound",
    "stage2_improved_not_larger",
    "budget_partition",
    "budget_a_parts",
    "budget_b_parts",
    "budget_x_bounded",
    "budget_survivor_bounds",
    "budget_survivor_total",
    "budget_reply_vs_survivors",
    "stage2_factor19_unimproved",
    "unknown_robust_10_2",
    "known_robust_3_1",
    "negative_missing_pair",
    "negative_tight_alpha",
];

struct Entries(Vec<InvariantResult>);

impl Entries {
    fn result(&mut self, name: &str, r: Result<()>) {
        self.0.push(InvariantResult::from_result(name, r));
    }

    fn skip_rest(&mut self, why: &str) {
        for name in REGISTERED {
            if self.0.iter().all(|e| e.name != *name) {
                self.0.push(InvariantResult::skipped(name, why));
            }
        }
    }

    fn finish(mut self) -> Vec<InvariantResult> {
        self.skip_rest("not reached");
        let order = |n: &str| REGISTERED.iter().position(|r| *r == n).unwrap_or(usize::MAX);
        self.0.sort_by_key(|e| order(&e.name));
        self.0
    }
}

fn int(v: i64) -> Ratio<i64> {
    Ratio::from_integer(v)
}

/// Known-k strategy on a metric scenario, both stages.
pub fn run_known(
    g1: &MetricInstance,
    g2: &MetricInstance,
) -> Result<(KnownStageOneResult, KnownStageTwoResult)> {
    let arrivals = g2.n().checked_sub(g1.n()).ok_or(Error::BadArrivals(0))?;
    let s1 = known_stage1(g1, arrivals / 2)?;
    let s2 = known_stage2(g2, &s1.m_bar, arrivals)?;
    Ok((s1, s2))
}

/// Drops one pair of `m`; verification must reject the result.
pub fn negative_missing_pair(scenario: &Scenario, m1: &Matching, m2: &Matching) -> Result<()> {
    let mut broken = m2.clone();
    let first = broken.pairs().next().ok_or(Error::NotPerfect(0))?;
    broken.remove(first);
    match verify_two_stage(scenario, m1, &broken, int(1_000_000), int(1_000_000)) {
        Err(Error::NotPerfect(_)) => Ok(()),
        other => Err(Error::Invariant(format!("imperfect reply was not rejected: {other:?}"))),
    }
}

/// Sets alpha just below the achieved ratio of a stage with positive cost;
/// verification must report a failure.
pub fn negative_tight_alpha(scenario: &Scenario, m1: &Matching, m2: &Matching) -> Result<()> {
    let (c1, o1) = scenario.stage1_costs(m1)?;
    let (c2, o2) = scenario.stage2_costs(m2)?;
    let alpha = if c2 > 0 && o2 > 0 {
        Ratio::new(c2 - 1, o2)
    } else if c1 > 0 && o1 > 0 {
        Ratio::new(c1 - 1, o1)
    } else {
        // nothing to undercut: both stages are free
        return Ok(());
    };
    let report = verify_two_stage(scenario, m1, m2, alpha, int(1_000_000))?;
    if report.passed() {
        return Err(Error::Invariant(format!("alpha = {alpha} was accepted")));
    }
    Ok(())
}

/// All strategies and checks on a line scenario. Failures become report
/// entries; nothing here returns early with an error.
pub fn run_invariant_suite(line: &LineInstance, arrivals: &LineArrivals) -> VerificationReport {
    let scenario = Scenario::Line { line: line.clone(), arrivals: arrivals.clone() };
    let k = arrivals.k();
    let mut e = Entries(Vec::new());
    let mut report = VerificationReport {
        alpha_stage1: None,
        alpha_stage2: None,
        recourse: 0,
        k,
        invariant_results: Vec::new(),
        cycle_components_seen: 0,
    };

    let s1 = match build_robust_matching(line) {
        Ok(s1) => s1,
        Err(err) => {
            e.result("stage1_laminarity", Err(err));
            e.skip_rest("first stage failed");
            report.invariant_results = e.finish();
            return report;
        }
    };
    let tree = &s1.tree;
    e.result("stage1_laminarity", checks::laminarity(tree));
    e.result("stage1_x_in_line", checks::x_within_line(tree));
    e.result("stage1_heavy_light", checks::heavy_light(line, tree));
    e.result("stage1_exp_decay", checks::exp_decay(line, tree));
    e.result("stage1_opt_decay", checks::opt_decay(line, tree));
    e.result("stage1_prefix_gains", checks::prefix_gains(line, tree));
    e.result("stage1_selections_heavy", checks::selections_heavy(line, tree));
    e.result("stage1_factor3", checks::cost_bound(line, &s1.m1));

    let plain = Stage2Options { improve: true, budget: false };
    match unknown_stage2(line, arrivals, &s1, plain) {
        Err(err) => {
            e.result("stage2_pipeline", Err(err));
        }
        Ok(s2) => {
            e.result("stage2_pipeline", Ok(()));
            e.0.push(InvariantResult::check(
                "stage2_request_count",
                s2.raw_requests.len() <= k,
                format!("{} requests, k = {k}", s2.raw_requests.len()),
            ));
            e.result("stage2_light_laminarity", check_light_laminarity(tree, &s2.requests));
            e.result("stage2_heavy_prefixes", check_heavy_prefixes(tree, &s2.requests));
            let (z, zp) = (&s2.plan.z, &s2.plan.z_prime);
            e.0.push(InvariantResult::check(
                "stage2_removal_bound",
                z.len() <= 2 * k,
                format!("|Z| = {}, 2k = {}", z.len(), 2 * k),
            ));
            e.0.push(InvariantResult::check(
                "stage2_improved_not_larger",
                zp.len() <= z.len(),
                format!("|Z'| = {}, |Z| = {}", zp.len(), z.len()),
            ));

            let ext = ExtendedLine::new(line, arrivals);
            let o2 = optimal_extended_line_matching(&ext);
            let costs = cost(&ext, &s2.m2).and_then(|c| Ok((c, cost(&ext, &o2)?)));
            let budget =
                compute_budget_partition(line, tree, &s2.requests, &s2.assignment, z);
            match (budget, costs) {
                (Ok(b), Ok((c_m2, c_o2))) => {
                    let o2_line = line_part(&ext, &o2);
                    let ctx = BudgetContext {
                        line,
                        tree,
                        budget: &b,
                        o2_line: &o2_line,
                        z,
                        improve: true,
                        z_prime: zp,
                        c_m2,
                        c_o2,
                    };
                    for (name, r) in ctx.all() {
                        e.result(name, r);
                    }
                }
                (Err(err), _) | (_, Err(err)) => e.result("budget_partition", Err(err)),
            }

            let weak = Stage2Options { improve: false, budget: false };
            e.result(
                "stage2_factor19_unimproved",
                unknown_stage2(line, arrivals, &s1, weak).map(|_| ()),
            );

            match verify_two_stage(&scenario, &s1.m1, &s2.m2, int(10), int(2)) {
                Ok(v) => {
                    let failed: Vec<String> = v.failures().map(|f| f.detail.clone()).collect();
                    e.0.push(InvariantResult::check(
                        "unknown_robust_10_2",
                        failed.is_empty(),
                        failed.join("; "),
                    ));
                    report.alpha_stage1 = v.alpha_stage1;
                    report.alpha_stage2 = v.alpha_stage2;
                    report.recourse = v.recourse;
                }
                Err(err) => e.result("unknown_robust_10_2", Err(err)),
            }
            e.result("negative_missing_pair", negative_missing_pair(&scenario, &s1.m1, &s2.m2));
            e.result("negative_tight_alpha", negative_tight_alpha(&scenario, &s1.m1, &s2.m2));
        }
    }

    let total = line.len() + arrivals.coords().len();
    if total > MAX_DP_VERTICES {
        e.0.push(InvariantResult::skipped(
            "known_robust_3_1",
            &format!("{total} vertices exceed the exact oracle limit {MAX_DP_VERTICES}"),
        ));
    } else {
        let ext = ExtendedLine::new(line, arrivals);
        let known = MetricInstance::from_line_coords(line.points()).and_then(|g1| {
            let g2 = MetricInstance::from_line_coords(ext.coords())?;
            let (s1, s2) = run_known(&g1, &g2)?;
            let v = verify_two_stage(&Scenario::Metric { g1, g2 }, &s1.m1, &s2.m2, int(3), int(1))?;
            Ok((s2.cycle_components, v))
        });
        match known {
            Ok((cycles, v)) => {
                report.cycle_components_seen = cycles;
                let failed: Vec<String> = v.failures().map(|f| f.detail.clone()).collect();
                e.0.push(InvariantResult::check("known_robust_3_1", failed.is_empty(), failed.join("; ")));
            }
            Err(err) => e.result("known_robust_3_1", Err(err)),
        }
    }

    report.invariant_results = e.finish();
    report
}

/// Swaps partners between the first two pairs of `m`.
pub fn swap_two_pairs(m: &Matching) -> Option<Matching> {
    let mut pairs = m.pairs();
    let (Pair(a, b), Pair(c, d)) = (pairs.next()?, pairs.next()?);
    let mut out = m.clone();
    out.remove(Pair(a, b));
    out.remove(Pair(c, d));
    out.insert(a, d).ok()?;
    out.insert(c, b).ok()?;
    Some(out)
}

/// Counts of each status in a report.
pub fn tally(report: &VerificationReport) -> (usize, usize, usize) {
    let count = |s: Status| report.invariant_results.iter().filter(|r| r.status == s).count();
    (count(Status::Pass), count(Status::Fail), count(Status::Skipped))
}
