use num_rational::Ratio;
use serde::Serialize;

use crate::error::Result;
use crate::line::{ExtendedLine, LineArrivals, LineInstance};
use crate::matching::{cost, Matching};
use crate::metric::MetricInstance;
use crate::oracles::{bruteforce_min_matching, optimal_extended_line_matching};

/// A first-stage instance together with its arrivals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scenario {
    Line { line: LineInstance, arrivals: LineArrivals },
    /// `g2` extends `g1`; the first `g1.n()` vertices keep their indices.
    Metric { g1: MetricInstance, g2: MetricInstance },
}

impl Scenario {
    pub fn stage1_size(&self) -> usize {
        match self {
            Scenario::Line { line, .. } => line.len(),
            Scenario::Metric { g1, .. } => g1.n(),
        }
    }

    pub fn stage2_size(&self) -> usize {
        match self {
            Scenario::Line { line, arrivals } => line.len() + arrivals.coords().len(),
            Scenario::Metric { g2, .. } => g2.n(),
        }
    }

    pub fn k(&self) -> usize {
        (self.stage2_size() - self.stage1_size()) / 2
    }

    /// Costs of `m` and of an optimum in the first stage.
    pub fn stage1_costs(&self, m: &Matching) -> Result<(i64, i64)> {
        match self {
            Scenario::Line { line, .. } => Ok((cost(line, m)?, line.optimal_edges().cost(line))),
            Scenario::Metric { g1, .. } => Ok((cost(g1, m)?, cost(g1, &bruteforce_min_matching(g1)?)?)),
        }
    }

    pub fn stage2_costs(&self, m: &Matching) -> Result<(i64, i64)> {
        match self {
            Scenario::Line { line, arrivals } => {
                let ext = ExtendedLine::new(line, arrivals);
                Ok((cost(&ext, m)?, cost(&ext, &optimal_extended_line_matching(&ext))?))
            }
            Scenario::Metric { g2, .. } => Ok((cost(g2, m)?, cost(g2, &bruteforce_min_matching(g2)?)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl InvariantResult {
    pub fn from_result(name: &str, r: Result<()>) -> Self {
        match r {
            Ok(()) => Self { name: name.into(), status: Status::Pass, detail: String::new() },
            Err(e) => Self { name: name.into(), status: Status::Fail, detail: e.to_string() },
        }
    }

    pub fn check(name: &str, ok: bool, detail: String) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, detail }
    }

    pub fn skipped(name: &str, why: &str) -> Self {
        Self { name: name.into(), status: Status::Skipped, detail: why.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    /// `c(M₁)/c(O₁)`; `None` when the optimum is free but `M₁` is not.
    pub alpha_stage1: Option<Ratio<i64>>,
    pub alpha_stage2: Option<Ratio<i64>>,
    pub recourse: usize,
    pub k: usize,
    pub invariant_results: Vec<InvariantResult>,
    pub cycle_components_seen: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.invariant_results.iter().all(|r| r.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantResult> {
        self.invariant_results.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&InvariantResult> {
        self.invariant_results.iter().find(|r| r.name == name)
    }
}

/// `c/opt`, with `0/0` read as 1.
pub fn ratio(c: i64, opt: i64) -> Option<Ratio<i64>> {
    match (c, opt) {
        (0, 0) => Some(Ratio::from_integer(1)),
        (_, 0) => None,
        _ => Some(Ratio::new(c, opt)),
    }
}

/// `value ≤ bound·base`, exactly.
pub fn within(value: i64, bound: Ratio<i64>, base: i64) -> bool {
    i128::from(value) * i128::from(*bound.denom()) <= i128::from(*bound.numer()) * i128::from(base)
}

pub fn fmt_ratio(r: Option<Ratio<i64>>) -> String {
    r.map_or_else(|| "inf".to_string(), |r| r.to_string())
}

/// Checks both cost factors against `alpha` and the deletions against
/// `beta·k`. Fails outright if either matching is not perfect.
pub fn verify_two_stage(
    scenario: &Scenario,
    m1: &Matching,
    m2: &Matching,
    alpha: Ratio<i64>,
    beta: Ratio<i64>,
) -> Result<VerificationReport> {
    m1.check_perfect(scenario.stage1_size())?;
    m2.check_perfect(scenario.stage2_size())?;
    let (c1, o1) = scenario.stage1_costs(m1)?;
    let (c2, o2) = scenario.stage2_costs(m2)?;
    let k = scenario.k();
    let recourse = m1.difference(m2).len();
    let results = vec![
        InvariantResult::check(
            "stage1_alpha",
            within(c1, alpha, o1),
            format!("c(M₁) = {c1}, c(O₁) = {o1}, alpha = {alpha}"),
        ),
        InvariantResult::check(
            "stage2_alpha",
            within(c2, alpha, o2),
            format!("c(M₂) = {c2}, c(O₂) = {o2}, alpha = {alpha}"),
        ),
        InvariantResult::check(
            "recourse",
            within(recourse as i64, beta, k as i64),
            format!("|M₁ \\ M₂| = {recourse}, k = {k}, beta = {beta}"),
        ),
    ];
    Ok(VerificationReport {
        alpha_stage1: ratio(c1, o1),
        alpha_stage2: ratio(c2, o2),
        recourse,
        k,
        invariant_results: results,
        cycle_components_seen: 0,
    })
}
