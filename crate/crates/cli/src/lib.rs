//! Command-line front end: generate instances, solve the first stage, reply
//! to arrivals, verify robustness and fuzz the invariant suite.
//!
//! Exit codes: 0 on success, 1 when verification fails, 2 on bad usage or
//! bad input.

pub mod files;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_rational::Ratio;
use rayon::prelude::*;

use robust_matching::harness::verify::fmt_ratio;
use robust_matching::harness::{
    fig3_default_costs, gen_fig1, gen_fig3, gen_random, run_invariant_suite, verify_two_stage, InvariantResult,
    Scenario,
};
use robust_matching::unknown::stage2::{unknown_stage2, Stage2Options};
use robust_matching::{build_robust_matching, cost, known_stage1, known_stage2, Error, Matching};

use files::{matching_of, tree_nodes, InstanceFile, Mode, ReplyReport, SolutionFile};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Coordinate range of the instances `fuzz` draws.
pub const FUZZ_RANGE: i64 = 10_000;

#[derive(Debug, Parser)]
#[command(name = "robust-matching", version, about = "Two-stage robust min-cost perfect matching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance to standard output.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Compute the first-stage matching.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Answer the arrivals of an instance, given its first-stage solution.
    Reply {
        instance: PathBuf,
        solution: PathBuf,
        /// Defaults to the mode recorded in the solution.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Check both cost factors against `alpha` and the deletions against `beta·k`.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long, value_parser = parse_ratio)]
        alpha: Ratio<i64>,
        #[arg(long, value_parser = parse_ratio)]
        beta: Ratio<i64>,
    },
    /// Run the invariant suite on random line instances.
    Fuzz {
        /// Inclusive seed range `S..T`.
        #[arg(long, value_parser = parse_seeds)]
        seeds: (u64, u64),
        #[arg(long)]
        pairs: usize,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum Family {
    /// `n` short pairs with one arrival beyond each end.
    Fig1 {
        #[arg(long)]
        n: usize,
        /// Rational in (0, 1), e.g. `1/4`.
        #[arg(long, value_parser = parse_ratio)]
        eps: Ratio<i64>,
    },
    /// Two scenarios on the same line; separations default to powers of 8β⁶.
    Fig3 {
        #[arg(long)]
        beta: i64,
        #[arg(long, value_enum)]
        scenario: Fig3Scenario,
        #[arg(long)]
        c1: Option<i64>,
        #[arg(long)]
        c2: Option<i64>,
        #[arg(long)]
        c3: Option<i64>,
    },
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        pairs: usize,
        #[arg(long)]
        range: i64,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fig3Scenario {
    A,
    B,
}

fn parse_ratio(s: &str) -> Result<Ratio<i64>, String> {
    let r: Ratio<i64> = s.trim().parse().map_err(|_| format!("`{s}` is not an integer or a fraction a/b"))?;
    if r < Ratio::from_integer(0) {
        return Err(format!("`{s}` is negative"));
    }
    Ok(r)
}

fn parse_seeds(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("`{s}` is not a range S..T"))?;
    let a: u64 = a.parse().map_err(|_| format!("bad start seed `{a}`"))?;
    let b: u64 = b.parse().map_err(|_| format!("bad end seed `{b}`"))?;
    if a > b {
        return Err(format!("empty seed range {s}"));
    }
    Ok((a, b))
}

/// Why a command stopped early.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or input files.
    Usage(String),
    /// The checked property does not hold.
    Verify(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Verify(_) => EXIT_FAIL,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant(_) => Failure::Verify(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

/// Runs one invocation; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let (Failure::Usage(msg) | Failure::Verify(msg)) = &f;
            let _ = writeln!(err, "error: {msg}");
            f.code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Generate { family } => emit(out, &generate(family)?),
        Command::Solve { instance, mode } => emit(out, &solve(&read_instance(&instance)?, mode)?),
        Command::Reply { instance, solution, mode } => {
            let inst = read_instance(&instance)?;
            let sol = read_solution(&solution)?;
            if mode.is_some_and(|m| m != sol.mode) {
                return Err(Failure::Usage(format!("solution was computed in {:?} mode", sol.mode)));
            }
            emit(out, &reply(&inst, &sol)?)
        }
        Command::Verify { instance, solution, alpha, beta } => {
            let report = verify(&read_instance(&instance)?, &read_solution(&solution)?, alpha, beta)?;
            emit(out, &report)?;
            Ok(if report.passed { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Fuzz { seeds, pairs, k } => {
            let summary = fuzz(seeds, pairs, k)?;
            out.write_all(summary.text.as_bytes()).map_err(io)?;
            Ok(if summary.ok() { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn emit<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> CmdResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    writeln!(out, "{text}").map_err(io)?;
    Ok(EXIT_PASS)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, Failure> {
    let inst: InstanceFile = serde_json::from_str(text).map_err(|e| Failure::Usage(format!("instance: {e}")))?;
    inst.validate()?;
    Ok(inst)
}

fn read_instance(path: &Path) -> Result<InstanceFile, Failure> {
    parse_instance(&read_text(path)?).map_err(|f| match f {
        Failure::Usage(m) => Failure::Usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn read_solution(path: &Path) -> Result<SolutionFile, Failure> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Failure::Usage(format!("{}: solution: {e}", path.display())))
}

pub fn generate(family: Family) -> Result<InstanceFile, Failure> {
    let (line, arrivals) = match family {
        Family::Fig1 { n, eps } => gen_fig1(n, *eps.numer(), *eps.denom())?,
        Family::Fig3 { beta, scenario, c1, c2, c3 } => {
            if beta < 1 {
                return Err(Failure::Usage("beta must be at least 1".into()));
            }
            let (d1, d2, d3) = fig3_default_costs(beta);
            let f = gen_fig3(beta, c1.unwrap_or(d1), c2.unwrap_or(d2), c3.unwrap_or(d3))?;
            let arr = match scenario {
                Fig3Scenario::A => f.scenario_a,
                Fig3Scenario::B => f.scenario_b,
            };
            (f.line, arr)
        }
        Family::Random { seed, pairs, range, k } => gen_random(seed, pairs, range, k)?,
    };
    Ok(InstanceFile::line(&line, Some(&arrivals)))
}

pub fn solve(inst: &InstanceFile, mode: Mode) -> Result<SolutionFile, Failure> {
    let mut sol = SolutionFile {
        instance_hash: inst.hash(),
        mode,
        m1: Vec::new(),
        m_bar: None,
        tree: None,
        m2: None,
        z: None,
        z_prime: None,
        report: None,
    };
    match mode {
        Mode::Known => {
            let k = inst.k_known.ok_or_else(|| Failure::Usage("known mode needs \"k_known\"".into()))?;
            let s1 = known_stage1(&inst.g1()?, k)?;
            sol.m1 = s1.m1.to_vec();
            sol.m_bar = Some(s1.m_bar.to_vec());
        }
        Mode::Unknown => {
            let s1 = build_robust_matching(&inst.line_instance()?)?;
            sol.m1 = s1.m1.to_vec();
            sol.tree = Some(tree_nodes(&s1.tree));
        }
    }
    Ok(sol)
}

fn check_hash(inst: &InstanceFile, sol: &SolutionFile) -> Result<(), Failure> {
    if inst.hash() != sol.instance_hash {
        return Err(Failure::Usage("solution was computed for a different instance".into()));
    }
    Ok(())
}

pub fn reply(inst: &InstanceFile, sol: &SolutionFile) -> Result<SolutionFile, Failure> {
    check_hash(inst, sol)?;
    let m1 = matching_of(&sol.m1)?;
    m1.check_perfect(inst.stage1_size())?;
    let mut out = SolutionFile { m2: None, z: None, z_prime: None, report: None, ..sol.clone() };
    match sol.mode {
        Mode::Known => {
            let m_bar = matching_of(sol.m_bar.as_deref().ok_or_else(|| Failure::Usage("solution lacks \"m_bar\"".into()))?)?;
            if !m_bar.pairs().all(|p| m1.contains(p)) {
                return Err(Failure::Usage("\"m_bar\" is not contained in \"m1\"".into()));
            }
            let (g1, g2) = (inst.g1()?, inst.g2()?);
            let arrivals = g2.n() - g1.n();
            let s2 = known_stage2(&g2, &m_bar, arrivals)?;
            out.report = Some(ReplyReport {
                k: arrivals / 2,
                cost_m1: cost(&g1, &m1)?,
                cost_o1: cost(&g1, &robust_matching::oracles::bruteforce_min_matching(&g1)?)?,
                cost_m2: cost(&g2, &s2.m2)?,
                cost_o2: cost(&g2, &s2.o2)?,
                recourse: m1.difference(&s2.m2).len(),
                requests: None,
                path_components: Some(s2.path_components),
            });
            out.m2 = Some(s2.m2.to_vec());
        }
        Mode::Unknown => {
            let line = inst.line_instance()?;
            let arrivals = inst.line_arrivals()?;
            // the reply needs the full first-stage trace, so rebuild it
            let s1 = build_robust_matching(&line)?;
            if s1.m1 != m1 || sol.tree.as_ref().is_some_and(|t| *t != tree_nodes(&s1.tree)) {
                return Err(Failure::Usage("solution does not match the first stage of this instance".into()));
            }
            let s2 = unknown_stage2(&line, &arrivals, &s1, Stage2Options::default())?;
            let ext = robust_matching::ExtendedLine::new(&line, &arrivals);
            out.report = Some(ReplyReport {
                k: arrivals.k(),
                cost_m1: cost(&line, &m1)?,
                cost_o1: line.optimal_edges().cost(&line),
                cost_m2: cost(&ext, &s2.m2)?,
                cost_o2: cost(&ext, &s2.o2)?,
                recourse: m1.difference(&s2.m2).len(),
                requests: Some(s2.requests.requests().iter().map(|r| (r.lo, r.hi)).collect()),
                path_components: None,
            });
            out.m2 = Some(s2.m2.to_vec());
            out.z = Some(s2.plan.z.iter().copied().collect());
            out.z_prime = Some(s2.plan.z_prime.iter().copied().collect());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct VerifyReport {
    pub instance_hash: String,
    pub alpha: String,
    pub beta: String,
    pub alpha_stage1: Option<String>,
    pub alpha_stage2: Option<String>,
    pub recourse: Option<usize>,
    pub k: usize,
    pub passed: bool,
    pub results: Vec<InvariantResult>,
}

/// A malformed matching is a verification failure, not a usage error.
pub fn verify(inst: &InstanceFile, sol: &SolutionFile, alpha: Ratio<i64>, beta: Ratio<i64>) -> Result<VerifyReport, Failure> {
    check_hash(inst, sol)?;
    let scenario = inst.scenario()?;
    let m2_pairs = sol.m2.as_deref().ok_or_else(|| Failure::Usage("solution lacks \"m2\"; run reply first".into()))?;
    let mut report = VerifyReport {
        instance_hash: sol.instance_hash.clone(),
        alpha: alpha.to_string(),
        beta: beta.to_string(),
        alpha_stage1: None,
        alpha_stage2: None,
        recourse: None,
        k: scenario.k(),
        passed: false,
        results: Vec::new(),
    };
    let checked = matching_of(&sol.m1)
        .and_then(|m1| Ok((m1, matching_of(m2_pairs)?)))
        .and_then(|(m1, m2)| verify_two_stage(&scenario, &m1, &m2, alpha, beta));
    match checked {
        Ok(v) => {
            report.alpha_stage1 = Some(fmt_ratio(v.alpha_stage1));
            report.alpha_stage2 = Some(fmt_ratio(v.alpha_stage2));
            report.recourse = Some(v.recourse);
            report.passed = v.passed();
            report.results = v.invariant_results;
        }
        Err(e) => report.results.push(InvariantResult::from_result("well_formed", Err(e))),
    }
    Ok(report)
}

pub struct FuzzSummary {
    pub rows: usize,
    pub passed: usize,
    pub negatives_failed: usize,
    pub negatives: usize,
    pub text: String,
}

impl FuzzSummary {
    pub fn ok(&self) -> bool {
        self.passed == self.rows && self.negatives_failed == self.negatives
    }
}

/// One suite run per seed on `gen_random(seed, pairs, FUZZ_RANGE, k)`, then
/// the checker self-test on the first seed: its rows must fail.
pub fn fuzz((from, to): (u64, u64), pairs: usize, k: usize) -> Result<FuzzSummary, Failure> {
    gen_random(from, pairs, FUZZ_RANGE, k)?;
    let rows: Vec<(u64, String, bool)> = (from..=to)
        .into_par_iter()
        .map(|seed| {
            let (line, arr) = gen_random(seed, pairs, FUZZ_RANGE, k).expect("parameters checked above");
            let r = run_invariant_suite(&line, &arr);
            let failed: Vec<&str> = r.failures().map(|f| f.name.as_str()).collect();
            let status = if failed.is_empty() { "pass".to_string() } else { format!("FAIL {}", failed.join(",")) };
            let row = format!(
                "{seed:<8}{:<8}{:<4}{:<14}{:<14}{:<10}{status}\n",
                line.len(),
                k,
                fmt_ratio(r.alpha_stage1),
                fmt_ratio(r.alpha_stage2),
                r.recourse,
            );
            (seed, row, failed.is_empty())
        })
        .collect();

    let mut text = format!("{:<8}{:<8}{:<4}{:<14}{:<14}{:<10}status\n", "seed", "n", "k", "alpha1", "alpha2", "recourse");
    for (_, row, _) in &rows {
        text.push_str(row);
    }
    let passed = rows.iter().filter(|r| r.2).count();

    let negatives = negative_controls(from, pairs, k)?;
    let mut negatives_failed = 0;
    for (name, rejected) in &negatives {
        let status = if *rejected { "FAIL (expected)" } else { "pass (checker broken)" };
        negatives_failed += usize::from(*rejected);
        text.push_str(&format!("negative {name:<24}{status}\n"));
    }
    text.push_str(&format!("{passed}/{} pass\n", rows.len()));
    Ok(FuzzSummary { rows: rows.len(), passed, negatives_failed, negatives: negatives.len(), text })
}

/// Corrupted outputs for seed `seed`; `true` means verification rejected them.
fn negative_controls(seed: u64, pairs: usize, k: usize) -> Result<Vec<(&'static str, bool)>, Failure> {
    let (line, arr) = gen_random(seed, pairs, FUZZ_RANGE, k)?;
    let s1 = build_robust_matching(&line)?;
    let s2 = unknown_stage2(&line, &arr, &s1, Stage2Options { improve: true, budget: false })?;
    let scenario = Scenario::Line { line, arrivals: arr };
    let rejected = |m1: &Matching, m2: &Matching, alpha: Ratio<i64>| {
        verify_two_stage(&scenario, m1, m2, alpha, Ratio::from_integer(2)).map_or(true, |v| !v.passed())
    };

    let mut missing = s2.m2.clone();
    if let Some(p) = s2.m2.pairs().next() {
        missing.remove(p);
    }
    let (c2, o2) = scenario.stage2_costs(&s2.m2)?;
    let (c1, o1) = scenario.stage1_costs(&s1.m1)?;
    // just below the achieved ratio of a stage with positive cost
    let tight = if o2 > 0 && c2 > 0 { Ratio::new(c2 - 1, o2) } else { Ratio::new(c1.max(1) - 1, o1.max(1)) };
    Ok(vec![
        ("missing-pair", rejected(&s1.m1, &missing, Ratio::from_integer(10))),
        ("tight-alpha", rejected(&s1.m1, &s2.m2, tight)),
    ])
}
