//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Costs are compared exactly; the only tolerances are wall-clock
//! limits.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use num_rational::Ratio;

use robust_matching::harness::{
    fig3_default_costs, gen_fig1, gen_fig3, gen_random, gen_random_metric, run_invariant_suite, run_known,
    verify_two_stage, Scenario, SplitMix64, Status, VerificationReport,
};
use robust_matching::harness::suite::swap_two_pairs;
use robust_matching::oracles::{bruteforce_min_matching, optimal_line_matching, MAX_DP_VERTICES};
use robust_matching::unknown::stage2::{unknown_stage2, Stage2Options};
use robust_matching::{
    build_robust_matching, cost, known_stage1, known_stage2, ExtendedLine, LineArrivals, LineInstance, Matching,
    MetricInstance,
};
use robust_matching_cli::files::{InstanceFile, Mode};
use robust_matching_cli::{generate, reply, solve, verify, Family};

const METRIC_INSTANCES: u64 = 200;
const METRIC_TIME: Duration = Duration::from_secs(60);
const LINE_INSTANCES: u64 = 300;
const LINE_TIME: Duration = Duration::from_secs(120);
const MAX_PAIRS: u64 = 100;
const MAX_K: u64 = 10;
const LINE_RANGE: i64 = 10_000;
const LEMMA1_INSTANCES: u64 = 500;

type Outcome = Result<String, String>;

macro_rules! require {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn int(v: i64) -> Ratio<i64> {
    Ratio::from_integer(v)
}

/// `c(O)` on sorted coordinates: consecutive pairing.
fn line_opt(coords: &[i64]) -> i64 {
    let mut c = coords.to_vec();
    c.sort_unstable();
    c.chunks(2).map(|p| p[1] - p[0]).sum()
}

fn removed(m1: &Matching, m2: &Matching) -> usize {
    m1.pairs().filter(|p| !m2.contains(*p)).count()
}

struct LineCase {
    seed: u64,
    line: LineInstance,
    arrivals: LineArrivals,
}

fn line_corpus() -> Vec<LineCase> {
    (1..=LINE_INSTANCES)
        .map(|seed| {
            let mut rng = SplitMix64::new(seed ^ 0x5eed_11e5);
            let pairs = 1 + rng.below(MAX_PAIRS) as usize;
            let k = 1 + rng.below(MAX_K) as usize;
            let (line, arrivals) = gen_random(seed, pairs, LINE_RANGE, k).expect("valid parameters");
            LineCase { seed, line, arrivals }
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut shapes = BTreeSet::new();
    for seed in 1..=METRIC_INSTANCES {
        let mut rng = SplitMix64::new(seed ^ 0x3e7_71c5);
        let k = 1 + rng.below(3) as usize;
        let max_n = (16).min(MAX_DP_VERTICES - 2 * k);
        let n = 2 * (1 + rng.below((max_n / 2) as u64) as usize);
        let (g1, g2) = gen_random_metric(seed, n, k, 100).map_err(|e| e.to_string())?;
        let (s1, s2) = run_known(&g1, &g2).map_err(|e| format!("seed {seed}: {e}"))?;
        s1.m1.check_perfect(n).map_err(|e| e.to_string())?;
        s2.m2.check_perfect(n + 2 * k).map_err(|e| e.to_string())?;
        let o1 = cost(&g1, &bruteforce_min_matching(&g1).unwrap()).unwrap();
        let o2 = cost(&g2, &bruteforce_min_matching(&g2).unwrap()).unwrap();
        let (c1, c2) = (cost(&g1, &s1.m1).unwrap(), cost(&g2, &s2.m2).unwrap());
        require!(c1 <= 3 * o1, "seed {seed}: c(M1) = {c1} > 3·{o1}");
        require!(c2 <= 3 * o2, "seed {seed}: c(M2) = {c2} > 3·{o2}");
        let r = removed(&s1.m1, &s2.m2);
        require!(r <= k, "seed {seed}: {r} deletions for k = {k}");
        shapes.insert((n, k));
    }
    let t = start.elapsed();
    require!(t < METRIC_TIME, "took {t:?}, limit {METRIC_TIME:?}");
    Ok(format!("{METRIC_INSTANCES} metrics, {} (n, k) shapes, {:.1}s", shapes.len(), t.as_secs_f64()))
}

/// Runs the suite on the whole corpus; criteria 2, 4 and 5 read from it.
fn run_corpus(corpus: &[LineCase]) -> (Vec<VerificationReport>, Duration) {
    let start = Instant::now();
    let reports = corpus.iter().map(|c| run_invariant_suite(&c.line, &c.arrivals)).collect();
    (reports, start.elapsed())
}

fn criterion_2(corpus: &[LineCase], reports: &[VerificationReport], suite_time: Duration) -> Outcome {
    let start = Instant::now();
    let mut worst = (Ratio::from_integer(0), Ratio::from_integer(0), Ratio::from_integer(0));
    for (c, report) in corpus.iter().zip(reports) {
        let (seed, k) = (c.seed, c.arrivals.k());
        let ext = ExtendedLine::new(&c.line, &c.arrivals);
        let o1 = line_opt(c.line.points());
        let o2 = line_opt(ext.coords());
        let s1 = build_robust_matching(&c.line).map_err(|e| format!("seed {seed}: {e}"))?;
        s1.m1.check_perfect(c.line.len()).map_err(|e| e.to_string())?;
        let c1 = cost(&c.line, &s1.m1).unwrap();
        require!(c1 <= 3 * o1, "seed {seed}: c(M1) = {c1} > 3·{o1}");
        for (improve, factor) in [(true, 10), (false, 19)] {
            let opts = Stage2Options { improve, budget: false };
            let s2 = unknown_stage2(&c.line, &c.arrivals, &s1, opts).map_err(|e| format!("seed {seed}: {e}"))?;
            s2.m2.check_perfect(ext.coords().len()).map_err(|e| e.to_string())?;
            let c2 = cost(&ext, &s2.m2).unwrap();
            require!(c2 <= factor * o2, "seed {seed}: c(M2) = {c2} > {factor}·{o2} (improve = {improve})");
            let r = removed(&s1.m1, &s2.m2);
            require!(r <= 2 * k, "seed {seed}: {r} deletions for 2k = {}", 2 * k);
            if improve && o1 > 0 && o2 > 0 {
                worst.0 = worst.0.max(Ratio::new(c1, o1));
                worst.1 = worst.1.max(Ratio::new(c2, o2));
                worst.2 = worst.2.max(Ratio::new(r as i64, k as i64));
            }
        }
        let entry = report.get("unknown_robust_10_2").map(|e| e.status);
        require!(entry == Some(Status::Pass), "seed {seed}: suite robustness entry is {entry:?}");
    }
    let t = start.elapsed() + suite_time;
    require!(t < LINE_TIME, "took {t:?}, limit {LINE_TIME:?}");
    Ok(format!(
        "{} lines, worst c(M1)/c(O1) = {}, c(M2)/c(O2) = {}, deletions/k = {}, {:.1}s",
        corpus.len(),
        worst.0,
        worst.1,
        worst.2,
        t.as_secs_f64()
    ))
}

fn criterion_3() -> Outcome {
    for seed in 1..=LEMMA1_INSTANCES {
        let pairs = 1 + (seed % 8) as usize;
        let (line, _) = gen_random(seed, pairs, 1000, 1).map_err(|e| e.to_string())?;
        let metric = MetricInstance::from_line_coords(line.points()).unwrap();
        let dp = cost(&metric, &bruteforce_min_matching(&metric).unwrap()).unwrap();
        let consecutive = cost(&line, &optimal_line_matching(line.points()).unwrap()).unwrap();
        require!(dp == consecutive, "seed {seed}: DP {dp} vs consecutive {consecutive}");
        require!(dp == line_opt(line.points()), "seed {seed}: DP {dp} differs from the even-gap sum");
    }
    Ok(format!("{LEMMA1_INSTANCES} lines with up to 16 points, exact equality"))
}

fn all_pass(reports: &[VerificationReport], corpus: &[LineCase], names: &[&str]) -> Result<usize, String> {
    let mut checked = 0;
    for (r, c) in reports.iter().zip(corpus) {
        for name in names {
            let e = r.get(name).ok_or_else(|| format!("seed {}: no entry {name}", c.seed))?;
            require!(e.status == Status::Pass, "seed {}: {name} is {:?}: {}", c.seed, e.status, e.detail);
            checked += 1;
        }
    }
    Ok(checked)
}

fn criterion_4(corpus: &[LineCase], reports: &[VerificationReport]) -> Outcome {
    let names = [
        "stage1_laminarity",
        "stage1_x_in_line",
        "stage1_heavy_light",
        "stage1_exp_decay",
        "stage1_opt_decay",
        "stage1_prefix_gains",
        "stage1_selections_heavy",
        "stage1_factor3",
    ];
    let n = all_pass(reports, corpus, &names)?;
    Ok(format!("{n} stage-1 checks on {} runs", corpus.len()))
}

fn criterion_5(corpus: &[LineCase], reports: &[VerificationReport]) -> Outcome {
    let names = [
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
    ];
    let n = all_pass(reports, corpus, &names)?;
    // sizes re-read straight from the algorithm output
    let (mut gaps, mut swaps) = (0, 0);
    for c in corpus {
        let k = c.arrivals.k();
        let s1 = build_robust_matching(&c.line).unwrap();
        let s2 = unknown_stage2(&c.line, &c.arrivals, &s1, Stage2Options::default()).map_err(|e| e.to_string())?;
        require!(s2.raw_requests.len() <= k, "seed {}: |R| = {} > k", c.seed, s2.raw_requests.len());
        require!(s2.requests.len() <= s2.raw_requests.len(), "seed {}: normalization added requests", c.seed);
        require!(s2.plan.z.len() <= 2 * k, "seed {}: |Z| = {} > 2k", c.seed, s2.plan.z.len());
        require!(s2.plan.z_prime.len() <= s2.plan.z.len(), "seed {}: |Z'| > |Z|", c.seed);
        gaps += s2.assignment.gaps.len();
        swaps += s2.plan.h_bar.len();
    }
    Ok(format!("{n} stage-2 checks, {gaps} gaps and {swaps} kept heavy parents exercised"))
}

fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap() + "\n"
}

fn criterion_6() -> Outcome {
    let (line, arr) = gen_fig1(3, 1, 4).map_err(|e| e.to_string())?;
    let ext = ExtendedLine::new(&line, &arr);
    let g1 = MetricInstance::from_line_coords(line.points()).unwrap();
    let g2 = MetricInstance::from_line_coords(ext.coords()).unwrap();
    let o1 = cost(&g1, &bruteforce_min_matching(&g1).unwrap()).unwrap();
    let o2 = cost(&g2, &bruteforce_min_matching(&g2).unwrap()).unwrap();
    require!((o1, o2) == (9, 4), "c(O1), c(O2) = {o1}, {o2}");
    let known = known_stage1(&g1, 1).unwrap();
    require!(cost(&g1, &known.m1).unwrap() == 13, "known M1 cost {}", cost(&g1, &known.m1).unwrap());
    let kr = known_stage2(&g2, &known.m_bar, 2).unwrap();
    require!(cost(&g2, &kr.m2).unwrap() == 4, "known M2 cost {}", cost(&g2, &kr.m2).unwrap());
    let s1 = build_robust_matching(&line).unwrap();
    require!(cost(&line, &s1.m1).unwrap() == 13, "unknown M1 cost {}", cost(&line, &s1.m1).unwrap());
    let s2 = unknown_stage2(&line, &arr, &s1, Stage2Options::default()).unwrap();
    require!(cost(&ext, &s2.m2).unwrap() == o2, "unknown reply cost {}", cost(&ext, &s2.m2).unwrap());
    require!(removed(&s1.m1, &s2.m2) == 1, "unknown reply deleted {}", removed(&s1.m1, &s2.m2));

    let inst = generate(Family::Fig1 { n: 3, eps: Ratio::new(1, 4) }).map_err(|e| format!("{e:?}"))?;
    require!(pretty(&inst) == golden("fig1.json"), "fig1 instance differs from its golden");
    for (mode, file) in [(Mode::Unknown, "fig1_unknown.json"), (Mode::Known, "fig1_known.json")] {
        let sol = solve(&inst, mode).and_then(|s| reply(&inst, &s)).map_err(|e| format!("{e:?}"))?;
        require!(pretty(&sol) == golden(file), "{file} differs from the computed solution");
    }
    Ok("c(O1) = 9, c(O2) = 4, M1 cost 13 both ways, reply = O2 after 1 deletion, goldens byte-equal".into())
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    for beta in [1i64, 2] {
        let (c1, c2, c3) = fig3_default_costs(beta);
        let f = gen_fig3(beta, c1, c2, c3).map_err(|e| e.to_string())?;
        let o1 = line_opt(f.line.points());
        let (b2, b3) = (beta * beta, beta * beta * beta);
        require!(o1 == (beta + 1) * c1 + (b3 + b2) * c3, "beta {beta}: c(O1) = {o1}");
        for (name, arr, expected) in [
            ("A", &f.scenario_a, (b3 + b2 + beta + 2) * c2),
            ("B", &f.scenario_b, (b3 + b2) * c3 + 2 * (beta + 1)),
        ] {
            let ext = ExtendedLine::new(&f.line, arr);
            let o2 = line_opt(ext.coords());
            require!(o2 == expected, "beta {beta} scenario {name}: c(O2) = {o2}, expected {expected}");
            let in_regime = if name == "A" { c2 <= o2 && o2 < c1 } else { o2 < c2 };
            require!(in_regime, "beta {beta} scenario {name}: c(O2) = {o2} outside its regime");
            let report = run_invariant_suite(&f.line, arr);
            let failed: Vec<_> = report.failures().map(|e| e.name.clone()).collect();
            require!(failed.is_empty(), "beta {beta} scenario {name}: failed {failed:?}");
            notes.push(format!("β={beta}{name}: {o2}"));
        }
    }
    Ok(format!("c(O2) = {}; suite passes on all four", notes.join(", ")))
}

fn criterion_8(corpus: &[LineCase], reports: &[VerificationReport]) -> Outcome {
    let n = all_pass(reports, corpus, &["negative_missing_pair", "negative_tight_alpha"])?;
    let (line, arr) = gen_fig1(3, 1, 4).unwrap();
    let scenario = Scenario::Line { line: line.clone(), arrivals: arr.clone() };
    let s1 = build_robust_matching(&line).unwrap();
    let s2 = unknown_stage2(&line, &arr, &s1, Stage2Options::default()).unwrap();
    let good = verify_two_stage(&scenario, &s1.m1, &s2.m2, int(10), int(2)).map_err(|e| e.to_string())?;
    require!(good.passed(), "the correct outputs were rejected");

    let tight = verify_two_stage(&scenario, &s1.m1, &s2.m2, Ratio::new(13, 9) - Ratio::new(1, 1000), int(2)).unwrap();
    require!(!tight.passed(), "alpha just below 13/9 was accepted");
    let swapped = swap_two_pairs(&s2.m2).unwrap();
    let sw = verify_two_stage(&scenario, &s1.m1, &swapped, int(1), int(2)).unwrap();
    require!(!sw.passed(), "a swapped reply passed at alpha 1");
    let mut short = s2.m2.clone();
    short.remove(s2.m2.pairs().next().unwrap());
    require!(verify_two_stage(&scenario, &s1.m1, &short, int(10), int(2)).is_err(), "imperfect reply accepted");
    // one deletion is one too many when beta = 0
    let strict = verify_two_stage(&scenario, &s1.m1, &s2.m2, int(10), int(0)).unwrap();
    require!(!strict.passed(), "a reply with a deletion passed at beta 0");

    // the same through the file layer
    let inst = InstanceFile::line(&line, Some(&arr));
    let mut sol = solve(&inst, Mode::Unknown).and_then(|s| reply(&inst, &s)).map_err(|e| format!("{e:?}"))?;
    sol.m1 = vec![(0, 1), (2, 5), (3, 4)];
    let v = verify(&inst, &sol, int(1), int(2)).map_err(|e| format!("{e:?}"))?;
    require!(!v.passed, "corrupted m1 passed");
    sol.m1 = vec![(0, 5), (1, 2)];
    let v = verify(&inst, &sol, int(10), int(2)).map_err(|e| format!("{e:?}"))?;
    require!(!v.passed, "imperfect m1 passed");
    let fuzz = robust_matching_cli::fuzz((1, 5), 6, 2).map_err(|e| format!("{e:?}"))?;
    require!(fuzz.ok() && fuzz.negatives_failed == fuzz.negatives, "fuzz controls did not fail");
    Ok(format!("{n} suite self-tests plus 7 fixed corruptions all rejected"))
}

fn report(id: u32, outcome: Outcome) -> bool {
    match outcome {
        Ok(msg) => {
            println!("criterion {id}: PASS  {msg}");
            true
        }
        Err(msg) => {
            println!("criterion {id}: FAIL  {msg}");
            false
        }
    }
}

fn main() {
    let corpus = line_corpus();
    let (reports, suite_time) = run_corpus(&corpus);
    let results = [
        report(1, criterion_1()),
        report(2, criterion_2(&corpus, &reports, suite_time)),
        report(3, criterion_3()),
        report(4, criterion_4(&corpus, &reports)),
        report(5, criterion_5(&corpus, &reports)),
        report(6, criterion_6()),
        report(7, criterion_7()),
        report(8, criterion_8(&corpus, &reports)),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
