use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robust-matching"))
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Runs and stores standard output in `dir/name`.
fn run_to(dir: &TempDir, name: &str, args: &[&str]) -> (PathBuf, Output) {
    let o = run(args);
    let path = dir.path().join(name);
    std::fs::write(&path, &o.stdout).unwrap();
    (path, o)
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generators_match_their_goldens() {
    let o = run(&["generate", "fig1", "--n", "3", "--eps", "1/4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), read(&golden("fig1.json")));
    let o = run(&["generate", "random", "--seed", "1", "--pairs", "5", "--range", "1000", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), read(&golden("random_seed1.json")));
}

#[test]
fn bad_generator_parameters_are_usage_errors() {
    for args in [
        &["generate", "fig1", "--n", "0", "--eps", "1/4"][..],
        &["generate", "fig1", "--n", "3", "--eps", "5/4"],
        &["generate", "random", "--seed", "1", "--pairs", "5", "--range", "3", "--k", "2"],
        &["generate", "fig3", "--beta", "1", "--scenario", "a", "--c1", "64", "--c2", "64", "--c3", "8"],
        &["generate", "plane"],
        &["fuzz", "--seeds", "5..1", "--pairs", "3", "--k", "1"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty());
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn fig1_pipelines_reproduce_their_goldens() {
    let dir = TempDir::new().unwrap();
    let inst = golden("fig1.json");
    for (mode, file, alpha, beta) in [("unknown", "fig1_unknown.json", "10", "2"), ("known", "fig1_known.json", "3", "1")] {
        let (sol, o) = run_to(&dir, "s1.json", &["solve", s(&inst), "--mode", mode]);
        assert_eq!(o.status.code(), Some(0));
        let (rep, o) = run_to(&dir, "s2.json", &["reply", s(&inst), s(&sol)]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(read(&rep), read(&golden(file)), "{mode}");
        let o = run(&["verify", s(&inst), s(&rep), "--alpha", alpha, "--beta", beta]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        // 13/9 at stage 1 exceeds any alpha below it
        let o = run(&["verify", s(&inst), s(&rep), "--alpha", "1", "--beta", beta]);
        assert_eq!(o.status.code(), Some(1));
        assert!(stdout(&o).contains("\"passed\": false"));
    }
}

#[test]
fn corrupted_solutions_fail_verification() {
    let dir = TempDir::new().unwrap();
    let inst = golden("fig1.json");
    let good = read(&golden("fig1_unknown.json"));
    let mut sol: serde_json::Value = serde_json::from_str(&good).unwrap();
    // two vertices swapped between pairs, then one pair dropped
    sol["m1"] = serde_json::json!([[0, 1], [2, 5], [3, 4]]);
    let p = dir.path().join("swap.json");
    std::fs::write(&p, sol.to_string()).unwrap();
    let o = run(&["verify", s(&inst), s(&p), "--alpha", "1", "--beta", "2"]);
    assert_eq!(o.status.code(), Some(1));
    sol["m1"] = serde_json::json!([[0, 5], [1, 2]]);
    std::fs::write(&p, sol.to_string()).unwrap();
    let o = run(&["verify", s(&inst), s(&p), "--alpha", "10", "--beta", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("well_formed"));
}

#[test]
fn mismatched_or_malformed_inputs_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let sol = golden("fig1_unknown.json");
    let other = golden("random_seed1.json");
    let o = run(&["reply", s(&other), s(&sol)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("different instance"));
    let o = run(&["verify", s(&other), s(&sol), "--alpha", "10", "--beta", "2"]);
    assert_eq!(o.status.code(), Some(2));

    let metric = dir.path().join("metric.json");
    std::fs::write(&metric, r#"{"kind":"metric","cost":[[0,1],[1,0]],"arrivals":[[1,2,0,1],[2,1,1,0]],"k_known":1}"#)
        .unwrap();
    let o = run(&["solve", s(&metric), "--mode", "unknown"]);
    assert_eq!(o.status.code(), Some(2));
    let (msol, o) = run_to(&dir, "m1.json", &["solve", s(&metric), "--mode", "known"]);
    assert_eq!(o.status.code(), Some(0));
    let (mrep, o) = run_to(&dir, "m2.json", &["reply", s(&metric), s(&msol)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["verify", s(&metric), s(&mrep), "--alpha", "3", "--beta", "1"]);
    assert_eq!(o.status.code(), Some(0));

    let no_arrivals = dir.path().join("noarr.json");
    std::fs::write(&no_arrivals, r#"{"kind":"line","points":[4,7,8,11,12,15]}"#).unwrap();
    let (nsol, _) = run_to(&dir, "n1.json", &["solve", s(&no_arrivals), "--mode", "unknown"]);
    let o = run(&["reply", s(&no_arrivals), s(&nsol)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve", s(&no_arrivals), "--mode", "known"]);
    assert_eq!(o.status.code(), Some(2));

    let float = dir.path().join("float.json");
    std::fs::write(&float, "{\"kind\": \"line\",\n \"points\": [0, 1.5]}").unwrap();
    let o = run(&["solve", s(&float), "--mode", "unknown"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = run(&["reply", s(&golden("fig1.json")), s(&sol), "--mode", "known"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_solution_reports_pairs_in_coordinates_of_the_hand_trace() {
    let text = read(&golden("fig1_unknown.json"));
    let sol: serde_json::Value = serde_json::from_str(&text).unwrap();
    let inst: serde_json::Value = serde_json::from_str(&read(&golden("fig1.json"))).unwrap();
    let mut coords: Vec<i64> = inst["points"].as_array().unwrap().iter().map(|v| v.as_i64().unwrap()).collect();
    coords.extend(inst["arrivals"].as_array().unwrap().iter().map(|v| v.as_i64().unwrap()));
    let at = |key: &str| -> Vec<(i64, i64)> {
        sol[key]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| (coords[p[0].as_u64().unwrap() as usize], coords[p[1].as_u64().unwrap() as usize]))
            .collect()
    };
    assert_eq!(at("m1"), vec![(4, 15), (7, 8), (11, 12)]);
    assert_eq!(at("m2"), vec![(4, 3), (7, 8), (11, 12), (15, 16)]);
}

#[test]
fn generated_instances_pass_the_pipeline() {
    let dir = TempDir::new().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["generate", "random", "--seed", "7", "--pairs", "30", "--range", "5000", "--k", "4"],
        vec!["generate", "random", "--seed", "8", "--pairs", "4", "--range", "100", "--k", "2"],
        vec!["generate", "fig3", "--beta", "1", "--scenario", "a"],
        vec!["generate", "fig3", "--beta", "1", "--scenario", "b"],
        vec!["generate", "fig1", "--n", "5", "--eps", "1/3"],
    ];
    for args in cases {
        let (inst, _) = run_to(&dir, "i.json", &args);
        let (sol, _) = run_to(&dir, "s1.json", &["solve", s(&inst), "--mode", "unknown"]);
        let (rep, o) = run_to(&dir, "s2.json", &["reply", s(&inst), s(&sol)]);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let o = run(&["verify", s(&inst), s(&rep), "--alpha", "10", "--beta", "2"]);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let n: serde_json::Value = serde_json::from_str(&read(&inst)).unwrap();
        let total = n["points"].as_array().unwrap().len() + n["arrivals"].as_array().unwrap().len();
        if total <= 20 {
            let (sol, _) = run_to(&dir, "k1.json", &["solve", s(&inst), "--mode", "known"]);
            let (rep, _) = run_to(&dir, "k2.json", &["reply", s(&inst), s(&sol)]);
            let o = run(&["verify", s(&inst), s(&rep), "--alpha", "3", "--beta", "1"]);
            assert_eq!(o.status.code(), Some(0), "{args:?}");
        }
    }
}

#[test]
fn fuzz_summary_is_stable_and_includes_failing_controls() {
    let args = ["fuzz", "--seeds", "1..12", "--pairs", "6", "--k", "2"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.ends_with("12/12 pass\n"));
    assert_eq!(text.matches("FAIL (expected)").count(), 2);
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("generate"));
}
