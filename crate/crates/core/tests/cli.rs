use std::path::{Path, PathBuf};
use std::process::Command;

use compartmental::cli::run;

struct Fixtures {
    dir: tempfile::TempDir,
}

impl Fixtures {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let files = [
            ("m3.json", r#"{"n": 4, "edges": [[1,2],[2,3],[3,4]], "input": 1, "output": 4, "leaks": [3]}"#),
            ("m4.json", r#"{"n": 4, "edges": [[4,3],[1,2],[2,3],[3,4]], "input": 1, "output": 4, "leaks": []}"#),
            ("m2leak.json", r#"{"n": 4, "edges": [[1,2],[2,3],[3,4]], "input": 1, "output": 4, "leaks": [2]}"#),
            ("m4leak.json", r#"{"n": 4, "edges": [[1,2],[2,3],[3,4]], "input": 1, "output": 4, "leaks": [4]}"#),
            ("loop.json", r#"{"n": 2, "edges": [[1,1],[1,2]], "input": 1, "output": 2, "leaks": [3]}"#),
            ("decay.json", r#"{"n": 1, "edges": [], "input": 1, "output": 1, "leaks": [1]}"#),
            ("broken.json", r#"{"n": 4, "edges": "#),
        ];
        for (name, text) in files {
            std::fs::write(dir.path().join(name), text).unwrap();
        }
        Fixtures { dir }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }
}

fn cli(args: &[&str]) -> compartmental::cli::CliOutput {
    run(std::iter::once("compartmental").chain(args.iter().copied()))
}

#[test]
fn ioeq_prints_running_example() {
    let fx = Fixtures::new();
    let out = cli(&["ioeq", &fx.path("m3.json")]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout,
        "y^(4) + (a_{43} + a_{32} + a_{21} + a_{03}) y^(3) \
         + (a_{32}*a_{43} + a_{21}*a_{43} + a_{21}*a_{32} + a_{03}*a_{32} + a_{03}*a_{21}) y^(2) \
         + (a_{21}*a_{32}*a_{43} + a_{03}*a_{21}*a_{32}) y^(1) = (a_{21}*a_{32}*a_{43}) u\n"
    );

    let json = cli(&["ioeq", &fx.path("m3.json"), "--format", "json"]);
    let value: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(value["c"].as_array().unwrap().len(), 4);
    assert_eq!(value["c"][1], "a_{21}*a_{32}*a_{43} + a_{03}*a_{21}*a_{32}");
    assert_eq!(value["d"][0], "a_{21}*a_{32}*a_{43}");
}

#[test]
fn indist_reports_map_or_witness() {
    let fx = Fixtures::new();
    let out = cli(&["indist", &fx.path("m3.json"), &fx.path("m4.json")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.lines().any(|l| l == "a_{03} -> a_{34}"));
    assert_eq!(out.stdout.lines().count(), 4);

    let out = cli(&["indist", &fx.path("m2leak.json"), &fx.path("m4leak.json")]);
    assert_eq!(out.code, 1);
    assert_eq!(out.stdout, "DISTINGUISHABLE\nwitness: c_0\n");

    let out = cli(&["indist", &fx.path("m2leak.json"), &fx.path("m4leak.json"), "--format", "json"]);
    assert_eq!(out.code, 1);
    assert_eq!(out.stdout, "{\"indistinguishable\":false,\"witness\":\"c_0\"}\n");

    let out = cli(&["indist", &fx.path("m3.json"), &fx.path("m4.json"), "--max-params", "2"]);
    assert_eq!(out.code, 2);
}

#[test]
fn validate_lists_violations() {
    let fx = Fixtures::new();
    assert_eq!(cli(&["validate", &fx.path("m3.json")]).stdout, "valid\n");
    let out = cli(&["validate", &fx.path("loop.json")]);
    assert_eq!(out.code, 1);
    assert_eq!(out.stdout, "self-loop at compartment 1\nleak 3 outside 1..n\n");
}

#[test]
fn forests_one_per_line() {
    let fx = Fixtures::new();
    let out = cli(&["forests", &fx.path("m3.json"), "--k", "3"]);
    assert_eq!(out.stdout, "a_{03},a_{21},a_{32}\na_{21},a_{32},a_{43}\n");
    let out = cli(&["forests", &fx.path("m3.json"), "--k", "3", "--star", "--from", "1", "--to", "4"]);
    assert_eq!(out.stdout, "a_{21},a_{32},a_{43}\n");
    assert_eq!(cli(&["forests", &fx.path("m3.json"), "--k", "4"]).stdout, "");
    assert_eq!(cli(&["forests", &fx.path("m3.json"), "--k", "2", "--from", "1"]).code, 2);
}

#[test]
fn simulate_writes_csv() {
    let fx = Fixtures::new();
    let out = cli(&["simulate", &fx.path("decay.json"), "--params", "a_{01}=1", "--signal", "impulse", "--tmax", "0.2", "--dt", "0.1"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "t,y");
    assert_eq!(lines.len(), 4);
    let y: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((y - (-0.1f64).exp()).abs() < 1e-6);

    let target = fx.dir.path().join("out.csv");
    let out = cli(&[
        "simulate", &fx.path("decay.json"), "--params", "a_{01}=1", "--tmax", "1", "--dt", "0.5",
        "--csv", target.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, format!("wrote 3 samples to {}\n", target.display()));
    assert!(std::fs::read_to_string(&target).unwrap().starts_with("t,y\n0.0000000000000000e0,1.0000000000000000e0\n"));

    let bad = cli(&["simulate", &fx.path("decay.json"), "--params", "a_{01}=-1", "--tmax", "1", "--dt", "0.5"]);
    assert_eq!(bad.code, 2);
    let bad = cli(&["simulate", &fx.path("decay.json"), "--params", "a_{01}=1", "--signal", "pulse", "--tmax", "1", "--dt", "0.5"]);
    assert_eq!(bad.code, 2);
}

#[test]
fn usage_and_io_errors_exit_2() {
    let fx = Fixtures::new();
    let missing = fx.dir.path().join("nope.json");
    for args in [
        vec!["ioeq".to_string(), missing.display().to_string()],
        vec!["ioeq".to_string(), fx.path("broken.json")],
        vec!["ioeq".to_string(), fx.path("loop.json")],
        vec!["ioeq".to_string(), fx.path("m3.json"), "--unknown".to_string()],
        vec!["frobnicate".to_string()],
        vec!["verify-theorems".to_string(), "--n".to_string(), "9".to_string()],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = cli(&args);
        assert_eq!(out.code, 2, "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_compartmental"))
}

fn run_binary(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(binary()).args(args).current_dir(cwd).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let fx = Fixtures::new();
    let ok = run_binary(&["indist", "m3.json", "m4.json"], fx.dir.path());
    assert_eq!(ok.status.code(), Some(0));
    let neg = run_binary(&["indist", "m2leak.json", "m4leak.json"], fx.dir.path());
    assert_eq!(neg.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&neg.stdout).starts_with("DISTINGUISHABLE"));
    let usage = run_binary(&["indist", "m3.json"], fx.dir.path());
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn verify_theorems_small() {
    let out = cli(&["verify-theorems", "--n", "3"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.lines().all(|l| l.starts_with("PASS") || l.ends_with("checks passed")));
    assert!(out.stdout.contains("PASS certificate leak-pair n=3 i=1 k=2"));
}
