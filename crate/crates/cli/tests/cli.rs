use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_restricta"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn manifest(out: &Output) -> Value {
    let err = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(err.lines().last().expect("manifest line")).expect("manifest is JSON")
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
}

#[test]
fn sin_sum_at_101() {
    let out = run(&["fourier", "--check", "sin-sum", "--q", "101"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let value = v["value"].as_f64().unwrap();
    assert!((value - 602.82).abs() < 0.01);
    assert_eq!(v["passes"], false);
    let m = manifest(&out);
    assert_eq!(m["subcommand"], "fourier");
    assert!(m["digest"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn certify_base_ten() {
    let out = run(&["certify", "--sys", "q=10,exclude=7", "--ell-max", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["certified"], false);
    assert_eq!(v["q"], 10);
    for key in ["ell", "sigma", "rowSumBound", "powerEstimate", "threshold"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["census", "--sys", "q=10,D=zz", "--x", "9"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["primes", "--limit", "10", "--bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["fourier", "--check", "sin-sum"]).status.code(),
        Some(2)
    );
}

#[test]
fn computation_errors_exit_one_with_kind() {
    let out = run(&["primes", "--limit", "2000000000000"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "LimitExceeded");
    let out = run(&["dioph", "--cmd", "hausdorff", "--psi", "ds_base"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "Unsupported");
}

#[test]
fn output_is_identical_across_thread_counts() {
    let args = ["fourier", "--check", "refined", "--q", "31"];
    let one = run(&[&["--threads", "1"][..], &args].concat());
    let four = run(&[&["--threads", "4"][..], &args].concat());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(manifest(&one)["digest"], manifest(&four)["digest"]);
    let again = run(&args);
    assert_eq!(one.stdout, again.stdout);
}

#[test]
fn scan_streams_csv() {
    let out = run(&[
        "--format",
        "csv",
        "fourier",
        "--check",
        "pairwise",
        "--scan",
        "18645..18648",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "q,value,threshold,passes");
    assert!(lines[2].starts_with("18646,") && lines[2].ends_with("false"));
    assert!(lines[3].starts_with("18647,") && lines[3].ends_with("true"));
}

#[test]
fn arcs_class_table() {
    let out = run(&[
        "--format",
        "csv",
        "arcs",
        "--sys",
        "q=10,exclude=7",
        "-k",
        "4",
        "--A",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("class,count,mass\n"));
    let total: u64 = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 10_000);
}

#[test]
fn gcdgraph_from_set_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.txt");
    std::fs::write(&path, "11\n12\n20\n55\n10\n25\n35\n7\n").unwrap();
    let p = path.to_str().unwrap();
    let v = json(&run(&[
        "gcdgraph", "--cmd", "build", "--set", p, "--B", "5",
    ]));
    let edges = v["edges"].as_array().unwrap();
    assert!(edges.iter().any(|e| e == &serde_json::json!([20, 55])));
    assert!(!edges.iter().any(|e| e == &serde_json::json!([11, 12])));
    let v = json(&run(&[
        "gcdgraph", "--cmd", "model", "--set", p, "--B", "5",
    ]));
    assert_eq!(v["solution"]["g"], 5);
    let v = json(&run(&["gcdgraph", "--cmd", "chow", "--y", "10"]));
    assert_eq!(v["Q"], "9699690");
    assert_eq!(v["maxMultiplicity"], 2);
}

#[test]
fn dioph_exact_rationals_are_strings() {
    let v = json(&run(&[
        "dioph",
        "--cmd",
        "measure",
        "--psi",
        "constant:1/2",
        "--q",
        "6",
        "--reduced",
    ]));
    assert_eq!(v["measure"], serde_json::json!({"num": "1", "den": "18"}));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.csv");
    std::fs::write(&path, "n,psi\n2,1\n3,0.5\n").unwrap();
    let v = json(&run(&[
        "dioph",
        "--cmd",
        "series",
        "--psi",
        path.to_str().unwrap(),
        "--Q",
        "10",
    ]));
    let k = v["series"]["khinchinSum"].as_f64().unwrap();
    assert!((k - (0.5 + 0.5 / 3.0)).abs() < 1e-15);
}
