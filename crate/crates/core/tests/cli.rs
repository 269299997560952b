use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphere-disc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn field(out: &Output, key: &str) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no `{key}` in:\n{text}"))
        .parse()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn axes_file(n: usize) -> String {
    let mut s = format!("# ±e_i\n{n} {}\n", 2 * n);
    for i in 0..n {
        for sign in [1, -1] {
            let row: Vec<String> = (0..n).map(|j| if i == j { sign.to_string() } else { "0".into() }).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
    }
    s
}

#[test]
fn capvol_and_gauss() {
    let out = run(&["capvol", "--n", "3", "--theta", "1.0471975512"]);
    assert!(out.status.success());
    assert!((field(&out, "volume") - 0.25).abs() < 1e-9);
    let out = run(&["capvol", "--n", "3", "--delta", "0.25"]);
    assert!((field(&out, "theta") - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
    let out = run(&["gauss", "--t", "0"]);
    assert_eq!(field(&out, "tail"), 0.5);
    let out = run(&["gauss", "--t", "-1"]);
    assert!((field(&out, "tail") - 0.8413447460685429).abs() < 1e-15);
    let out = run(&["gauss", "--delta", "1e-6"]);
    assert!((field(&out, "t") - 4.753424308822899).abs() < 1e-9);
}

#[test]
fn solve_writes_witness_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "axes16.txt", &axes_file(16));
    let witness = dir.path().join("x.txt");
    let trace = dir.path().join("trace.csv");
    let out = run(&[
        "solve", "--input", &input, "--T", "1000000",
        "--output", witness.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(field(&out, "value") <= field(&out, "guarantee"));
    assert_eq!(field(&out, "T"), 1e6);
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("t,phi,heavy_count,x_norm,max_weight\n"));
    assert!(csv.lines().count() > 1000);
    let x = std::fs::read_to_string(&witness).unwrap();
    assert!(x.starts_with("16 1\n"));
}

#[test]
fn reduce_output_feeds_solve() {
    let dir = tempfile::tempdir().unwrap();
    let formula = write(
        dir.path(),
        "f.cnf",
        "c grid\np nae3 9 6\n1 2 3 0\n4 5 6 0\n7 8 9 0\n1 4 7 0\n2 5 8 0\n3 6 9 0\n",
    );
    let vectors = dir.path().join("v.txt");
    let out = run(&["reduce", "--input", &formula, "--output", vectors.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&vectors).unwrap();
    assert!(text.starts_with("9 30\n"));
    let out = run(&["solve", "--input", vectors.to_str().unwrap(), "--T", "20000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(field(&out, "m"), 30.0);
}

#[test]
fn witness_reports_certification() {
    let dir = tempfile::tempdir().unwrap();
    let small = write(dir.path(), "caps.txt", "theta 0.3\n8 2\n1 0 0 0 0 0 0 0\n0 1 0 0 0 0 0 0\n");
    let out = run(&["witness", "--input", &small, "--T", "20000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().nth(3), Some("certified true"));

    // Two opposite hemispheres cover everything.
    let halves = write(dir.path(), "halves.txt", "theta 1.5707963267948966\n8 2\n1 0 0 0 0 0 0 0\n-1 0 0 0 0 0 0 0\n");
    let out = run(&["witness", "--input", &halves, "--T", "20000"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn komlos_and_pack() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "w.txt", "columns\n3 4\n1 0 0\n0 1 0\n0 0 1\n0.6 0.8 0\n");
    let out = run(&["komlos", "--input", &matrix, "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(field(&out, "achieved_k") <= field(&out, "certified_k"));

    let points = dir.path().join("p.txt");
    let out = run(&["pack", "--n", "8", "--m", "10", "--T", "5000", "--output", points.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(field(&out, "max_pair_inner") <= field(&out, "guarantee") + 1e-6);
    assert!(std::fs::read_to_string(&points).unwrap().starts_with("8 10\n"));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--input", "/nonexistent"]).status.code(), Some(2));
    assert_eq!(run(&["capvol", "--n", "3"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.txt", "2 1\n1 1\n");
    let out = run(&["solve", "--input", &bad, "--T", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("norm"));
    let no_tag = write(dir.path(), "w.txt", "2 1\n1 0\n");
    assert_eq!(run(&["komlos", "--input", &no_tag]).status.code(), Some(2));
    assert_eq!(run(&["witness", "--input", &no_tag]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
