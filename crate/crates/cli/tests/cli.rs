use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nentire(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nentire")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn free_problem(dir: &Path) -> String {
    let p = dir.join("free.json");
    fs::write(&p, format!(r#"{{"l": 0, "b": {}, "beta": 0}}"#, std::f64::consts::PI)).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn eigs_writes_squares_and_a_record() {
    let dir = tempfile::tempdir().unwrap();
    let problem = free_problem(dir.path());
    let o = nentire(&["eigs", "--problem", &problem, "--count", "20"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("eigs.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 20);
    for row in &rows {
        let k: f64 = row[0].parse().unwrap();
        let lambda: f64 = row[1].parse().unwrap();
        assert!((lambda - k * k).abs() <= 1e-8 * k * k, "k = {k}: {lambda}");
    }
    let runs = fs::read_to_string(dir.path().join("runs.jsonl")).unwrap();
    let rec: serde_json::Value = serde_json::from_str(runs.lines().next().unwrap()).unwrap();
    assert_eq!(rec["command"], "eigs");
    assert_eq!(rec["pass"], true);
    assert_eq!(rec["problem_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn reruns_are_bitwise_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(code(&nentire(&["eigs", "--problem", "builtin:bessel-l1", "--count", "10"], d.path())), 0);
    }
    assert_eq!(fs::read(a.path().join("eigs.csv")).unwrap(), fs::read(b.path().join("eigs.csv")).unwrap());
    assert_eq!(fs::read(a.path().join("eigs.json")).unwrap(), fs::read(b.path().join("eigs.json")).unwrap());
}

#[test]
fn verify_mf3_passes_and_prints_residual() {
    let dir = tempfile::tempdir().unwrap();
    let problem = free_problem(dir.path());
    let o = nentire(&["verify", "--identity", "mf3", "--problem", &problem, "--z", "-1", "--j", "1"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("mf3: residual"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify_mf3.json")).unwrap()).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-5);
}

#[test]
fn failed_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let tol = dir.path().join("tol.json");
    fs::write(&tol, r#"{"identity_tol": 1e-300}"#).unwrap();
    let o = nentire(&["verify", "--identity", "mf3", "--problem", "builtin:free", "--tol", tol.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed: mf3"));
    let runs = fs::read_to_string(dir.path().join("runs.jsonl")).unwrap();
    assert!(runs.contains("\"pass\":false"));
}

#[test]
fn usage_and_io_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&nentire(&["bogus"], dir.path())), 1);
    assert_eq!(code(&nentire(&["eigs", "--problem", "/no/such/file.json"], dir.path())), 1);
    assert_eq!(code(&nentire(&["eigs", "--problem", "builtin:nope"], dir.path())), 1);
    let bad_tol = dir.path().join("tol.json");
    fs::write(&bad_tol, r#"{"unknown_key": 1}"#).unwrap();
    assert_eq!(code(&nentire(&["eigs", "--problem", "builtin:free", "--tol", bad_tol.to_str().unwrap()], dir.path())), 1);
    let empty = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nentire")).args(["report", "--run-dir"]).arg(empty.path()).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn kernel_reads_pairs_file() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.csv");
    fs::write(&pairs, "re_w,im_w,re_z,im_z\n1,0,1,0\n2,1,-1,0.5\n").unwrap();
    let o = nentire(&["kernel", "--problem", "builtin:free", "--pairs", pairs.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("kernel.csv")).unwrap();
    assert_eq!(r.headers().unwrap().len(), 9);
    let first = r.records().next().unwrap().unwrap();
    let k: f64 = first[4].parse().unwrap();
    assert!((k - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
}

#[test]
fn report_summarizes_and_skips_corrupt_records() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&nentire(&["eigs", "--problem", "builtin:free", "--count", "20"], dir.path())), 0);
    assert_eq!(code(&nentire(&["nentire", "--problem", "builtin:bessel-l2", "--z", "-1"], dir.path())), 0);
    let runs = dir.path().join("runs.jsonl");
    let mut text = fs::read_to_string(&runs).unwrap();
    text.push_str("{not json\n");
    fs::write(&runs, text).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nentire")).args(["report", "--run-dir"]).arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipping corrupt record"));
    let md = fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(md.contains("tail-fit exponent p = 2.0000"));
    assert!(md.contains("minimal n (empirical) = 2; threshold bound n >= 2; floor(l + 5/2) reading = 4"));
    assert!(!md.contains("## verify"));
}

#[test]
fn weyl_with_grid_and_gauge() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    fs::write(&grid, "0.5,1\n-3,0.25\n").unwrap();
    let gauge = dir.path().join("gauge.json");
    fs::write(&gauge, r#"{"g": [0.0, 0.1], "f": [1.0]}"#).unwrap();
    let o = nentire(
        &["weyl", "--problem", "builtin:free", "--z-grid", grid.to_str().unwrap(), "--gauge", gauge.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("weyl.csv")).unwrap();
    let row = r.records().next().unwrap().unwrap();
    // free case M(z) = -sqrt(z) cot(sqrt(z) pi)
    let z = nentire_core::C64::new(0.5, 1.0);
    let s = z.sqrt();
    let m = -s * (s * std::f64::consts::PI).cos() / (s * std::f64::consts::PI).sin();
    let got = nentire_core::C64::new(row[2].parse().unwrap(), row[3].parse().unwrap());
    assert!((got - m).norm() < 1e-8 * m.norm());
    assert_eq!(row.len(), 7);
}

#[test]
fn cconds_and_dump_jets() {
    let dir = tempfile::tempdir().unwrap();
    let o = nentire(&["cconds", "--problem", "builtin:free", "--n", "1", "--count", "60"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("cconds.json")).unwrap()).unwrap();
    assert_eq!(v["c3_convergent"], true);
    let o = nentire(&["verify", "--identity", "mf2", "--problem", "builtin:free", "--j", "1", "--dump-jets"], dir.path());
    assert_eq!(code(&o), 0);
    let jets = fs::read_to_string(dir.path().join("phi_jets.csv")).unwrap();
    assert!(jets.starts_with("x,re_u0,im_u0,re_du0,im_du0,re_u1"));
}
