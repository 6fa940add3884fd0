use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pathspt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathspt")).args(args).output().unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = pathspt(args);
    assert!(
        out.status.success(),
        "{args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(file: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(file)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        run_ok(&[
            "simulate",
            "--model",
            "gbm",
            "--j",
            "3",
            "--steps",
            "4096",
            "--seed",
            "7",
            "--out",
            s(out),
        ]);
    }
    let first = fs::read(a.join("path.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("path.csv")).unwrap());
    let rows = csv_rows(&a.join("path.csv"));
    assert_eq!(rows[0], ["time", "mu1", "mu2", "mu3"]);
    assert_eq!(rows.len(), 4098);
}

#[test]
fn zero_volatility_gives_constant_weights() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "simulate",
        "--model",
        "gbm",
        "--vol",
        "0",
        "--j",
        "4",
        "--steps",
        "64",
        "--out",
        s(dir.path()),
    ]);
    let rows = csv_rows(&dir.path().join("path.csv"));
    for row in &rows[2..] {
        assert_eq!(row[1..], rows[1][1..]);
    }
}

#[test]
fn ingested_path_reproduces_reports() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let flags = ["--model", "roughwalk", "--j", "3", "--steps", "1024", "--seed", "11"];
    let mut args = vec!["simulate"];
    args.extend(flags);
    args.extend(["--out", s(&sim)]);
    run_ok(&args);

    let direct = dir.path().join("direct");
    let mut args = vec!["verify", "--generator", "entropy"];
    args.extend(flags);
    args.extend(["--out", s(&direct)]);
    run_ok(&args);

    let ingested = dir.path().join("ingested");
    let input = sim.join("path.csv");
    run_ok(&[
        "verify",
        "--generator",
        "entropy",
        "--input",
        s(&input),
        "--out",
        s(&ingested),
    ]);

    for file in ["master.csv", "master_levels.csv", "corollary.csv"] {
        assert_eq!(
            fs::read(direct.join(file)).unwrap(),
            fs::read(ingested.join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn verify_constant_path_reports_zeros() {
    let dir = tempfile::tempdir().unwrap();
    for gen in ["quadratic", "entropy", "diversity"] {
        let out = dir.path().join(gen);
        run_ok(&[
            "verify",
            "--model",
            "gbm",
            "--vol",
            "0",
            "--steps",
            "256",
            "--generator",
            gen,
            "--out",
            s(&out),
        ]);
        let rows = csv_rows(&out.join("master.csv"));
        assert_eq!(rows[0], ["time", "ln_Z", "ln_S_ratio", "theta", "residual"]);
        for row in &rows[1..] {
            assert!(
                row[1..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0),
                "{gen}: {row:?}"
            );
        }
    }
}

#[test]
fn verify_roughwalk_entropy_residuals_decrease() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "verify",
        "--model",
        "roughwalk",
        "--steps",
        "4096",
        "--seed",
        "2",
        "--generator",
        "entropy",
        "--out",
        s(dir.path()),
    ]);
    let rows = csv_rows(&dir.path().join("master_levels.csv"));
    assert_eq!(rows[0], ["level", "points", "max_residual"]);
    let residuals: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(residuals.len(), 10);
    assert!(pathspt::convergence::refinement_decreasing(&residuals), "{residuals:?}");
}

#[test]
fn corrupted_csv_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.csv");
    fs::write(&file, "time,mu1,mu2\n0,0.5,0.5\n0.5,0.45,0.45\n1,0.5,0.5\n").unwrap();
    let out = pathspt(&["verify", "--input", s(&file), "--out", s(&dir.path().join("o"))]);
    assert!(!out.status.success());
    assert!(!dir.path().join("o").join("master.csv").exists());
}

#[test]
fn depth_one_fails_the_trend_assertion() {
    let dir = tempfile::tempdir().unwrap();
    let out = pathspt(&[
        "verify",
        "--model",
        "roughwalk",
        "--steps",
        "256",
        "--depth",
        "1",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("master residual decreases under refinement"), "{err}");
}

#[test]
fn compare_writes_table_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "compare",
        "--model",
        "roughwalk",
        "--steps",
        "1024",
        "--vol",
        "2",
        "--a-min",
        "0.1",
        "--a-max",
        "6",
        "--a-count",
        "20",
        "--out",
        s(dir.path()),
    ]);
    let rows = csv_rows(&dir.path().join("comparison.csv"));
    assert_eq!(
        rows[0],
        [
            "A",
            "tau_time_or_NA",
            "Z_pi_at_tau",
            "X_at_tau",
            "bound_fernholz",
            "bound_line",
            "bound_appendix"
        ]
    );
    assert_eq!(rows.len(), 21);
    let unreached: Vec<_> = rows[1..].iter().filter(|r| r[1] == "NA").collect();
    assert!(!unreached.is_empty());
    for r in unreached {
        assert_eq!(r[2], "NA");
        assert_eq!(r[3], "NA");
        assert!(r[4].parse::<f64>().is_ok() && r[5].parse::<f64>().is_ok() && r[6].parse::<f64>().is_ok());
    }
    let svg = fs::read_to_string(dir.path().join("comparison.svg")).unwrap();
    assert!(svg.contains("A=0.7148") && svg.contains("A=4.3066"));
}

#[test]
fn compare_rows_follow_the_crossings() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "compare",
        "--model",
        "gbm",
        "--j",
        "2",
        "--vol",
        "0",
        "--steps",
        "16",
        "--a-min",
        "0.1",
        "--a-max",
        "6",
        "--a-count",
        "60",
        "--a-spacing",
        "linear",
        "--format",
        "csv",
        "--out",
        s(dir.path()),
    ]);
    assert!(!dir.path().join("comparison.svg").exists());
    let rows = csv_rows(&dir.path().join("comparison.csv"));
    let c = pathspt::martingale::bound_crossings(2);
    for r in &rows[1..] {
        let v: Vec<f64> = [0, 4, 5, 6].iter().map(|&i| r[i].parse().unwrap()).collect();
        let (a, fern, line, app) = (v[0], v[1], v[2], v[3]);
        assert_eq!(line, a);
        assert_eq!(fern < line, a > c.lower && a < c.upper, "A = {a}");
        assert_eq!(app > line, a < c.appendix, "A = {a}");
    }
}

#[test]
fn bad_flags_exit_with_usage_error() {
    let out = pathspt(&["simulate", "--model", "levy"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pathspt(&["compare", "--a-min", "2", "--a-max", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pathspt(&["simulate", "--steps", "1000"]);
    assert_eq!(out.status.code(), Some(2));
}
