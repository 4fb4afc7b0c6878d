use std::process::{Command, Output};

use heston_adi::harness::{self, CSV_HEADER};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heston-adi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, label: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(label))
        .unwrap_or_else(|| panic!("no '{label}' in\n{text}"));
    line[label.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn spectral_radius_of_the_benchmark_grid() {
    let o = run(&["spectral-radius", "--case", "1", "--m1", "100", "--m2", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let r = field(&stdout(&o), "spectral radius:");
    assert!((4.1e4..=6.1e4).contains(&r), "{r}");
}

#[test]
fn price_agrees_with_reference_to_spatial_error_level() {
    let o = run(&[
        "price", "--case", "2", "--m1", "100", "--m2", "50", "--s", "100", "--v", "0.04", "--scheme", "mcs",
        "--steps", "100", "--damping",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let diff = field(&text, "difference:").abs();
    let level = harness::spatial_error(2, 100, 50).unwrap().report.error;
    assert!(diff <= level, "difference {diff} exceeds spatial error {level}");
}

#[test]
fn invalid_theta_is_a_validation_error() {
    let o = run(&["temporal-error", "--case", "1", "--scheme", "do", "--theta", "0", "--steps", "1,2,5,10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta"));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["price", "--s", "100"]).status.code(), Some(1));
    assert_eq!(run(&["spatial-error", "--scheme", "xyz"]).status.code(), Some(1));
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("stability-sweep"));
}

#[test]
fn unknown_case_and_feller_violation_exit_one() {
    assert_eq!(run(&["spectral-radius", "--case", "9", "--m2", "10"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    std::fs::write(
        &path,
        r#"{"kappa": 1.0, "eta": 0.01, "sigma": 0.5, "rho": 0.0, "rd": 0.0, "rf": 0.0, "T": 1.0, "K": 100.0}"#,
    )
    .unwrap();
    let o = run(&["spectral-radius", "--config", path.to_str().unwrap(), "--m2", "10"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_prices_like_the_builtin_case() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("case1.json");
    std::fs::write(
        &path,
        r#"{"kappa": 1.5, "eta": 0.04, "sigma": 0.3, "rho": -0.9, "rd": 0.025, "rf": 0.0, "T": 1.0, "K": 100.0}"#,
    )
    .unwrap();
    let common = ["--m2", "20", "--s", "100", "--v", "0.04", "--steps", "20"];
    let a = run(&[&["price", "--case", "1"], &common[..]].concat());
    let b = run(&[&["price", "--config", path.to_str().unwrap()], &common[..]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(field(&stdout(&a), "fd price:"), field(&stdout(&b), "fd price:"));
}

#[test]
fn csv_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        let o = run(&[
            "stability-sweep", "--case", "4", "--m2", "10", "--scheme", "hv2", "--steps", "1,2,4,8,16", "--fit", "2,16",
            "--output", p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    for (row, n) in rows.iter().zip(["1", "2", "4", "8", "16"]) {
        assert_eq!(row.len(), 9);
        assert_eq!(row[0], "4");
        assert_eq!(row[1], "hv2");
        assert_eq!((row[4], row[5], row[6]), ("20", "10", n));
        assert!(row[7].parse::<f64>().unwrap() >= 0.0);
        assert!(row[8].parse::<f64>().is_ok());
    }
}

#[test]
fn table_output_is_reproducible() {
    let args = ["spatial-error", "--case", "3", "--m2", "10,12"];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, run(&args).stdout);
}
