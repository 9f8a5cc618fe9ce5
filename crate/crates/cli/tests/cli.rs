use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fibgap"));
    c.env_remove("FIBGAP_WORKERS");
    c
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (String, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let comment = lines.next().unwrap().to_string();
    let body: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (comment, body)
}

#[test]
fn word_subcommand() {
    let o = run(&["word", "--n", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "ABAABABA");
    let o = run(&["word", "--m", "2", "--n", "2"]);
    assert_eq!(stdout(&o).trim(), "AAB");
}

#[test]
fn trace_csv_layout() {
    let cfg = config("mass_spring.json");
    let o = run(&[
        "trace",
        "--config",
        cfg.to_str().unwrap(),
        "--m",
        "2",
        "--omega",
        "13",
        "--n-max",
        "6",
    ]);
    assert!(o.status.success());
    let (comment, rows) = csv_rows(&stdout(&o));
    assert!(comment.starts_with("# fibgap ") && comment.contains("config_sha256="));
    assert_eq!(rows[0], ["omega", "omega_normalised", "n", "x_n", "t_n", "escaped"]);
    assert_eq!(rows.len(), 1 + 7);
    // x_0 = 2 - ω²/100
    let x0: f64 = rows[1][3].parse().unwrap();
    assert_eq!(x0, 2.0 - 169.0 / 100.0);
    assert!(rows[1][4].is_empty() && !rows[3][4].is_empty());
}

#[test]
fn bands_csv_for_two_orders() {
    let cfg = config("rod_canonical.json");
    let o = run(&[
        "bands",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "2,5",
        "--points",
        "50",
    ]);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(
        rows[0],
        ["omega", "omega_normalised", "n", "K_L", "attenuation", "propagating"]
    );
    assert_eq!(rows.len(), 1 + 100);
    for r in &rows[1..] {
        let k: f64 = r[3].parse().unwrap();
        let att: f64 = r[4].parse().unwrap();
        assert!((0.0..=std::f64::consts::PI).contains(&k));
        assert_eq!(r[5] == "1", att == 0.0);
    }
}

#[test]
fn sbg_report_and_mask() {
    let dir = tempfile::tempdir().unwrap();
    let mask = dir.path().join("mask.csv");
    let cfg = config("mass_spring.json");
    let o = run(&[
        "sbg",
        "--config",
        cfg.to_str().unwrap(),
        "--m",
        "2",
        "--l",
        "1",
        "--order",
        "4",
        "--points",
        "500",
        "--mask",
        mask.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let intervals = report["intervals"].as_array().unwrap();
    assert!(!intervals.is_empty());
    for iv in intervals {
        assert!(iv["omega_lo"].as_f64().unwrap() <= iv["omega_hi"].as_f64().unwrap());
        assert_eq!(iv["certificate"]["requested_order"], 4);
    }
    let (_, rows) = csv_rows(&std::fs::read_to_string(&mask).unwrap());
    assert_eq!(rows[0], ["omega", "omega_normalised", "status", "H_2"]);
    assert_eq!(rows.len(), 501);
    assert!(rows.iter().any(|r| r[2] == "certified"));
}

#[test]
fn system_flag_alias() {
    let cfg = config("mass_spring.json");
    let o = run(&[
        "sbg",
        "--system",
        cfg.to_str().unwrap(),
        "--order",
        "2",
        "--points",
        "100",
    ]);
    assert!(o.status.success());
}

#[test]
fn transmit_periodic_sample() {
    let cfg = config("rod_stack.json");
    let o = run(&[
        "transmit",
        "--config",
        cfg.to_str().unwrap(),
        "--stack",
        "periodic:n=3,repeats=7",
        "--points",
        "200",
    ]);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["omega", "omega_normalised", "T_c", "log10_abs_Tc", "flag"]);
    assert_eq!(rows.len(), 201);
    // static limit transmits fully
    assert_eq!(rows[1][2].parse::<f64>().unwrap(), 1.0);
    assert!(rows.iter().skip(1).any(|r| r[3].parse::<f64>().unwrap() < -2.0));
}

#[test]
fn output_is_independent_of_worker_count() {
    let cfg = config("beam.json");
    let cfg = cfg.to_str().unwrap();
    let args = ["sbg", "--config", cfg, "--order", "3", "--points", "800"];
    let one = bin().args(args).arg("--workers").arg("1").output().unwrap();
    let four = bin().args(args).arg("--workers").arg("4").output().unwrap();
    let env = bin().args(args).env("FIBGAP_WORKERS", "3").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, env.stdout);

    let targs = ["transmit", "--config", cfg, "--points", "300"];
    let a = bin().args(targs).arg("--workers").arg("1").output().unwrap();
    let b = bin().args(targs).arg("--workers").arg("5").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn validate_reports_all_suites() {
    let o = run(&["validate", "--suite", "all", "--seed", "42"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["suites"].as_array().unwrap().len(), 5);
    assert_eq!(report["all_passed"], true);
    let again = run(&["validate", "--suite", "all", "--seed", "42"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn config_errors_exit_one() {
    let o = run(&["sbg", "--config", "/nonexistent.json", "--order", "2"]);
    assert_eq!(o.status.code(), Some(1));

    let cfg = config("mass_spring.json");
    let o = run(&[
        "sbg",
        "--config",
        cfg.to_str().unwrap(),
        "--m",
        "2",
        "--l",
        "2",
        "--order",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m = 2, l = 2"));

    let o = run(&["transmit", "--config", cfg.to_str().unwrap(), "--stack", "lattice:3"]);
    assert_eq!(o.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bare = dir.path().join("bare.json");
    std::fs::write(
        &bare,
        r#"{"kind":"mass-spring","mass_A":1,"mass_B":1,"stiffness_A":200,"stiffness_B":100}"#,
    )
    .unwrap();
    let o = run(&["sbg", "--config", bare.to_str().unwrap(), "--order", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&[
        "sbg",
        "--config",
        bare.to_str().unwrap(),
        "--order",
        "2",
        "--omega-max",
        "30",
        "--points",
        "50",
    ]);
    assert!(o.status.success());

    let o = run(&["validate", "--suite", "everything"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn all_pole_grid_exits_two() {
    // with r = 0.05, l_B = 0.1 and P = 1 the B span is singular at ω = (j π / 2)²
    let cfg = config("beam.json");
    let lo = (std::f64::consts::PI / 2.0).powi(2);
    let hi = std::f64::consts::PI.powi(2);
    let o = run(&[
        "transmit",
        "--config",
        cfg.to_str().unwrap(),
        "--omega-min",
        &lo.to_string(),
        "--omega-max",
        &hi.to_string(),
        "--points",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
