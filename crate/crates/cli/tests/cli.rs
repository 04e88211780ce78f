use std::path::PathBuf;
use std::process::{Command, Output};

fn kcsm(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kcsm"));
    cmd.args(args).env_remove("KCSM_WORKERS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Header row plus data rows, manifest stripped.
fn body(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = rows[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn east_gap_sweep_is_positive_and_nonincreasing() {
    let out = kcsm(&["gap", "--model", "east", "--n", "2..10", "--q", "0.5"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = body(&out);
    assert_eq!(rows.len(), 10);
    let gaps = column(&rows, "gap");
    assert!(gaps.iter().all(|&g| g > 0.0));
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{gaps:?}");
    let n = column(&rows, "n");
    assert_eq!(n, (2..=10).map(f64::from).collect::<Vec<_>>());
}

#[test]
fn manifest_records_the_resolved_config() {
    let out = kcsm(&["gap", "--model", "east", "--n", "4", "--q", "0.3"], &[]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("# kcsm "));
    assert!(text.contains("# command: gap"));
    assert!(text.lines().any(|l| l.starts_with("# config_sha256: ") && l.len() == 17 + 64));
    assert!(text.contains("name = \"east\""));
}

#[test]
fn persistence_stays_below_the_bound() {
    let args = ["persistence", "--model", "east", "--n", "6", "--q", "0.4", "--samples", "4000", "--seed", "3"];
    let out = kcsm(&args, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = body(&out);
    assert_eq!(rows.len(), 42);
    let f = column(&rows, "F_hat");
    let se = column(&rows, "stderr");
    let bound = column(&rows, "bound");
    for i in 0..f.len() {
        assert!(f[i] <= bound[i] + 3.0 * se[i], "row {i}: {} > {} + 3 * {}", f[i], bound[i], se[i]);
    }
    assert_eq!(f[0], 1.0);
}

#[test]
fn output_is_identical_across_runs_and_worker_counts() {
    let args = ["persistence", "--model", "fa", "--j", "1", "--n", "5", "--q", "0.5", "--samples", "500", "--seed", "9"];
    let a = kcsm(&args, &[("KCSM_WORKERS", "1")]);
    let b = kcsm(&args, &[("KCSM_WORKERS", "1")]);
    let c = kcsm(&args, &[("KCSM_WORKERS", "4")]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let scan = ["bootstrap-scan", "--model", "north-east-torus", "--n", "8,16", "--q", "0.2..0.4:0.05", "--samples", "50", "--seed", "2"];
    assert_eq!(kcsm(&scan, &[("KCSM_WORKERS", "1")]).stdout, kcsm(&scan, &[("KCSM_WORKERS", "3")]).stdout);
}

#[test]
fn csv_goes_to_the_requested_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gap.csv");
    let out = kcsm(&["gap", "--model", "east", "--n", "3", "--out", path.to_str().unwrap()], &[]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("model,n,q,gap"));
}

#[test]
fn invalid_input_exits_with_2() {
    let cases: &[&[&str]] = &[
        &["gap", "--model", "east", "--n", "3", "--q", "1.5"],
        &["gap", "--model", "no-such-model", "--n", "3"],
        &["persistence", "--model", "east", "--n", "3"],
        &["gap", "--model", "east", "--n", "40"],
        &["gap", "--config", "/nonexistent/config.toml"],
    ];
    for args in cases {
        let out = kcsm(args, &[]);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    let out = kcsm(&["gap", "--model", "east", "--n", "3"], &[("KCSM_WORKERS", "zero")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "schema = 1\n[model]\nname = \"east\"\nn = 3\ncolour = 2\n").unwrap();
    let out = kcsm(&["gap", "--config", path.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&path, "schema = 7\n[model]\nname = \"east\"\nn = 3\n").unwrap();
    let out = kcsm(&["gap", "--config", path.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_with_3() {
    let out = kcsm(&["gap", "--model", "east", "--n", "4", "--tolerance", "1e-300"], &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn shipped_check_config_passes() {
    let cfg = configs().join("check.toml");
    let out = kcsm(&["check", "--config", cfg.to_str().unwrap()], &[]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() > 20);
    assert!(!stdout.lines().any(|l| l.starts_with("FAIL")));
}

#[test]
fn config_for_another_subcommand_is_refused() {
    let cfg = configs().join("gap_east.toml");
    let out = kcsm(&["hitting", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hitting_defaults_to_the_east_interval() {
    let out = kcsm(&["hitting", "--q", "0.5", "--samples", "300", "--seed", "4"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = body(&out);
    assert_eq!(rows.len(), 2);
    let mean = column(&rows, "mean")[0];
    let se = column(&rows, "stderr")[0];
    let lower = column(&rows, "lower_bound")[0];
    assert!(mean + 3.0 * se >= lower);
    assert_eq!(column(&rows, "censored")[0], 0.0);
}

#[test]
fn gibbs_gap_reads_an_interaction_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.txt");
    std::fs::write(&path, "range: 2\nstates: 2\nA: (0 0),(1 0) ; table: 0,0.05,0.05,0\n").unwrap();
    let args = ["gibbs-gap", "--model", "north-east", "--q", "0.9", "--interaction", path.to_str().unwrap()];
    let mut cmd = args.to_vec();
    let sides_cfg = dir.path().join("ne.toml");
    std::fs::write(&sides_cfg, "schema = 1\n[model]\nname = \"north-east\"\nsides = [2, 3]\n").unwrap();
    cmd.extend(["--config", sides_cfg.to_str().unwrap()]);
    let out = kcsm(&cmd, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = body(&out);
    assert_eq!(rows.len(), 2);
    assert!(column(&rows, "gap")[0] > 0.0);
}
