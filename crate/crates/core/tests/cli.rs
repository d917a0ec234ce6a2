use std::path::Path;
use std::process::{Command, Output};

use subspace_lrt::experiments::{read_csv, Method, CSV_COLUMNS};

const SMALL: &str = r#"
M = 4
L = 2
J = 2
snr_db = 10.0
transient_db_below = 0.0
sigma_v2 = 1.0
num_snapshots = 4000
T_range = [1, 2, 3]
num_trials = 200
seed = 5
"#;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subspace-lrt")).args(args).output().expect("binary runs")
}

fn run_small(dir: &Path, name: &str, extra: &[&str]) -> (Output, String) {
    let cfg = dir.join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let out = dir.join(name);
    let mut args = vec!["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = cli(&args);
    let csv = std::fs::read_to_string(&out).unwrap_or_default();
    (o, csv)
}

/// Everything except the timing column.
fn deterministic_part(csv: &str) -> Vec<String> {
    csv.lines().map(|l| if l.starts_with('#') { l.to_string() } else { l.rsplit_once(',').unwrap().0.to_string() }).collect()
}

#[test]
fn run_writes_header_comments_and_exact_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = run_small(dir.path(), "out.csv", &[]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));

    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# seed = 5"));
    let body: Vec<&str> = lines.skip_while(|l| l.starts_with('#')).collect();
    assert_eq!(body[0], "method,T,delta,cond_H0,cond_H1,status,wall_time_ms");
    assert_eq!(body[0], CSV_COLUMNS.join(","));
    assert!(csv.contains("# M = 4") && csv.contains("# T_range = [1, 2, 3]"));

    let records = read_csv(&csv).unwrap();
    assert_eq!(records.len(), Method::ALL.len() * 3);
    for m in Method::ALL {
        let ts: Vec<usize> = records.iter().filter(|r| r.method == m).map(|r| r.t).collect();
        assert_eq!(ts, [1, 2, 3], "{m}");
    }
    for r in &records {
        assert!(r.delta.is_finite() && r.cond_h0 >= 1.0 && r.cond_h1 >= 1.0 && r.wall_time_ms >= 0.0, "{r:?}");
    }
}

#[test]
fn same_seed_reproduces_results_and_seed_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let (a, csv_a) = run_small(dir.path(), "a.csv", &[]);
    let (b, csv_b) = run_small(dir.path(), "b.csv", &[]);
    let (c, csv_c) = run_small(dir.path(), "c.csv", &["--seed", "6", "--trials", "150"]);
    assert!(a.status.success() && b.status.success() && c.status.success());
    assert_eq!(deterministic_part(&csv_a), deterministic_part(&csv_b));

    assert!(csv_c.starts_with("# seed = 6\n"));
    assert!(csv_c.contains("# num_trials = 150"));
    let da: Vec<f64> = read_csv(&csv_a).unwrap().iter().map(|r| r.delta).collect();
    let dc: Vec<f64> = read_csv(&csv_c).unwrap().iter().map(|r| r.delta).collect();
    assert_ne!(da, dc);
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();

    let missing = dir.path().join("missing.toml");
    assert!(!cli(&["run", "--config", missing.to_str().unwrap(), "--out", out]).status.success());

    let malformed = dir.path().join("bad.toml");
    std::fs::write(&malformed, "M = [").unwrap();
    assert!(!cli(&["run", "--config", malformed.to_str().unwrap(), "--out", out]).status.success());

    let invalid = dir.path().join("invalid.toml");
    std::fs::write(&invalid, SMALL.replace("L = 2", "L = 4")).unwrap();
    let o = cli(&["run", "--config", invalid.to_str().unwrap(), "--out", out]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("M > L"));

    // missing required flag and unknown subcommand
    assert!(!cli(&["run", "--config", invalid.to_str().unwrap()]).status.success());
    assert!(!cli(&["figure4"]).status.success());
    assert!(!Path::new(out).exists());
}

#[test]
fn single_trial_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run_small(dir.path(), "z.csv", &["--trials", "1"]);
    assert!(!o.status.success());
}
