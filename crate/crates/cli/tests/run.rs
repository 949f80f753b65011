use std::fs;
use std::process::Command;

use fcsd_cli::{parse_config, parse_str, run, MANIFEST, TRACE};

const BIN: &str = env!("CARGO_BIN_EXE_fcsd");

fn small(extra: &str) -> String {
    format!("trials = 3\ngenerations = 20\npop_size = 12\nd0_sweep_mb = 0.1, 0.3\nt0_sweep_s = 1.5, 2.5\nr0_sweep = 0.9, 0.99\n{extra}")
}

#[test]
fn solve_one_without_fog_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_str(&small("p = 0\nt0_s = 10\nr0 = 0.1")).unwrap();
    cfg.out = dir.path().to_path_buf();
    let out = run(&cfg).unwrap();
    let csv = fs::read_to_string(out.table).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "rho,t_total_s,r_total,e_total_j,feasible");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1.00000000000,"));
    assert!(lines[1].ends_with(",true"));
}

#[test]
fn energy_compare_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_str(&small("experiment = energy-compare\nalgorithms = wrr, lrga, maxmin")).unwrap();
    cfg.out = dir.path().to_path_buf();
    let csv = fs::read_to_string(run(&cfg).unwrap().table).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    assert_eq!(csv.lines().next().unwrap(), "d0_mb,algorithm,mean_value,feasible_fraction");
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_str(&small("experiment = energy-surface\ntrace = true")).unwrap();
    cfg.out = dir.path().join("first");
    let first = run(&cfg).unwrap();
    let mut again = parse_config(&first.manifest).unwrap();
    assert_eq!(again, cfg);
    again.out = dir.path().join("second");
    let second = run(&again).unwrap();
    assert_eq!(fs::read(&first.table).unwrap(), fs::read(&second.table).unwrap());
    assert_eq!(fs::read(first.trace.unwrap()).unwrap(), fs::read(second.trace.unwrap()).unwrap());
    let header = fs::read_to_string(&first.table).unwrap();
    assert_eq!(header.lines().next().unwrap(), "t0_s,r0,mean_energy_j");
    assert_eq!(header.lines().count(), 1 + 4);
}

#[test]
fn binary_writes_files_and_honours_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(&cfg_path, small("experiment = reliability\nseed = 1")).unwrap();
    let out_dir = dir.path().join("out");
    let status = Command::new(BIN)
        .args(["--config", cfg_path.to_str().unwrap(), "--experiment", "latency", "--seed", "9", "--trials", "2"])
        .args(["--out", out_dir.to_str().unwrap(), "--trace"])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out_dir.join("latency.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "d0_mb,cloud_s,local_s,fog_s");
    assert_eq!(csv.lines().count(), 3);
    let manifest = parse_config(&out_dir.join(MANIFEST)).unwrap();
    assert_eq!((manifest.seed, manifest.trials, manifest.trace), (9, 2, true));
    let trace = fs::read_to_string(out_dir.join(TRACE)).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "generation,best_fitness,feasible_count,wor");
    assert_eq!(trace.lines().count(), 1 + 20);
}

#[test]
fn binary_reports_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.cfg");
    fs::write(&cfg_path, "path_loss_exp = 6\n").unwrap();
    let out = Command::new(BIN).args(["--config", cfg_path.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("path_loss_exp must be in [2,5]"), "{err}");

    let out = Command::new(BIN).args(["--experiment", "nonsense"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let mut cfg = parse_str(&small("p = 2")).unwrap();
    cfg.out = blocker.join("sub");
    assert!(run(&cfg).is_err());
    let status = Command::new(BIN)
        .args(["--trials", "1", "--out", cfg.out.to_str().unwrap()])
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(!status.success());
}

#[test]
fn numeric_cells_have_enough_digits() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_str(&small("experiment = reliability")).unwrap();
    cfg.out = dir.path().to_path_buf();
    let csv = fs::read_to_string(run(&cfg).unwrap().table).unwrap();
    for line in csv.lines().skip(1) {
        for cell in line.split(',') {
            if cell.parse::<f64>().is_ok_and(|v| v.is_finite()) {
                let digits = cell.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
                assert!(digits.trim_start_matches('0').len() >= 9 || digits.chars().all(|c| c == '0'), "{cell}");
            }
        }
    }
}
