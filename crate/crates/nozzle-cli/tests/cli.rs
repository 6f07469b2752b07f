//! End-to-end checks of the command-line interface: exit codes, output
//! files, determinism of the verify round trip.

use std::path::{Path, PathBuf};
use std::process::Command;

fn nozzle() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nozzle"))
}

fn write_config(dir: &Path, name: &str, extra: &str) -> PathBuf {
    let path = dir.join(name);
    let base = "gas.gamma = 1.4\n\
                gas.rho_plus = 1.0\n\
                gas.rho_minus = 2.0\n\
                gas.p0 = 1.0\n\
                gas.u0 = 0.5\n";
    std::fs::write(&path, format!("{base}{extra}")).unwrap();
    path
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nozzle_cli_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn solve_background_and_verify_round_trip() {
    let dir = temp_dir("bg");
    let cfg = write_config(&dir, "run.cfg", "domain.l = 8\ndomain.nx = 64\ndomain.ny = 16\n");
    let out = dir.join("out");
    let status = nozzle()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report = std::fs::read_to_string(out.join("report.tsv")).unwrap();
    assert!(report.contains("status\tconverged"));
    assert!(report.contains("outer_cycles\t1"));
    assert!(out.join("solution.tsv").exists());
    assert!(out.join("boundary.tsv").exists());

    // metrics survive the verify round trip exactly
    let metrics_before = metric_lines(&report);
    let status = nozzle()
        .args(["verify", "--solution"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report_after = std::fs::read_to_string(out.join("report.tsv")).unwrap();
    let metrics_after = metric_lines(&report_after);
    for (k, v) in &metrics_before {
        let v_after = metrics_after
            .iter()
            .find(|(k2, _)| k2 == k)
            .unwrap_or_else(|| panic!("metric {k} lost in verify"))
            .1
            .clone();
        assert_eq!(*v, v_after, "metric {k} changed");
    }
}

fn metric_lines(report: &str) -> Vec<(String, String)> {
    report
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("status") && !l.starts_with("window"))
        .filter(|l| {
            // only the diagnostic metrics exist in both reports
            !l.starts_with("sigma")
                && !l.starts_with("outer_cycles")
                && !l.starts_with("inner_iterations")
                && !l.starts_with("norm_")
        })
        .filter_map(|l| {
            l.split_once('\t')
                .map(|(k, v)| (k.to_string(), v.to_string()))
        })
        .collect()
}

#[test]
fn invalid_gamma_exits_2() {
    let dir = temp_dir("badgamma");
    let path = dir.join("bad.cfg");
    std::fs::write(
        &path,
        "gas.gamma = 0.9\ngas.rho_plus = 1.0\ngas.rho_minus = 2.0\ngas.p0 = 1.0\ngas.u0 = 0.5\n",
    )
    .unwrap();
    let out = nozzle()
        .args(["solve", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gamma"), "stderr: {err}");
}

#[test]
fn unknown_key_exits_2() {
    let dir = temp_dir("badkey");
    let cfg = write_config(&dir, "run.cfg", "gas.tyop = 1\n");
    let out = nozzle()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn subsonic_violation_exits_2() {
    let dir = temp_dir("super");
    let path = dir.join("bad.cfg");
    std::fs::write(
        &path,
        "gas.gamma = 1.4\ngas.rho_plus = 1.0\ngas.rho_minus = 2.0\ngas.p0 = 1.0\ngas.u0 = 1.3\n",
    )
    .unwrap();
    let out = nozzle()
        .args(["solve", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_background_zero_differences() {
    let dir = temp_dir("sweep");
    let cfg = write_config(
        &dir,
        "sweep.cfg",
        "domain.l_list = 6, 12\ndomain.nx = 48\ndomain.ny = 16\n",
    );
    let out = dir.join("out");
    let status = nozzle()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("NOZZLE_THREADS", "2")
        .status()
        .unwrap();
    assert!(status.success());
    let table = std::fs::read_to_string(out.join("sweep.tsv")).unwrap();
    let data: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 1, "one pair expected:\n{table}");
    let cols: Vec<f64> = data[0]
        .split('\t')
        .map(|t| t.parse::<f64>().unwrap())
        .collect();
    for v in &cols[3..] {
        assert!(*v <= 1e-12, "background sweep differences must vanish: {cols:?}");
    }
}

#[test]
fn decay_table_written() {
    let dir = temp_dir("decay");
    let cfg = write_config(
        &dir,
        "run.cfg",
        "inlet.a_v = 0.01\ndomain.l = 8\ndomain.nx = 64\ndomain.ny = 16\n",
    );
    let out = dir.join("out");
    assert!(nozzle()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let status = nozzle()
        .args(["decay", "--solution"])
        .arg(&out)
        .args(["--windows", "4"])
        .status()
        .unwrap();
    assert!(status.success());
    let table = std::fs::read_to_string(out.join("decay.tsv")).unwrap();
    let rows = table.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 4);
}

#[test]
fn guard_failure_exits_3_with_report() {
    let dir = temp_dir("guard");
    let cfg = write_config(
        &dir,
        "run.cfg",
        "inlet.a_v = 0.3\ndomain.l = 8\ndomain.nx = 64\ndomain.ny = 16\n",
    );
    let out = dir.join("out");
    let output = nozzle()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let report = std::fs::read_to_string(out.join("report.tsv")).unwrap();
    assert!(report.contains("status\tguard_error"), "{report}");
    assert!(report.contains("first_failure"));
}

#[test]
fn deterministic_outputs() {
    let dir = temp_dir("det");
    let cfg = write_config(
        &dir,
        "run.cfg",
        "inlet.a_s = 0.01\ninlet.a_v = 0.01\ndomain.l = 6\ndomain.nx = 48\ndomain.ny = 16\n",
    );
    let (out_a, out_b) = (dir.join("a"), dir.join("b"));
    for out in [&out_a, &out_b] {
        assert!(nozzle()
            .args(["solve", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap()
            .success());
    }
    for name in ["solution.tsv", "boundary.tsv", "report.tsv"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} must be byte-identical across runs");
    }
}
