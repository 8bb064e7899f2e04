//! End-to-end checks of the `vwwave` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vwwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vwwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn names(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn simulate_1d_writes_snapshots_energy_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = vwwave(&[
        "simulate-1d",
        "--case",
        "1",
        "--eps",
        "0.2",
        "--t",
        "5",
        "--snapshots",
        "1.15,3.0,3.25,3.55,4.1,5.0",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files = names(&dir.path().join("simulate-1d"));
    assert_eq!(
        files,
        [
            "energy.csv",
            "manifest.json",
            "u_t1.15.csv",
            "u_t3.00.csv",
            "u_t3.25.csv",
            "u_t3.55.csv",
            "u_t4.10.csv",
            "u_t5.00.csv",
        ]
    );
    let energy = fs::read_to_string(dir.path().join("simulate-1d/energy.csv")).unwrap();
    assert!(energy.starts_with("n,t,E\n"));
    assert_eq!(energy.lines().count(), 101);
    let snap = fs::read_to_string(dir.path().join("simulate-1d/u_t1.15.csv")).unwrap();
    assert!(snap.starts_with("# t=1.15"));
    assert_eq!(snap.lines().count(), 20_003);
}

#[test]
fn rejects_out_of_range_eps() {
    let dir = tempfile::tempdir().unwrap();
    let o = vwwave(&[
        "simulate-1d",
        "--eps",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(0,1]"), "{}", stderr(&o));
    let o = vwwave(&["regularize", "--eps", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_figure_id_and_unknown_flags_exit_2() {
    assert_eq!(vwwave(&["reproduce", "--fig", "7"]).status.code(), Some(2));
    assert_eq!(vwwave(&["simulate-1d", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        vwwave(&["simulate-1d", "--case", "4"]).status.code(),
        Some(2)
    );
}

#[test]
fn help_lists_units_and_defaults() {
    let o = vwwave(&["simulate-1d", "--help"]);
    let text = stdout(&o);
    for flag in [
        "--case",
        "--profile",
        "--amp",
        "--u0",
        "--e",
        "--eps",
        "--dt",
        "--dx",
        "--t",
        "--snapshots",
        "--out",
    ] {
        assert!(text.contains(flag), "missing {flag}");
    }
    assert!(text.contains("default: 0.05"), "{text}");
    assert!(text.contains("default: 0.005"), "{text}");
    let o = vwwave(&["simulate-2d", "--help"]);
    let text = stdout(&o);
    for flag in ["--threads", "--format", "--n"] {
        assert!(text.contains(flag), "missing {flag}");
    }
}

#[test]
fn regularize_reports_the_delta_peak() {
    let dir = tempfile::tempdir().unwrap();
    let o = vwwave(&[
        "regularize",
        "--case",
        "2",
        "--eps",
        "0.2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("regularize/h_eps.csv")).unwrap();
    let (x, h) = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap())
        })
        .fold((0.0, f64::NEG_INFINITY), |best, p| {
            if p.1 > best.1 {
                p
            } else {
                best
            }
        });
    assert!((h - 104.14).abs() < 0.01, "{h}");
    assert!((x - 70.0).abs() < 1e-9, "{x}");
}

#[test]
fn config_precedence_flags_over_file_over_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"eps": 0.5, "dt": 0.1, "t_final": 0.5}"#).unwrap();
    let out = dir.path().join("o");
    let o = vwwave(&[
        "simulate-1d",
        "--config",
        cfg.to_str().unwrap(),
        "--dt",
        "0.05",
        "--dx",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("simulate-1d/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m["config"]["eps"], 0.5);
    assert_eq!(m["config"]["dt"], 0.05);
    assert_eq!(m["config"]["dx"], 0.05);
    assert_eq!(m["config"]["t_final"], 0.5);
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let o = vwwave(&[
        "simulate-1d",
        "--case",
        "3",
        "--eps",
        "0.3",
        "--dx",
        "0.02",
        "--t",
        "2",
        "--snapshots",
        "1,2",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let second = dir.path().join("b");
    let manifest = first.join("simulate-1d/manifest.json");
    let o = vwwave(&[
        "simulate-1d",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (a, b) = (first.join("simulate-1d"), second.join("simulate-1d"));
    assert_eq!(names(&a), names(&b));
    for f in names(&a).into_iter().filter(|f| f.ends_with(".csv")) {
        assert_eq!(
            fs::read(a.join(&f)).unwrap(),
            fs::read(b.join(&f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn diagnose_reads_a_snapshot_and_emits_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = vwwave(&[
        "simulate-1d",
        "--case",
        "1",
        "--u0",
        "lorentzian",
        "--e",
        "0.5",
        "--dt",
        "0.005",
        "--dx",
        "0.005",
        "--t",
        "5",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let snap = dir.path().join("simulate-1d/u_t5.00.csv");
    let o = vwwave(&[
        "diagnose",
        "--input",
        snap.to_str().unwrap(),
        "--case",
        "1",
        "--u0",
        "lorentzian",
        "--e",
        "0.5",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["detected"], true);
    assert_eq!(report["time"], 5.0);
    assert!(dir.path().join("diagnose/reflection.json").exists());
    assert!(dir.path().join("diagnose/manifest.json").exists());
}

#[test]
fn sweep_writes_a_convergence_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = vwwave(&[
        "sweep",
        "--case",
        "1",
        "--eps",
        "0.2,0.5,0.8",
        "--t",
        "1",
        "--dx",
        "0.02",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("sweep/convergence.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(r["pairs"].as_array().unwrap().len(), 3);
    assert_eq!(r["ladder"].as_array().unwrap().len(), 3);
}

#[test]
fn simulate_2d_binary_dump_and_bench_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = vwwave(&[
        "simulate-2d",
        "--n",
        "32",
        "--t",
        "1",
        "--snapshots",
        "1",
        "--threads",
        "2",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dump = vwwave_core::fields::read_bin(&dir.path().join("simulate-2d/u_t1.00.bin")).unwrap();
    assert_eq!((dump.nx, dump.ny, dump.t), (33, 33, 1.0));
    assert_eq!(dump.u.len(), 33 * 33);

    let o = vwwave(&[
        "bench",
        "--sizes",
        "16,32",
        "--threads",
        "2",
        "--steps",
        "10",
        "--reps",
        "1",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("bench/timing.csv")).unwrap();
    assert!(csv.starts_with("n,serial_s,parallel_s,speedup,threads\n"));
    assert_eq!(csv.lines().count(), 3);
}
