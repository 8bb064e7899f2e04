//! Solver, diagnostic and harness invariants on full simulations.

use vwwave_core::bathymetry::{moderateness_norms, DepthProfile, Segment};
use vwwave_core::diagnostics::{detect_reflection, energy_estimate_ratio, IncidentPulse};
use vwwave_core::fields::l2_norm;
use vwwave_core::harness::{
    benchmark, difference_problem_check, reproduce_figure, sweep_epsilon, FigureId, RunManifest,
};
use vwwave_core::solver1d::{run_1d, InitialData, SimConfig1D};
use vwwave_core::solver2d::{run_2d, LineSolver, SimConfig2D};

fn flat(depth: f64) -> DepthProfile {
    DepthProfile::new(
        vec![Segment {
            from: 0.0,
            to: 100.0,
            depth,
        }],
        vec![],
    )
    .unwrap()
}

fn right_peak_error(dt: f64) -> f64 {
    let mut cfg = SimConfig1D::new(flat(100.0), 0.2, 1.15);
    cfg.dt = dt;
    cfg.snapshots = vec![1.15];
    let run = run_1d(&cfg).unwrap();
    let s = run.at(1.15).unwrap();
    let (i, _) =
        s.u.iter()
            .enumerate()
            .filter(|(i, _)| s.grid.x(*i) > 40.0)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
    (s.grid.x(i) - 51.5).abs()
}

#[test]
fn constant_depth_peak_lag_is_second_order_in_dt() {
    let errs: Vec<f64> = [0.05, 0.025, 0.0125]
        .iter()
        .map(|&dt| right_peak_error(dt))
        .collect();
    assert!(
        errs[0] / errs[1] > 3.0 && errs[1] / errs[2] > 3.0,
        "{errs:?}"
    );
    assert!(errs[2] <= 0.1, "{errs:?}");
}

#[test]
fn continuous_energy_drift_is_second_order_in_dt() {
    let drift = |dt: f64| {
        let mut cfg = SimConfig1D::new(DepthProfile::case1(), 0.2, 5.0);
        cfg.dt = dt;
        cfg.snapshots = vec![5.0];
        run_1d(&cfg).unwrap().energy.continuous_drift(0.0)
    };
    let d: Vec<f64> = [0.05, 0.025, 0.0125].iter().map(|&dt| drift(dt)).collect();
    assert!(d[0] / d[1] > 3.0 && d[1] / d[2] > 3.0, "{d:?}");
}

#[test]
fn halving_dx_barely_changes_the_solution() {
    let norm = |dx: f64| {
        let mut cfg = SimConfig1D::new(DepthProfile::case1(), 0.2, 5.0);
        cfg.dx = dx;
        cfg.snapshots = vec![5.0];
        let run = run_1d(&cfg).unwrap();
        let s = run.at(5.0).unwrap();
        l2_norm(&s.u, &s.grid).unwrap()
    };
    let (a, b) = (norm(0.005), norm(0.0025));
    assert!((a - b).abs() / a < 0.01, "{a} vs {b}");
}

#[test]
fn mirrored_problem_has_mirrored_solution() {
    let segments = vec![
        Segment {
            from: 0.0,
            to: 30.0,
            depth: 100.0,
        },
        Segment {
            from: 30.0,
            to: 70.0,
            depth: 40.0,
        },
        Segment {
            from: 70.0,
            to: 100.0,
            depth: 100.0,
        },
    ];
    let profile = DepthProfile::new(segments, vec![]).unwrap();
    assert_eq!(profile.reflected(), profile);
    let mut left = SimConfig1D::new(profile, 0.3, 5.0);
    left.dx = 0.02;
    left.initial = InitialData::Pulse {
        amplitude: 10.0,
        center: 35.0,
        spread: 4.0,
    };
    left.snapshots = vec![2.5, 5.0];
    let mut right = left.clone();
    right.initial = InitialData::Pulse {
        amplitude: 10.0,
        center: 65.0,
        spread: 4.0,
    };
    let (a, b) = (run_1d(&left).unwrap(), run_1d(&right).unwrap());
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        let worst =
            sa.u.iter()
                .zip(sb.u.iter().rev())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "t={}: {worst}", sa.t);
    }
}

#[test]
fn energy_estimate_ratio_stays_bounded() {
    let mut worst = 0.0f64;
    for case in 1..=3u8 {
        for eps in [0.05, 0.1, 0.2, 0.5, 0.8] {
            let profile = DepthProfile::builtin(case, 1.0).unwrap();
            let h_sup = moderateness_norms(&profile, eps).unwrap().sup;
            let mut cfg = SimConfig1D::new(profile, eps, 5.0);
            cfg.snapshots = (0..=10).map(|k| k as f64 * 0.5).collect();
            let grid = cfg.grid().unwrap();
            let u0 = cfg.initial.sample(&grid);
            let u1 = vec![0.0; grid.nx];
            for s in &run_1d(&cfg).unwrap().snapshots {
                worst = worst.max(energy_estimate_ratio(s, h_sup, &u0, &u1).unwrap());
            }
        }
    }
    println!("largest energy-estimate ratio: {worst:.4}");
    assert!(worst < 10.0, "{worst}");
}

#[test]
fn disturbance_stays_inside_the_light_cone() {
    // u0 < 4e-5 beyond |x-40| = 10.5; at speed 10 nothing reaches x = 65 before t = 1.45.
    let mut cfg = SimConfig1D::new(DepthProfile::case1(), 0.2, 1.0);
    cfg.snapshots = vec![0.5, 1.0];
    let run = run_1d(&cfg).unwrap();
    for s in &run.snapshots {
        let far = (0..s.grid.nx)
            .filter(|&i| s.grid.x(i) >= 65.0 || s.grid.x(i) <= 15.0)
            .map(|i| s.u[i].abs())
            .fold(0.0, f64::max);
        assert!(far <= 1e-6 * 40.0, "t={}: {far}", s.t);
    }
}

#[test]
fn reflected_amplitude_grows_after_interaction() {
    // Once the reflected pulse is inside the window its exact amplitude is constant, so the
    // monotonicity check allows the O(dt²) dispersive decay of the plateau.
    let mut cfg = SimConfig1D::new(DepthProfile::case1(), 0.2, 5.0);
    cfg.dt = 0.0125;
    cfg.snapshots = (0..=6).map(|k| 3.5 + 0.25 * k as f64).collect();
    let run = run_1d(&cfg).unwrap();
    let incident = IncidentPulse {
        x_peak0: 40.0,
        speed: 10.0,
        amplitude0: 40.0,
    };
    // margin of three standard deviations keeps the incident tails out of the window
    let amps: Vec<f64> = run
        .snapshots
        .iter()
        .map(|s| {
            detect_reflection(s, 75.0, 6.0, incident, None)
                .unwrap()
                .amplitude
        })
        .collect();
    assert!(
        amps.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-3)),
        "{amps:?}"
    );
    let r = (10.0 - 10f64.sqrt()) / (10.0 + 10f64.sqrt());
    let plateau = *amps.last().unwrap();
    assert!(
        (plateau - 20.0 * r).abs() / (20.0 * r) < 0.02,
        "{amps:?} vs {}",
        20.0 * r
    );
}

#[test]
fn line_solvers_agree_on_every_system() {
    let mut cfg = SimConfig2D::new(64, 0.8, 5.0);
    cfg.line_solver = LineSolver::CrossChecked;
    cfg.snapshots = vec![5.0];
    let run = run_2d(&cfg).unwrap();
    let d = run.max_line_discrepancy.unwrap();
    assert!(d <= 1e-9, "{d}");
}

#[test]
fn two_d_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SimConfig2D::new(64, 0.5, 2.0);
    cfg.snapshots = vec![1.0, 2.0];
    cfg.threads = 2;
    let write = |tag: &str, cfg: &SimConfig2D| {
        let run = run_2d(cfg).unwrap();
        run.snapshots
            .iter()
            .map(|s| {
                let path = dir.path().join(format!("{tag}_{}.csv", s.t));
                s.write_csv(&path).unwrap();
                std::fs::read(path).unwrap()
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(write("a", &cfg), write("b", &cfg));

    let a = run_2d(&cfg).unwrap();
    cfg.threads = 3;
    let b = run_2d(&cfg).unwrap();
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        let worst =
            sa.u.iter()
                .zip(&sb.u)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
        assert!(worst <= 1e-12, "{worst}");
    }
}

#[test]
fn two_d_energy_drift_and_boundary() {
    let mut cfg = SimConfig2D::new(512, 0.8, 5.0);
    cfg.snapshots = vec![2.5, 5.0];
    cfg.threads = vwwave_core::harness::hardware_threads();
    let run = run_2d(&cfg).unwrap();
    let drift = run.energy.discrete_drift();
    assert!(drift <= 1e-3, "{drift}");
    let n = cfg.n;
    for s in &run.snapshots {
        for k in 0..=n {
            for idx in [
                s.grid.index(k, 0),
                s.grid.index(k, n),
                s.grid.index(0, k),
                s.grid.index(n, k),
            ] {
                assert_eq!(s.u[idx], 0.0);
            }
        }
    }
}

#[test]
fn difference_route_matches_across_pairs() {
    let base = SimConfig1D::new(DepthProfile::case1(), 0.2, 5.0);
    let ladder = [0.05, 0.1, 0.2, 0.5];
    for (i, &e1) in ladder.iter().enumerate() {
        for &e2 in &ladder[i + 1..] {
            let c = difference_problem_check(e1, e2, &base).unwrap();
            assert!(c.discrepancy <= 1e-6, "({e1},{e2}): {}", c.discrepancy);
            let (lo, hi) = c.forcing_support.unwrap();
            assert!(lo >= 75.0 - e1.max(e2) - 0.01 && hi <= 75.0 + e1.max(e2) + 0.01);
        }
    }
}

#[test]
fn halving_epsilon_shrinks_successive_differences() {
    let ladder: Vec<f64> = (0..4).map(|k| 0.4 * 0.5f64.powi(k)).collect();
    for case in 1..=2u8 {
        let base = SimConfig1D::new(DepthProfile::builtin(case, 1.0).unwrap(), 0.2, 5.0);
        let report = sweep_epsilon(&base, &ladder, &[5.0]).unwrap();
        assert!(report.monotone, "case {case}: {:?}", report.consecutive);
    }
}

#[test]
fn repeated_epsilon_has_zero_difference() {
    let base = SimConfig1D::new(DepthProfile::case1(), 0.2, 1.0);
    let report = sweep_epsilon(&base, &[0.3, 0.3], &[1.0]).unwrap();
    assert_eq!(report.diff(0.3, 0.3, 1.0), Some(0.0));
}

#[test]
fn benchmark_table_is_well_formed() {
    let table = benchmark(&[32, 64], 1, 10, 1).unwrap();
    assert_eq!(table.rows.len(), 2);
    for r in &table.rows {
        assert_eq!(r.threads, 1);
        assert!(r.serial_seconds > 0.0 && r.parallel_seconds > 0.0);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("timings.csv");
    table.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("n,serial_s,parallel_s,speedup,threads\n"));
    assert_eq!(text.lines().count(), 3);
    assert!(benchmark(&[32], 1, 5, 1).is_err());
}

#[test]
fn figure_data_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let m = reproduce_figure(FigureId::Initial, dir.path()).unwrap();
    assert_eq!(m.artifacts.len(), 3);
    let back = RunManifest::read(&dir.path().join("fig1/manifest.json")).unwrap();
    assert_eq!(back.artifacts.len(), 3);
    for a in &back.artifacts {
        assert!(a.path.exists(), "{}", a.path.display());
    }

    let m = reproduce_figure(FigureId::EpsilonCase1, dir.path()).unwrap();
    assert_eq!(m.artifacts.len(), 7);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("fig3/convergence.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["ladder"].as_array().unwrap().len(), 6);
    assert!("6z".parse::<FigureId>().is_err());
}
