//! Experiment orchestration: ε-sweeps, the forced difference problem,
//! the 2D scaling benchmark and figure data sets.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bathymetry::{regularize, DepthProfile};
use crate::diagnostics::{detect_reflection, IncidentPulse, ReflectionReport};
use crate::error::{invalid, Error, Result};
use crate::fields::{fmt17, l2_difference, l2_norm, step_count, WaveField};
use crate::solver1d::{assemble_operator, run_1d, InitialData, SimConfig1D, Stepper};
use crate::solver2d::{run_2d, SimConfig2D};

/// ε values used for the Case 1 comparison at `t = 5`.
pub const FIGURE_LADDER: [f64; 6] = [0.02, 0.05, 0.1, 0.2, 0.5, 0.8];

/// Time and space steps for Lorentzian data, which the default steps
/// cannot resolve for `e` down to 0.1.
pub const LORENTZIAN_DT: f64 = 0.00025;
pub const LORENTZIAN_DX: f64 = 0.0025;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDifference {
    pub eps_a: f64,
    pub eps_b: f64,
    pub t: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub ladder: Vec<f64>,
    pub times: Vec<f64>,
    pub pairs: Vec<PairDifference>,
    /// Differences between neighbours of the ladder sorted in decreasing
    /// order, one row per time.
    pub consecutive: Vec<Vec<f64>>,
    /// Every row of `consecutive` strictly decreases.
    pub monotone: bool,
}

impl ConvergenceReport {
    /// `‖u_a(t) − u_b(t)‖`, in either order.
    pub fn diff(&self, a: f64, b: f64, t: f64) -> Option<f64> {
        let same = |x: f64, y: f64| (x - y).abs() < 1e-12;
        self.pairs
            .iter()
            .find(|p| {
                same(p.t, t)
                    && ((same(p.eps_a, a) && same(p.eps_b, b))
                        || (same(p.eps_a, b) && same(p.eps_b, a)))
            })
            .map(|p| p.l2)
    }

    /// Largest pairwise difference among `subset` at `t`.
    pub fn max_diff(&self, subset: &[f64], t: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, &a) in subset.iter().enumerate() {
            for &b in &subset[i + 1..] {
                let d = self.diff(a, b, t)?;
                best = Some(best.map_or(d, |m: f64| m.max(d)));
            }
        }
        best
    }
}

/// Runs `base` once per ε (concurrently) and collects all pairwise `L²`
/// differences at `times`.
pub fn sweep_epsilon(
    base: &SimConfig1D,
    ladder: &[f64],
    times: &[f64],
) -> Result<ConvergenceReport> {
    if ladder.len() < 2 {
        return Err(invalid("an ε sweep needs at least two values"));
    }
    if times.is_empty() {
        return Err(invalid("an ε sweep needs at least one evaluation time"));
    }
    let t_final = times.iter().copied().fold(0.0, f64::max);
    let runs: Vec<Vec<WaveField>> = ladder
        .par_iter()
        .map(|&eps| {
            let mut cfg = base.clone();
            cfg.eps = eps;
            cfg.t_final = t_final;
            cfg.snapshots = times.to_vec();
            let run = run_1d(&cfg)?;
            times
                .iter()
                .map(|&t| {
                    run.at(t)
                        .cloned()
                        .ok_or_else(|| invalid(format!("missing snapshot t={t}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        for i in 0..ladder.len() {
            for j in i + 1..ladder.len() {
                let l2 = l2_difference(&runs[i][k], &runs[j][k])?;
                pairs.push(PairDifference {
                    eps_a: ladder[i],
                    eps_b: ladder[j],
                    t,
                    l2,
                });
            }
        }
    }

    let mut order: Vec<usize> = (0..ladder.len()).collect();
    order.sort_by(|&a, &b| ladder[b].total_cmp(&ladder[a]));
    let consecutive: Vec<Vec<f64>> = (0..times.len())
        .map(|k| {
            order
                .windows(2)
                .map(|w| l2_difference(&runs[w[0]][k], &runs[w[1]][k]))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let monotone = consecutive
        .iter()
        .all(|row| row.windows(2).all(|w| w[1] < w[0]));
    Ok(ConvergenceReport {
        ladder: ladder.to_vec(),
        times: times.to_vec(),
        pairs,
        consecutive,
        monotone,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceCheck {
    pub eps1: f64,
    pub eps2: f64,
    pub t: f64,
    /// `‖U_direct − (u_ε1 − u_ε2)‖` at `t`.
    pub discrepancy: f64,
    /// `‖u_ε1 − u_ε2‖` at `t`.
    pub difference_norm: f64,
    /// Hull of the midpoints where `H = h_ε1 − h_ε2` is nonzero.
    pub forcing_support: Option<(f64, f64)>,
}

/// Solves `U_tt − ∂x(h_ε1 ∂x U) = ∂x(H ∂x u_ε2)`, `H = h_ε1 − h_ε2`, with
/// zero data alongside the two regularized problems and compares `U` with
/// `u_ε1 − u_ε2` at `config.t_final`.
pub fn difference_problem_check(
    eps1: f64,
    eps2: f64,
    config: &SimConfig1D,
) -> Result<DifferenceCheck> {
    let mut c1 = config.clone();
    c1.eps = eps1;
    c1.validate()?;
    let mut c2 = config.clone();
    c2.eps = eps2;
    c2.validate()?;
    let grid = config.grid()?;
    let op1 = assemble_operator(&regularize(&config.profile, eps1)?, &grid)?;
    let op2 = assemble_operator(&regularize(&config.profile, eps2)?, &grid)?;
    let op_h = op1.difference(&op2)?;
    let forcing_support = {
        let nz: Vec<usize> = (0..op_h.midpoints().len())
            .filter(|&i| op_h.midpoints()[i] != 0.0)
            .collect();
        nz.first()
            .zip(nz.last())
            .map(|(&a, &b)| (grid.midpoint(a), grid.midpoint(b)))
    };

    let dt = config.dt;
    let a = 0.5 * dt * dt;
    let steps = step_count(config.t_final, dt)?;
    let u0 = config.initial.sample(&grid);
    let zero = vec![0.0; grid.nx];

    let mut s1 = Stepper::new(op1, dt);
    let mut s2 = Stepper::new(op2, dt);
    let mut sd = Stepper::new(
        assemble_operator(&regularize(&config.profile, eps1)?, &grid)?,
        dt,
    );
    s1.start(&u0, &zero, None);
    s2.start(&u0, &zero, None);
    sd.start(&zero, &zero, Some(&op_h.apply(&u0)));

    let mut source = vec![0.0; grid.nx];
    let mut sum = vec![0.0; grid.nx];
    for _ in 1..steps {
        let older = s2.previous().to_vec();
        s1.advance()?;
        s2.advance()?;
        for i in 0..grid.nx {
            sum[i] = s2.current()[i] + older[i];
        }
        op_h.apply_into(&sum, &mut source);
        source.iter_mut().for_each(|v| *v *= a);
        sd.advance_with_source(Some(&source))?;
    }
    let routes: Vec<f64> = s1
        .current()
        .iter()
        .zip(s2.current())
        .map(|(x, y)| x - y)
        .collect();
    let gap: Vec<f64> = routes
        .iter()
        .zip(sd.current())
        .map(|(r, d)| r - d)
        .collect();
    Ok(DifferenceCheck {
        eps1,
        eps2,
        t: config.t_final,
        discrepancy: l2_norm(&gap, &grid)?,
        difference_norm: l2_norm(&routes, &grid)?,
        forcing_support,
    })
}

/// Reference timings for the same experiment on a GPU:
/// `(n, cpu seconds, gpu seconds, speedup)`. Not reproducible on a CPU pool.
pub const REFERENCE_TIMINGS: [(usize, f64, f64, f64); 5] = [
    (256, 0.91, 0.88, 1.03),
    (512, 3.73, 2.07, 1.8),
    (1024, 15.92, 7.16, 2.22),
    (2048, 64.8, 20.30, 3.19),
    (4096, 280.54, 62.76, 4.47),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n: usize,
    pub serial_seconds: f64,
    pub parallel_seconds: f64,
    pub speedup: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingTable {
    pub steps: usize,
    pub repetitions: usize,
    pub hardware_threads: usize,
    pub rows: Vec<TimingRow>,
}

impl TimingTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut s = String::from("n,serial_s,parallel_s,speedup,threads\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                fmt17(r.serial_seconds),
                fmt17(r.parallel_seconds),
                fmt17(r.speedup),
                r.threads
            ));
        }
        fs::write(path, s)?;
        Ok(())
    }

    /// Speedups never decrease with grid size.
    pub fn speedup_nondecreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].speedup >= w[0].speedup)
    }
}

impl fmt::Display for TimingTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>6} {:>12} {:>12} {:>8} {:>7}",
            "n", "serial [s]", "parallel [s]", "speedup", "threads"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>6} {:>12.4} {:>12.4} {:>8.3} {:>7}",
                r.n, r.serial_seconds, r.parallel_seconds, r.speedup, r.threads
            )?;
        }
        Ok(())
    }
}

pub fn hardware_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Times `steps` steps of the 2D solver per size on one thread and on
/// `threads` threads; each cell is the median of `repetitions` runs after
/// one untimed warm-up.
pub fn benchmark(
    sizes: &[usize],
    threads: usize,
    steps: usize,
    repetitions: usize,
) -> Result<TimingTable> {
    if steps < 10 {
        return Err(invalid(format!(
            "benchmark needs at least 10 steps, got {steps}"
        )));
    }
    if threads == 0 || repetitions == 0 {
        return Err(invalid("threads and repetitions must be at least 1"));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut cfg = SimConfig2D::new(n, 0.8, steps as f64 * 0.05);
        cfg.snapshots = Vec::new();
        cfg.record_energy = false;
        cfg.grid()?.node_count_checked()?;
        let mut time = |threads: usize| -> Result<f64> {
            cfg.threads = threads;
            run_2d(&cfg)?;
            let mut samples = Vec::with_capacity(repetitions);
            for _ in 0..repetitions {
                let start = Instant::now();
                run_2d(&cfg)?;
                samples.push(start.elapsed().as_secs_f64());
            }
            Ok(median(samples))
        };
        let serial = time(1)?;
        let parallel = time(threads)?;
        rows.push(TimingRow {
            n,
            serial_seconds: serial,
            parallel_seconds: parallel,
            speedup: serial / parallel,
            threads,
        });
    }
    Ok(TimingTable {
        steps,
        repetitions,
        hardware_threads: hardware_threads(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FigureId {
    Initial,
    Evolution,
    EpsilonCase1,
    Case2,
    Case3,
    Lorentzian05,
    Lorentzian03,
    Lorentzian01,
    Surface2D,
}

impl FigureId {
    pub const ALL: [FigureId; 9] = [
        FigureId::Initial,
        FigureId::Evolution,
        FigureId::EpsilonCase1,
        FigureId::Case2,
        FigureId::Case3,
        FigureId::Lorentzian05,
        FigureId::Lorentzian03,
        FigureId::Lorentzian01,
        FigureId::Surface2D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Initial => "1",
            FigureId::Evolution => "2",
            FigureId::EpsilonCase1 => "3",
            FigureId::Case2 => "4",
            FigureId::Case3 => "5",
            FigureId::Lorentzian05 => "6a",
            FigureId::Lorentzian03 => "6b",
            FigureId::Lorentzian01 => "6c",
            FigureId::Surface2D => "6",
        }
    }

    fn lorentzian_width(self) -> Option<f64> {
        match self {
            FigureId::Lorentzian05 => Some(0.5),
            FigureId::Lorentzian03 => Some(0.3),
            FigureId::Lorentzian01 => Some(0.1),
            _ => None,
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| {
                Error::InvalidFigure(format!("unknown figure '{s}', expected 1-6, 6a, 6b or 6c"))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub kind: String,
    pub params: serde_json::Value,
}

/// Record written next to every output set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub config: serde_json::Value,
    pub started: String,
    pub finished: String,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    pub fn begin(experiment: &str, config: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            config,
            started: now(),
            finished: String::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn add(&mut self, path: &Path, kind: &str, params: serde_json::Value) {
        self.artifacts.push(Artifact {
            path: path.to_path_buf(),
            kind: kind.to_string(),
            params,
        });
    }

    /// Stamps the finish time and writes `manifest.json` into `dir`.
    pub fn finish(&mut self, dir: &Path) -> Result<PathBuf> {
        self.finished = now();
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(Error::from)
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Writes `x,<column>` samples of `f` on `[0, 100]` with spacing `dx`.
pub fn write_profile_csv(path: &Path, column: &str, dx: f64, f: impl Fn(f64) -> f64) -> Result<()> {
    let n = (100.0 / dx).round() as usize;
    let mut s = format!("x,{column}\n");
    for i in 0..=n {
        let x = i as f64 * dx;
        s.push_str(&format!("{},{}\n", fmt17(x), fmt17(f(x))));
    }
    fs::write(path, s)?;
    Ok(())
}

fn snapshot_name(prefix: &str, t: f64) -> String {
    format!("{prefix}u_t{t:.2}.csv")
}

fn run_and_dump(
    cfg: &SimConfig1D,
    dir: &Path,
    prefix: &str,
    manifest: &mut RunManifest,
) -> Result<crate::solver1d::Run1D> {
    let run = run_1d(cfg)?;
    for s in &run.snapshots {
        let path = dir.join(snapshot_name(prefix, s.t));
        s.write_csv(&path)?;
        manifest.add(
            &path,
            "snapshot",
            serde_json::json!({ "eps": cfg.eps, "t": s.t }),
        );
    }
    Ok(run)
}

/// Writes the data behind figure `id` into `out/fig<id>/` and returns the
/// manifest (also written there).
pub fn reproduce_figure(id: FigureId, out: &Path) -> Result<RunManifest> {
    let dir = out.join(format!("fig{id}"));
    fs::create_dir_all(&dir)?;
    let mut m = RunManifest::begin(
        &format!("fig{id}"),
        serde_json::json!({ "figure": id.name() }),
    );
    match id {
        FigureId::Initial => {
            let p = DepthProfile::case1();
            let h = regularize(&p, 1.0)?;
            let path = dir.join("u0.csv");
            write_profile_csv(&path, "u0", 0.005, |x| InitialData::Gaussian.eval(x))?;
            m.add(&path, "profile", serde_json::json!({ "u0": "gaussian" }));
            let path = dir.join("depth.csv");
            write_profile_csv(&path, "minus_h0", 0.005, |x| -p.segment_depth(x))?;
            m.add(&path, "profile", serde_json::json!({ "case": 1 }));
            let path = dir.join("h_eps.csv");
            write_profile_csv(&path, "h_eps", 0.005, |x| h.eval(x))?;
            m.add(
                &path,
                "profile",
                serde_json::json!({ "case": 1, "eps": 1.0 }),
            );
        }
        FigureId::Evolution => {
            let mut cfg = SimConfig1D::new(DepthProfile::case1(), 0.2, 5.0);
            cfg.snapshots = vec![1.15, 3.0, 3.25, 3.55, 4.1, 5.0];
            let run = run_and_dump(&cfg, &dir, "", &mut m)?;
            let path = dir.join("energy.csv");
            run.energy.write_csv(&path)?;
            m.add(&path, "energy", serde_json::json!({ "eps": 0.2 }));
            m.config = serde_json::to_value(&cfg)?;
        }
        FigureId::EpsilonCase1 => {
            let base = SimConfig1D::new(DepthProfile::case1(), 0.2, 5.0);
            sweep_figure(&base, &FIGURE_LADDER, &[5.0], &dir, &mut m)?;
            m.config = serde_json::to_value(&base)?;
        }
        FigureId::Case2 => {
            let mut cfg = SimConfig1D::new(DepthProfile::case2(1.0)?, 0.2, 4.0);
            cfg.snapshots = vec![3.0, 3.5, 4.0];
            run_and_dump(&cfg, &dir, "eps0.2_", &mut m)?;
            sweep_figure(&cfg, &[0.8, 0.5, 0.2], &[4.0], &dir, &mut m)?;
            m.config = serde_json::to_value(&cfg)?;
        }
        FigureId::Case3 => {
            let base = SimConfig1D::new(DepthProfile::case3(1.0)?, 0.2, 4.3);
            sweep_figure(&base, &[0.8, 0.5, 0.2], &[3.8, 4.3], &dir, &mut m)?;
            let mut long = base.clone();
            long.t_final = 10.0;
            long.snapshots = vec![7.5, 10.0];
            run_and_dump(&long, &dir, "eps0.2_", &mut m)?;
            m.config = serde_json::to_value(&base)?;
        }
        FigureId::Lorentzian05 | FigureId::Lorentzian03 | FigureId::Lorentzian01 => {
            let e = id.lorentzian_width().expect("lorentzian figure");
            let initial = InitialData::Lorentzian { e };
            let path = dir.join("u0.csv");
            write_profile_csv(&path, "u0", LORENTZIAN_DX, |x| initial.eval(x))?;
            m.add(
                &path,
                "profile",
                serde_json::json!({ "u0": "lorentzian", "e": e }),
            );
            let mut reports = Vec::new();
            for case in 1..=3u8 {
                let cfg = lorentzian_config(case, e)?;
                let run = run_and_dump(&cfg, &dir, &format!("case{case}_"), &mut m)?;
                let last = run.snapshots.last().ok_or_else(|| invalid("no snapshot"))?;
                reports.push(reflection_report(last, &cfg)?);
            }
            let path = dir.join("reflection.json");
            write_json(&path, &reports)?;
            m.add(
                &path,
                "reflection",
                serde_json::json!({ "cases": [1, 2, 3] }),
            );
            m.config = serde_json::to_value(lorentzian_config(1, e)?)?;
        }
        FigureId::Surface2D => {
            let mut cfg = SimConfig2D::new(512, 0.8, 5.0);
            cfg.snapshots = vec![2.5, 5.0];
            cfg.threads = hardware_threads();
            let run = run_2d(&cfg)?;
            for s in &run.snapshots {
                let path = dir.join(format!("u_t{:.2}.bin", s.t));
                s.write_bin(&path)?;
                m.add(
                    &path,
                    "snapshot2d",
                    serde_json::json!({ "eps": cfg.eps, "t": s.t, "n": cfg.n }),
                );
            }
            let path = dir.join("energy.csv");
            run.energy.write_csv(&path)?;
            m.add(&path, "energy", serde_json::json!({ "eps": cfg.eps }));
            m.config = serde_json::to_value(&cfg)?;
        }
    }
    m.finish(&dir)?;
    Ok(m)
}

fn sweep_figure(
    base: &SimConfig1D,
    ladder: &[f64],
    times: &[f64],
    dir: &Path,
    m: &mut RunManifest,
) -> Result<()> {
    let t_final = times.iter().copied().fold(0.0, f64::max);
    for &eps in ladder {
        let mut cfg = base.clone();
        cfg.eps = eps;
        cfg.t_final = t_final;
        cfg.snapshots = times.to_vec();
        run_and_dump(&cfg, dir, &format!("eps{eps}_"), m)?;
    }
    let report = sweep_epsilon(base, ladder, times)?;
    let path = dir.join("convergence.json");
    write_json(&path, &report)?;
    m.add(
        &path,
        "convergence",
        serde_json::json!({ "ladder": ladder, "times": times }),
    );
    Ok(())
}

/// Lorentzian-data run used for the reflected-wave study: `ε = 0.2`,
/// singular amplitude 100, snapshots at `t = 2.5` and `t = 5`.
pub fn lorentzian_config(case: u8, e: f64) -> Result<SimConfig1D> {
    let mut cfg = SimConfig1D::new(DepthProfile::builtin(case, 100.0)?, 0.2, 5.0);
    cfg.dt = LORENTZIAN_DT;
    cfg.dx = LORENTZIAN_DX;
    cfg.initial = InitialData::Lorentzian { e };
    cfg.snapshots = vec![2.5, 5.0];
    Ok(cfg)
}

/// Reflected-wave report for a run from the left of the depth jump, with
/// the analysis window ending one unit before the jump.
pub fn reflection_report(snapshot: &WaveField, cfg: &SimConfig1D) -> Result<ReflectionReport> {
    let jump = cfg
        .profile
        .jumps()
        .first()
        .map(|j| j.0)
        .ok_or_else(|| invalid("profile has no depth jump"))?;
    let x0 = cfg.initial.peak_location();
    let speed = cfg.profile.segment_depth(x0).sqrt();
    let incident = IncidentPulse {
        x_peak0: x0,
        speed,
        amplitude0: cfg.initial.peak_amplitude(),
    };
    detect_reflection(snapshot, jump, 1.0, incident, Some(cfg.eps))
}
