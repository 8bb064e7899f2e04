//! Command-line front end. Settings resolve as flags, then `--config`
//! JSON, then built-in defaults.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::bathymetry::{regularize, DepthProfile};
use crate::error::{invalid, Error, Result};
use crate::fields::{fmt17, WaveField};
use crate::harness::{
    benchmark, hardware_threads, reflection_report, reproduce_figure, sweep_epsilon, write_json,
    write_profile_csv, FigureId, RunManifest,
};
use crate::solver1d::{run_1d, InitialData, SimConfig1D, DEFAULT_DT, DEFAULT_DX};
use crate::solver2d::{run_2d, LineSolver, SimConfig2D, YBoundary};

#[derive(Debug, Parser)]
#[command(
    name = "vwwave",
    version,
    about = "Wave propagation over regularized rough bathymetry"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the 1D solver and write snapshots, the energy series and a manifest.
    #[command(name = "simulate-1d")]
    Simulate1d(Sim1dArgs),
    /// Run the 2D solver and write snapshots, the energy series and a manifest.
    #[command(name = "simulate-2d")]
    Simulate2d(Sim2dArgs),
    /// Compare 1D runs across a list of ε values.
    Sweep(SweepArgs),
    /// Time the 2D solver on one thread and on a thread pool.
    Bench(BenchArgs),
    /// Sample the regularized depth h_ε on [0, 100].
    Regularize(RegularizeArgs),
    /// Analyse the reflected wave in a 1D snapshot CSV.
    Diagnose(DiagnoseArgs),
    /// Write the data set behind one figure (1-6, 6a, 6b, 6c).
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitialKind {
    /// 40·exp(-(x-40)²/8)
    Gaussian,
    /// e/((x-60)² + e²)
    Lorentzian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Bin,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    /// Built-in depth profile: 1 step (100 | 10 at x=75), 2 adds amp·δ(x-70), 3 adds amp·δ²(x-70) [default: 1]
    #[arg(long = "case", value_parser = clap::value_parser!(u8).range(1..=3))]
    pub case: Option<u8>,
    /// Depth profile JSON file {"segments":[{from,to,depth}],"singular":[{loc,amp,order}]} [m]
    #[arg(long, conflicts_with = "case")]
    pub profile: Option<PathBuf>,
    /// Amplitude of the singular term in cases 2 and 3 [m²; default: 1]
    #[arg(long)]
    pub amp: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct InitialArgs {
    /// Initial displacement [default: gaussian]
    #[arg(long, value_enum)]
    pub u0: Option<InitialKind>,
    /// Lorentzian width e [m; default: 0.5]
    #[arg(long)]
    pub e: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct Sim1dArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[command(flatten)]
    pub initial: InitialArgs,
    /// Regularization parameter ε in (0,1] [m; default: 0.2]
    #[arg(long, value_parser = parse_eps)]
    pub eps: Option<f64>,
    /// Time step [s; default: 0.05]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Grid spacing [m; default: 0.005]
    #[arg(long)]
    pub dx: Option<f64>,
    /// Final time [s; default: 5]
    #[arg(long = "t")]
    pub t_final: Option<f64>,
    /// Comma-separated snapshot times, multiples of dt [s; default: final time]
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    /// JSON config (a SimConfig1D object, possibly partial, or a manifest)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output root; files go to <out>/simulate-1d/
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct Sim2dArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Regularization parameter ε in (0,1] [m; default: 0.8]
    #[arg(long, value_parser = parse_eps)]
    pub eps: Option<f64>,
    /// Time step [s; default: 0.05]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Cells per axis; dx = dy = 100/n [default: 256]
    #[arg(long)]
    pub n: Option<usize>,
    /// Final time [s; default: 5]
    #[arg(long = "t")]
    pub t_final: Option<f64>,
    /// Comma-separated snapshot times [s; default: 2.5,5]
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    /// Worker threads [default: available hardware threads]
    #[arg(long)]
    pub threads: Option<usize>,
    /// Boundary condition on y = 0 and y = 100 [default: dirichlet]
    #[arg(long, value_parser = parse_y_boundary)]
    pub y_boundary: Option<YBoundary>,
    /// Line solver [default: cyclic-reduction]
    #[arg(long, value_parser = parse_line_solver)]
    pub line_solver: Option<LineSolver>,
    /// Snapshot format: csv (x,y,u) or bin (VWW2 dump) [default: bin]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON config (a SimConfig2D object, possibly partial, or a manifest)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output root; files go to <out>/simulate-2d/
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[command(flatten)]
    pub initial: InitialArgs,
    /// Comma-separated ε values, each in (0,1] [m; default: 0.02,0.05,0.1,0.2,0.5,0.8]
    #[arg(long, value_delimiter = ',', value_parser = parse_eps)]
    pub eps: Option<Vec<f64>>,
    /// Comma-separated evaluation times [s; default: 5]
    #[arg(long = "t", value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Time step [s; default: 0.05]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Grid spacing [m; default: 0.005]
    #[arg(long)]
    pub dx: Option<f64>,
    /// Output root; files go to <out>/sweep/
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated cells per axis [default: 256,512,1024,2048]
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Threads for the parallel column [default: available hardware threads]
    #[arg(long)]
    pub threads: Option<usize>,
    /// Time steps per timed run, at least 10
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Timed repetitions per cell; the median is reported
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Output root; files go to <out>/bench/
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RegularizeArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Regularization parameter ε in (0,1] [m; default: 0.2]
    #[arg(long, value_parser = parse_eps)]
    pub eps: Option<f64>,
    /// Sample spacing [m; default: 0.005]
    #[arg(long)]
    pub dx: Option<f64>,
    /// Output root; files go to <out>/regularize/
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    /// Snapshot CSV written by simulate-1d
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[command(flatten)]
    pub initial: InitialArgs,
    /// ε of the run; sets the sharpness half-window [m; default: 0.2]
    #[arg(long, value_parser = parse_eps)]
    pub eps: Option<f64>,
    /// Output root; the report goes to <out>/diagnose/reflection.json
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    /// Figure id: 1, 2, 3, 4, 5, 6, 6a, 6b or 6c
    #[arg(long)]
    pub fig: FigureId,
    /// Output root; files go to <out>/fig<id>/
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn parse_eps(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|e| format!("'{s}' is not a number: {e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("eps must lie in (0,1], got {v}"))
    }
}

fn parse_y_boundary(s: &str) -> std::result::Result<YBoundary, String> {
    match s {
        "dirichlet" => Ok(YBoundary::Dirichlet),
        "neumann" => Ok(YBoundary::Neumann),
        _ => Err(format!("expected dirichlet or neumann, got '{s}'")),
    }
}

fn parse_line_solver(s: &str) -> std::result::Result<LineSolver, String> {
    match s {
        "cyclic-reduction" => Ok(LineSolver::CyclicReduction),
        "thomas" => Ok(LineSolver::Thomas),
        "cross-checked" => Ok(LineSolver::CrossChecked),
        _ => Err(format!(
            "expected cyclic-reduction, thomas or cross-checked, got '{s}'"
        )),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 2 on bad input, 1 on failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter(_)
                | Error::InvalidFigure(_)
                | Error::Parse { .. }
                | Error::Json(_) => 2,
                _ => 1,
            }
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate1d(a) => cmd_simulate_1d(&a).map(|_| ()),
        Command::Simulate2d(a) => cmd_simulate_2d(&a).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(&a).map(|_| ()),
        Command::Bench(a) => cmd_bench(&a).map(|_| ()),
        Command::Regularize(a) => cmd_regularize(&a).map(|_| ()),
        Command::Diagnose(a) => cmd_diagnose(&a).map(|_| ()),
        Command::Reproduce(a) => {
            let m = reproduce_figure(a.fig, &a.out)?;
            println!(
                "figure {}: {} artifacts under {}",
                a.fig,
                m.artifacts.len(),
                a.out.display()
            );
            Ok(())
        }
    }
}

fn merge(base: &mut serde_json::Value, overlay: serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if k != "profile" && k != "initial" => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// `defaults` overlaid with the JSON in `path`; a manifest contributes its
/// `config` member.
fn load_config<T: Serialize + DeserializeOwned>(defaults: &T, path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(serde_json::from_value(serde_json::to_value(defaults)?)?);
    };
    let text = fs::read_to_string(path)?;
    let mut overlay: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    if overlay.get("artifacts").is_some() {
        overlay = overlay.get("config").cloned().unwrap_or_default();
    }
    let mut base = serde_json::to_value(defaults)?;
    merge(&mut base, overlay);
    serde_json::from_value(base).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn resolve_profile(args: &ProfileArgs) -> Result<Option<DepthProfile>> {
    if let Some(path) = &args.profile {
        let text = fs::read_to_string(path)?;
        return DepthProfile::from_json(&text)
            .map(Some)
            .map_err(|e| Error::Parse {
                path: path.clone(),
                msg: e.to_string(),
            });
    }
    if args.case.is_some() || args.amp.is_some() {
        return DepthProfile::builtin(args.case.unwrap_or(1), args.amp.unwrap_or(1.0)).map(Some);
    }
    Ok(None)
}

fn resolve_initial(args: &InitialArgs, current: &InitialData) -> InitialData {
    match (args.u0, current) {
        (Some(InitialKind::Gaussian), _) => InitialData::Gaussian,
        (Some(InitialKind::Lorentzian), InitialData::Lorentzian { e })
        | (None, InitialData::Lorentzian { e }) => InitialData::Lorentzian {
            e: args.e.unwrap_or(*e),
        },
        (Some(InitialKind::Lorentzian), _) => InitialData::Lorentzian {
            e: args.e.unwrap_or(0.5),
        },
        (None, other) => other.clone(),
    }
}

/// Keeps snapshot times inside `[0, t_final]` and always includes `t_final`.
fn clamp_snapshots(snapshots: &mut Vec<f64>, t_final: f64) {
    snapshots.retain(|&t| t <= t_final + 1e-9);
    if !snapshots.iter().any(|&t| (t - t_final).abs() < 1e-9) {
        snapshots.push(t_final);
    }
}

fn warn_under_resolved(cfg: &SimConfig1D) {
    if let InitialData::Lorentzian { e } = cfg.initial {
        let c = cfg
            .profile
            .segment_depth(cfg.initial.peak_location())
            .sqrt();
        if c * cfg.dt > 0.5 * e || cfg.dx > 0.1 * e {
            eprintln!(
                "warning: dt={} and dx={} do not resolve a Lorentzian of width e={e}; \
                 try --dt {} --dx {}",
                cfg.dt,
                cfg.dx,
                crate::harness::LORENTZIAN_DT,
                crate::harness::LORENTZIAN_DX
            );
        }
    }
}

pub fn resolve_sim1d(a: &Sim1dArgs) -> Result<SimConfig1D> {
    let defaults = SimConfig1D::new(DepthProfile::case1(), 0.2, 5.0);
    let mut cfg = load_config(&defaults, a.config.as_deref())?;
    if let Some(p) = resolve_profile(&a.profile)? {
        cfg.profile = p;
    }
    cfg.initial = resolve_initial(&a.initial, &cfg.initial);
    cfg.eps = a.eps.unwrap_or(cfg.eps);
    cfg.dt = a.dt.unwrap_or(cfg.dt);
    cfg.dx = a.dx.unwrap_or(cfg.dx);
    cfg.t_final = a.t_final.unwrap_or(cfg.t_final);
    match &a.snapshots {
        Some(s) => cfg.snapshots = s.clone(),
        None => clamp_snapshots(&mut cfg.snapshots, cfg.t_final),
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Prints a line to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn experiment_dir(out: &Path, name: &str) -> Result<PathBuf> {
    let dir = out.join(name);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn cmd_simulate_1d(a: &Sim1dArgs) -> Result<RunManifest> {
    let cfg = resolve_sim1d(a)?;
    warn_under_resolved(&cfg);
    let dir = experiment_dir(&a.out, "simulate-1d")?;
    let mut m = RunManifest::begin("simulate-1d", serde_json::to_value(&cfg)?);
    let run = run_1d(&cfg)?;
    for s in &run.snapshots {
        let path = dir.join(format!("u_t{:.2}.csv", s.t));
        s.write_csv(&path)?;
        m.add(&path, "snapshot", serde_json::json!({ "t": s.t }));
    }
    let path = dir.join("energy.csv");
    run.energy.write_csv(&path)?;
    m.add(
        &path,
        "energy",
        serde_json::json!({ "drift": run.energy.discrete_drift() }),
    );
    m.finish(&dir)?;
    println!(
        "simulate-1d: {} snapshots, discrete energy drift {:.3e}, output in {}",
        run.snapshots.len(),
        run.energy.discrete_drift(),
        dir.display()
    );
    Ok(m)
}

pub fn resolve_sim2d(a: &Sim2dArgs) -> Result<SimConfig2D> {
    let mut defaults = SimConfig2D::new(256, 0.8, 5.0);
    defaults.snapshots = vec![2.5, 5.0];
    defaults.threads = hardware_threads();
    let mut cfg = load_config(&defaults, a.config.as_deref())?;
    if let Some(p) = resolve_profile(&a.profile)? {
        cfg.profile = p;
    }
    cfg.eps = a.eps.unwrap_or(cfg.eps);
    cfg.dt = a.dt.unwrap_or(cfg.dt);
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.t_final = a.t_final.unwrap_or(cfg.t_final);
    cfg.threads = a.threads.unwrap_or(cfg.threads);
    cfg.y_boundary = a.y_boundary.unwrap_or(cfg.y_boundary);
    cfg.line_solver = a.line_solver.unwrap_or(cfg.line_solver);
    match &a.snapshots {
        Some(s) => cfg.snapshots = s.clone(),
        None => clamp_snapshots(&mut cfg.snapshots, cfg.t_final),
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_simulate_2d(a: &Sim2dArgs) -> Result<RunManifest> {
    let cfg = resolve_sim2d(a)?;
    let dir = experiment_dir(&a.out, "simulate-2d")?;
    let mut m = RunManifest::begin("simulate-2d", serde_json::to_value(&cfg)?);
    let run = run_2d(&cfg)?;
    for s in &run.snapshots {
        let path = match a.format.unwrap_or(Format::Bin) {
            Format::Csv => {
                let p = dir.join(format!("u_t{:.2}.csv", s.t));
                s.write_csv(&p)?;
                p
            }
            Format::Bin => {
                let p = dir.join(format!("u_t{:.2}.bin", s.t));
                s.write_bin(&p)?;
                p
            }
        };
        m.add(
            &path,
            "snapshot2d",
            serde_json::json!({ "t": s.t, "n": cfg.n }),
        );
    }
    let path = dir.join("energy.csv");
    run.energy.write_csv(&path)?;
    m.add(
        &path,
        "energy",
        serde_json::json!({ "drift": run.energy.discrete_drift() }),
    );
    m.finish(&dir)?;
    println!(
        "simulate-2d: {}x{} grid, {} snapshots, energy drift {:.3e}, output in {}",
        cfg.n,
        cfg.n,
        run.snapshots.len(),
        run.energy.discrete_drift(),
        dir.display()
    );
    Ok(m)
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<RunManifest> {
    let mut base = SimConfig1D::new(
        resolve_profile(&a.profile)?.unwrap_or_else(DepthProfile::case1),
        0.2,
        5.0,
    );
    base.initial = resolve_initial(&a.initial, &base.initial);
    base.dt = a.dt.unwrap_or(DEFAULT_DT);
    base.dx = a.dx.unwrap_or(DEFAULT_DX);
    let ladder = a
        .eps
        .clone()
        .unwrap_or_else(|| crate::harness::FIGURE_LADDER.to_vec());
    let times = a.times.clone().unwrap_or_else(|| vec![5.0]);
    base.t_final = times.iter().copied().fold(0.0, f64::max);
    base.snapshots = times.clone();
    base.validate()?;
    let dir = experiment_dir(&a.out, "sweep")?;
    let mut m = RunManifest::begin(
        "sweep",
        serde_json::json!({ "base": serde_json::to_value(&base)?, "ladder": ladder, "times": times }),
    );
    let report = sweep_epsilon(&base, &ladder, &times)?;
    let path = dir.join("convergence.json");
    write_json(&path, &report)?;
    m.add(
        &path,
        "convergence",
        serde_json::json!({ "monotone": report.monotone }),
    );
    m.finish(&dir)?;
    println!(
        "sweep: {} pairs, monotone={}, report {}",
        report.pairs.len(),
        report.monotone,
        path.display()
    );
    Ok(m)
}

pub fn cmd_bench(a: &BenchArgs) -> Result<RunManifest> {
    let sizes = a
        .sizes
        .clone()
        .unwrap_or_else(|| vec![256, 512, 1024, 2048]);
    let threads = a.threads.unwrap_or_else(hardware_threads);
    let dir = experiment_dir(&a.out, "bench")?;
    let mut m = RunManifest::begin(
        "bench",
        serde_json::json!({ "sizes": sizes, "threads": threads, "steps": a.steps, "repetitions": a.reps }),
    );
    let table = benchmark(&sizes, threads, a.steps, a.reps)?;
    let csv = dir.join("timing.csv");
    table.write_csv(&csv)?;
    m.add(&csv, "timing", serde_json::json!({}));
    let json = dir.join("timing.json");
    write_json(&json, &table)?;
    m.add(&json, "timing", serde_json::json!({}));
    m.finish(&dir)?;
    emit(table.to_string().trim_end());
    Ok(m)
}

pub fn cmd_regularize(a: &RegularizeArgs) -> Result<RunManifest> {
    let profile = resolve_profile(&a.profile)?.unwrap_or_else(DepthProfile::case1);
    let eps = a.eps.unwrap_or(0.2);
    let dx = a.dx.unwrap_or(DEFAULT_DX);
    if !(dx > 0.0 && dx <= 100.0) {
        return Err(invalid(format!("dx must lie in (0,100], got {dx}")));
    }
    let h = regularize(&profile, eps)?;
    let dir = experiment_dir(&a.out, "regularize")?;
    let mut m = RunManifest::begin(
        "regularize",
        serde_json::json!({ "profile": serde_json::to_value(&profile)?, "eps": eps, "dx": dx }),
    );
    let path = dir.join("h_eps.csv");
    write_profile_csv(&path, "h", dx, |x| h.eval(x))?;
    m.add(&path, "profile", serde_json::json!({ "eps": eps }));
    m.finish(&dir)?;
    let n = (100.0 / dx).round() as usize;
    let (xm, hm) = (0..=n)
        .map(|i| (i as f64 * dx, h.eval(i as f64 * dx)))
        .fold((0.0, f64::NEG_INFINITY), |best, p| {
            if p.1 > best.1 {
                p
            } else {
                best
            }
        });
    println!(
        "regularize: max h_eps = {} at x = {}, samples in {}",
        fmt17(hm),
        fmt17(xm),
        path.display()
    );
    Ok(m)
}

pub fn cmd_diagnose(a: &DiagnoseArgs) -> Result<RunManifest> {
    let snapshot = WaveField::read_csv(&a.input)?;
    let mut cfg = SimConfig1D::new(
        resolve_profile(&a.profile)?.unwrap_or_else(DepthProfile::case1),
        0.2,
        5.0,
    );
    cfg.initial = resolve_initial(&a.initial, &cfg.initial);
    cfg.eps = a.eps.unwrap_or(cfg.eps);
    let report = reflection_report(&snapshot, &cfg)?;
    let dir = experiment_dir(&a.out, "diagnose")?;
    let mut m = RunManifest::begin(
        "diagnose",
        serde_json::json!({ "input": a.input, "profile": serde_json::to_value(&cfg.profile)?,
                            "initial": serde_json::to_value(&cfg.initial)?, "eps": cfg.eps }),
    );
    let path = dir.join("reflection.json");
    write_json(&path, &report)?;
    m.add(&path, "reflection", serde_json::json!({ "t": report.time }));
    m.finish(&dir)?;
    emit(&serde_json::to_string_pretty(&report)?);
    Ok(m)
}
