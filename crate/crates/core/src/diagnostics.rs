//! Quantitative reports: energy series, reflected-wave structure, peak
//! sharpness and moderateness exponents.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bathymetry::{moderateness_norms, DepthProfile, RegularizedDepth};
use crate::error::{Error, Result};
use crate::fields::{fmt17, h1_seminorm, l2_norm, Grid, Grid1D, WaveField};
use crate::solver1d::{assemble_operator, FluxOperator};

/// Three-level invariant `E^{n+1/2}` at `t = (n + 1/2)·dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEnergy {
    pub n: usize,
    pub t: f64,
    pub energy: f64,
}

/// Centered estimate of `‖u_t‖² + ‖h^{1/2} ∂x u‖²` at `t = n·dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousEnergy {
    pub n: usize,
    pub t: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

impl ContinuousEnergy {
    /// From levels `[u^{n-1}, u^n, u^{n+1}]`: `u_t` by centered difference,
    /// potential with the operator's midpoint weights.
    pub fn from_levels(n: usize, t: f64, levels: [&[f64]; 3], op: &FluxOperator, dt: f64) -> Self {
        let grid = op.grid();
        let kinetic = levels[2]
            .iter()
            .zip(levels[0])
            .enumerate()
            .filter(|(k, _)| grid.weighted(*k))
            .map(|(_, (a, b))| {
                let d = (a - b) / (2.0 * dt);
                d * d
            })
            .sum::<f64>()
            * grid.dx;
        let potential = op.energy_form(levels[1], levels[1]);
        ContinuousEnergy {
            n,
            t,
            kinetic,
            potential,
            total: kinetic + potential,
        }
    }
}

/// Energy history of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub discrete: Vec<DiscreteEnergy>,
    pub continuous: Vec<ContinuousEnergy>,
}

fn relative_drift(values: impl Iterator<Item = f64>) -> f64 {
    let mut values = values.peekable();
    let Some(&first) = values.peek() else {
        return 0.0;
    };
    let worst = values.map(|v| (v - first).abs()).fold(0.0, f64::max);
    if first == 0.0 {
        if worst == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        worst / first.abs()
    }
}

impl EnergyReport {
    /// `max_n |E^{n+1/2} - E^{1/2}| / E^{1/2}`.
    pub fn discrete_drift(&self) -> f64 {
        relative_drift(self.discrete.iter().map(|e| e.energy))
    }

    /// Relative drift of the centered estimate over entries with `t >= from`.
    pub fn continuous_drift(&self, from: f64) -> f64 {
        relative_drift(
            self.continuous
                .iter()
                .filter(|e| e.t >= from - 1e-12)
                .map(|e| e.total),
        )
    }

    /// `n,t,E` rows of the discrete invariant.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "n,t,E")?;
        for e in &self.discrete {
            writeln!(w, "{},{},{}", e.n, fmt17(e.t), fmt17(e.energy))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn finite_nonnegative(entries: &[ContinuousEnergy]) -> bool {
    entries
        .iter()
        .all(|e| e.total.is_finite() && e.kinetic >= 0.0 && e.potential >= -1e-12)
}

/// Centered energy from three consecutive snapshots on the same grid.
pub fn continuous_energy(
    window: &[&[f64]],
    depth: &RegularizedDepth,
    grid: &Grid1D,
    dt: f64,
) -> Result<ContinuousEnergy> {
    if window.len() < 3 {
        return Err(Error::InsufficientSnapshots {
            needed: 3,
            got: window.len(),
        });
    }
    for w in window {
        if w.len() != grid.nx {
            return Err(Error::Shape {
                expected: grid.nx,
                found: w.len(),
            });
        }
    }
    let op = assemble_operator(depth, grid)?;
    Ok(ContinuousEnergy::from_levels(
        0,
        0.0,
        [window[0], window[1], window[2]],
        &op,
        dt,
    ))
}

/// Where the incident pulse started and how fast it moves on the near side
/// of the interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentPulse {
    pub x_peak0: f64,
    pub speed: f64,
    pub amplitude0: f64,
}

/// Fraction of the initial amplitude above which a region counts as a wave.
pub const THRESHOLD_FRACTION: f64 = 0.01;
/// Same-sign regions closer than this many cells are merged.
pub const MERGE_CELLS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub time: f64,
    /// Earliest time a reflection can exist in the window.
    pub interaction_time: f64,
    pub window: (f64, f64),
    pub threshold: f64,
    pub detected: bool,
    pub peak_position: f64,
    pub amplitude: f64,
    pub positive_components: usize,
    pub negative_components: usize,
    /// `max |Δ²u|/dx²` near the reflected peak; `None` without a reflection
    /// or when no sharpness window was requested.
    pub sharpness: Option<f64>,
    pub incident_position: f64,
    pub incident_amplitude: f64,
    pub incident_sharpness: Option<f64>,
}

/// Counts same-sign super-threshold runs after merging runs separated by
/// fewer than [`MERGE_CELLS`] cells. Returns `(positive, negative)`.
pub fn count_sign_components(u: &[f64], threshold: f64) -> (usize, usize) {
    let count = |sign: f64| {
        let mut count = 0;
        let mut last_end: Option<usize> = None;
        let mut inside = false;
        for (i, &v) in u.iter().enumerate() {
            let above = sign * v > threshold;
            if above && !inside {
                let merged = last_end.is_some_and(|e| i - e < MERGE_CELLS);
                if !merged {
                    count += 1;
                }
                inside = true;
            } else if !above && inside {
                last_end = Some(i);
                inside = false;
            }
        }
        count
    };
    (count(1.0), count(-1.0))
}

/// Analyzes the part of `snapshot` between the left-going incident pulse and
/// the interface: `[x_peak0 - c·t + margin, x_interface - margin]`. Before
/// the incident peak reaches the interface nothing can have been reflected
/// and the report is empty. `sharpness_half_width` (typically ε) enables the
/// sharpness fields.
pub fn detect_reflection(
    snapshot: &WaveField,
    x_interface: f64,
    margin: f64,
    incident: IncidentPulse,
    sharpness_half_width: Option<f64>,
) -> Result<ReflectionReport> {
    if !(margin > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "margin must be positive, got {margin}"
        )));
    }
    let grid = &snapshot.grid;
    let t = snapshot.t;
    let interaction_time = (x_interface - incident.x_peak0) / incident.speed;
    // The left-going half bounces off the wall at x0; follow its image.
    let left_going = grid.x0 + (incident.x_peak0 - incident.speed * t - grid.x0).abs();
    let lo = (left_going + margin).max(grid.x0);
    let hi = (x_interface - margin).min(grid.x1);
    let threshold = THRESHOLD_FRACTION * incident.amplitude0.abs();
    let idx: Vec<usize> = (0..grid.nx)
        .filter(|&i| (lo..=hi).contains(&grid.x(i)))
        .collect();
    if idx.is_empty() {
        return Err(Error::EmptyWindow(format!(
            "[{lo}, {hi}] contains no grid nodes"
        )));
    }

    let incident_position = incident.x_peak0 - incident.speed * t;
    let near_incident: Vec<usize> = (0..grid.nx)
        .filter(|&i| (grid.x(i) - incident_position).abs() <= margin)
        .collect();
    let incident_peak = near_incident
        .iter()
        .copied()
        .max_by(|&a, &b| snapshot.u[a].abs().total_cmp(&snapshot.u[b].abs()));
    let (incident_position, incident_amplitude) = incident_peak
        .map(|i| (grid.x(i), snapshot.u[i].abs()))
        .unwrap_or((incident_position, 0.0));
    let incident_sharpness = match (sharpness_half_width, incident_peak) {
        (Some(w), Some(_)) => sharpness(snapshot, incident_position, w).ok(),
        _ => None,
    };

    let mut report = ReflectionReport {
        time: t,
        interaction_time,
        window: (lo, hi),
        threshold,
        detected: false,
        peak_position: f64::NAN,
        amplitude: 0.0,
        positive_components: 0,
        negative_components: 0,
        sharpness: None,
        incident_position,
        incident_amplitude,
        incident_sharpness,
    };
    if t <= interaction_time {
        return Ok(report);
    }

    let values: Vec<f64> = idx.iter().map(|&i| snapshot.u[i]).collect();
    let (k, amp) = values
        .iter()
        .enumerate()
        .map(|(k, v)| (k, v.abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty window");
    let (pos, neg) = count_sign_components(&values, threshold);
    report.peak_position = grid.x(idx[k]);
    report.amplitude = amp;
    report.positive_components = pos;
    report.negative_components = neg;
    report.detected = amp > threshold;
    if let (Some(w), true) = (sharpness_half_width, report.detected) {
        report.sharpness = Some(sharpness(snapshot, report.peak_position, w)?);
    }
    Ok(report)
}

/// `max |u_{i+1} - 2u_i + u_{i-1}|/dx²` over `[peak - half_width, peak + half_width]`.
pub fn sharpness(snapshot: &WaveField, peak: f64, half_width: f64) -> Result<f64> {
    let grid = &snapshot.grid;
    let (lo, hi) = (peak - half_width, peak + half_width);
    if lo <= grid.x0 || hi >= grid.x1 {
        return Err(Error::WindowClipped { lo, hi });
    }
    let first = ((lo - grid.x0) / grid.dx).ceil().max(1.0) as usize;
    let last = (((hi - grid.x0) / grid.dx).floor() as usize).min(grid.nx - 2);
    if first > last {
        return Err(Error::EmptyWindow(format!(
            "[{lo}, {hi}] is narrower than one cell"
        )));
    }
    let u = &snapshot.u;
    Ok((first..=last)
        .map(|i| (u[i + 1] - 2.0 * u[i] + u[i - 1]).abs())
        .fold(0.0, f64::max)
        / (grid.dx * grid.dx))
}

/// Least-squares fit of `log norm = N·log(1/ε) + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

pub fn fit_moderateness(ladder: &[f64], norms: &[f64]) -> Result<ExponentFit> {
    if ladder.len() != norms.len() {
        return Err(Error::Shape {
            expected: ladder.len(),
            found: norms.len(),
        });
    }
    if ladder.len() < 3 {
        return Err(Error::DegenerateLadder(format!(
            "need >= 3 points, got {}",
            ladder.len()
        )));
    }
    if ladder
        .iter()
        .chain(norms)
        .any(|v| !(*v > 0.0 && v.is_finite()))
    {
        return Err(Error::DegenerateLadder(
            "eps values and norms must be positive".into(),
        ));
    }
    let xs: Vec<f64> = ladder.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx < 1e-24 {
        return Err(Error::DegenerateLadder("all eps values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - exponent * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ExponentFit {
        exponent,
        intercept,
        residual,
    })
}

/// Fitted growth exponents of the coefficient (`n0`) and data (`n1`, `n2`)
/// norms along a regularization ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeratenessReport {
    pub ladder: Vec<f64>,
    pub coefficient_norms: Vec<f64>,
    pub n0: ExponentFit,
    pub n1: ExponentFit,
    pub n2: ExponentFit,
}

/// `n0` from `max(sup|h_ε|, sup|h_ε'|)`; the data are not regularized, so
/// `n1` (from `‖u0‖_{H¹}`) and `n2` (from `‖u1‖_{L²}`, `u1 ≡ 0`, taken as 1) are flat.
pub fn moderateness_report(
    profile: &DepthProfile,
    ladder: &[f64],
    u0: &[f64],
    grid: &Grid1D,
) -> Result<ModeratenessReport> {
    let coefficient_norms = ladder
        .iter()
        .map(|&e| moderateness_norms(profile, e).map(|n| n.w1_inf()))
        .collect::<Result<Vec<_>>>()?;
    let h1 = h1_norm(u0, grid)?;
    let data1 = vec![h1.max(f64::MIN_POSITIVE); ladder.len()];
    let data2 = vec![1.0; ladder.len()];
    Ok(ModeratenessReport {
        ladder: ladder.to_vec(),
        n0: fit_moderateness(ladder, &coefficient_norms)?,
        n1: fit_moderateness(ladder, &data1)?,
        n2: fit_moderateness(ladder, &data2)?,
        coefficient_norms,
    })
}

/// `‖u‖_{H¹} = (‖u‖² + ‖∂x u‖²)^{1/2}`.
pub fn h1_norm(u: &[f64], grid: &Grid1D) -> Result<f64> {
    let l2 = l2_norm(u, grid)?;
    let d = h1_seminorm(u, grid)?;
    Ok((l2 * l2 + d * d).sqrt())
}

/// `[‖u‖ + ‖u_t‖ + ‖∂x u‖] / [(1 + ‖h‖_∞^{1/2})(‖u0‖_{H¹} + ‖u1‖)]`, the
/// quantity bounded by a constant in the a-priori energy estimate.
pub fn energy_estimate_ratio(field: &WaveField, h_sup: f64, u0: &[f64], u1: &[f64]) -> Result<f64> {
    let g = &field.grid;
    let num = l2_norm(&field.u, g)? + l2_norm(&field.v, g)? + h1_seminorm(&field.u, g)?;
    let den = (1.0 + h_sup.sqrt()) * (h1_norm(u0, g)? + l2_norm(u1, g)?);
    Ok(num / den)
}
