//! Three-level Crank–Nicolson scheme for `u_tt = ∂x(h_ε ∂x u)` on `[0, 100]`
//! with homogeneous Dirichlet ends:
//!
//! ```text
//! (u^{n+1} - 2u^n + u^{n-1}) / dt² = A (u^{n+1} + u^{n-1}) / 2
//! ```
//!
//! where `A` is the flux-form operator with `h_ε` sampled at cell midpoints.
//! Taking the inner product with `u^{n+1} - u^{n-1}` shows that
//! `E^{n+1/2} = ‖(u^{n+1}-u^n)/dt‖² + ½[a(u^{n+1},u^{n+1}) + a(u^n,u^n)]`
//! is constant, which the run loop records every step.

use serde::{Deserialize, Serialize};

use crate::bathymetry::{regularize, DepthProfile, RegularizedDepth, DOMAIN_END, DOMAIN_START};
use crate::diagnostics::{self, ContinuousEnergy, DiscreteEnergy, EnergyReport};
use crate::error::{invalid, Error, Result};
use crate::fields::{step_count, Grid, Grid1D, WaveField};
use crate::tridiag::{thomas_into, TridiagonalSystem};

/// Default time step.
pub const DEFAULT_DT: f64 = 0.05;
/// Default grid spacing.
pub const DEFAULT_DX: f64 = 0.005;

/// Initial displacement; the initial velocity is always zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialData {
    /// `40·exp(-(x-40)²/8)`.
    Gaussian,
    /// `e/((x-60)² + e²)`.
    Lorentzian {
        e: f64,
    },
    /// `amplitude·exp(-(x-center)²/spread)`.
    Pulse {
        amplitude: f64,
        center: f64,
        spread: f64,
    },
    Zero,
}

impl InitialData {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialData::Gaussian => 40.0 * (-(x - 40.0) * (x - 40.0) / 8.0).exp(),
            InitialData::Lorentzian { e } => e / ((x - 60.0) * (x - 60.0) + e * e),
            InitialData::Pulse {
                amplitude,
                center,
                spread,
            } => amplitude * (-(x - center) * (x - center) / spread).exp(),
            InitialData::Zero => 0.0,
        }
    }

    /// Location of the initial maximum.
    pub fn peak_location(&self) -> f64 {
        match *self {
            InitialData::Gaussian => 40.0,
            InitialData::Lorentzian { .. } => 60.0,
            InitialData::Pulse { center, .. } => center,
            InitialData::Zero => 0.5 * (DOMAIN_START + DOMAIN_END),
        }
    }

    pub fn peak_amplitude(&self) -> f64 {
        self.eval(self.peak_location())
    }

    /// Nodal samples with the Dirichlet ends pinned to zero.
    pub fn sample(&self, grid: &Grid1D) -> Vec<f64> {
        let mut u: Vec<f64> = grid.nodes().into_iter().map(|x| self.eval(x)).collect();
        u[0] = 0.0;
        *u.last_mut().expect("nx >= 3") = 0.0;
        u
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialData::Lorentzian { e } if !(e > 0.0) => Err(invalid(format!(
                "Lorentzian width e must be positive, got {e}"
            ))),
            InitialData::Pulse { spread, .. } if !(spread > 0.0) => Err(invalid(format!(
                "pulse spread must be positive, got {spread}"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig1D {
    pub profile: DepthProfile,
    pub eps: f64,
    pub dt: f64,
    pub dx: f64,
    pub t_final: f64,
    pub initial: InitialData,
    pub snapshots: Vec<f64>,
}

impl SimConfig1D {
    /// Case 1 step, Gaussian data, default resolution, snapshot at `t_final`.
    pub fn new(profile: DepthProfile, eps: f64, t_final: f64) -> Self {
        SimConfig1D {
            profile,
            eps,
            dt: DEFAULT_DT,
            dx: DEFAULT_DX,
            t_final,
            initial: InitialData::Gaussian,
            snapshots: vec![t_final],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dt", self.dt),
            ("dx", self.dx),
            ("T", self.t_final),
            ("eps", self.eps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.eps > 1.0 {
            return Err(invalid(format!("eps must lie in (0,1], got {}", self.eps)));
        }
        step_count(self.t_final, self.dt)?;
        for &t in &self.snapshots {
            if !(0.0..=self.t_final + 1e-9).contains(&t) {
                return Err(invalid(format!(
                    "snapshot time {t} outside [0, {}]",
                    self.t_final
                )));
            }
            step_count(t, self.dt)?;
        }
        self.initial.validate()?;
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::with_spacing(DOMAIN_START, DOMAIN_END, self.dx)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// `(A u)_i = [h_{i+1/2}(u_{i+1}-u_i) - h_{i-1/2}(u_i-u_{i-1})]/dx²` on
/// interior nodes, zero on the Dirichlet ends.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxOperator {
    grid: Grid1D,
    /// Coefficient at the midpoint of cell `i` (between nodes `i`, `i+1`).
    midpoint: Vec<f64>,
}

pub fn assemble_operator(depth: &RegularizedDepth, grid: &Grid1D) -> Result<FluxOperator> {
    if (grid.x0 - DOMAIN_START).abs() > 1e-12 || (grid.x1 - DOMAIN_END).abs() > 1e-9 {
        return Err(invalid(format!(
            "grid [{}, {}] must cover [{DOMAIN_START}, {DOMAIN_END}]",
            grid.x0, grid.x1
        )));
    }
    let midpoint = (0..grid.nx - 1)
        .map(|i| depth.eval(grid.midpoint(i)))
        .collect();
    Ok(FluxOperator {
        grid: *grid,
        midpoint,
    })
}

impl FluxOperator {
    /// Operator with explicitly given midpoint coefficients (length `nx - 1`).
    pub fn from_midpoints(grid: Grid1D, midpoint: Vec<f64>) -> Result<Self> {
        if midpoint.len() + 1 != grid.nx {
            return Err(Error::Shape {
                expected: grid.nx - 1,
                found: midpoint.len(),
            });
        }
        Ok(FluxOperator { grid, midpoint })
    }

    /// Constant coefficient `h` everywhere.
    pub fn constant(grid: Grid1D, h: f64) -> Self {
        FluxOperator {
            grid,
            midpoint: vec![h; grid.nx - 1],
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoint
    }

    /// Operator with coefficient `self - other`.
    pub fn difference(&self, other: &FluxOperator) -> Result<FluxOperator> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "operators live on different grids".into(),
            ));
        }
        let midpoint = self
            .midpoint
            .iter()
            .zip(&other.midpoint)
            .map(|(a, b)| a - b)
            .collect();
        Ok(FluxOperator {
            grid: self.grid,
            midpoint,
        })
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, &mut out);
        out
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.grid.nx;
        let inv = 1.0 / (self.grid.dx * self.grid.dx);
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            let right = self.midpoint[i] * (u[i + 1] - u[i]);
            let left = self.midpoint[i - 1] * (u[i] - u[i - 1]);
            out[i] = (right - left) * inv;
        }
    }

    /// `a(v, w) = Σ h_{i+1/2}(v_{i+1}-v_i)(w_{i+1}-w_i)/dx`, so that
    /// `⟨-Av, w⟩ = a(v, w)` for fields vanishing at the ends.
    pub fn energy_form(&self, v: &[f64], w: &[f64]) -> f64 {
        let s: f64 = self
            .midpoint
            .iter()
            .enumerate()
            .map(|(i, h)| h * (v[i + 1] - v[i]) * (w[i + 1] - w[i]))
            .sum();
        s / self.grid.dx
    }

    /// `I - alpha·A` with identity rows at the Dirichlet ends.
    pub fn shifted_system(&self, alpha: f64) -> TridiagonalSystem {
        let n = self.grid.nx;
        let r = alpha / (self.grid.dx * self.grid.dx);
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        for i in 1..n - 1 {
            lower[i] = -r * self.midpoint[i - 1];
            upper[i] = -r * self.midpoint[i];
            diag[i] = 1.0 + r * (self.midpoint[i - 1] + self.midpoint[i]);
        }
        let sys = TridiagonalSystem::from_bands(lower, diag, upper).expect("consistent bands");
        debug_assert!(sys.is_diagonally_dominant());
        sys
    }
}

/// Second-order Taylor start `u¹ = u⁰ + dt·u₁ + (dt²/2)·A u⁰`.
pub fn initial_step(u0: &[f64], u1: &[f64], op: &FluxOperator, dt: f64) -> Vec<f64> {
    let au = op.apply(u0);
    let n = u0.len();
    let mut out: Vec<f64> = (0..n)
        .map(|i| u0[i] + dt * u1[i] + 0.5 * dt * dt * au[i])
        .collect();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    out
}

/// One step of the three-level scheme: solves
/// `(I - (dt²/2)A) u^{n+1} = 2u^n - u^{n-1} + (dt²/2) A u^{n-1}`.
pub fn cn_step(u_prev: &[f64], u_curr: &[f64], op: &FluxOperator, dt: f64) -> Result<Vec<f64>> {
    let n = op.grid.nx;
    for u in [u_prev, u_curr] {
        if u.len() != n {
            return Err(Error::Shape {
                expected: n,
                found: u.len(),
            });
        }
    }
    let mut stepper = Stepper::new(op.clone(), dt);
    stepper.prev = u_prev.to_vec();
    stepper.curr = u_curr.to_vec();
    stepper.advance()?;
    Ok(stepper.curr)
}

/// Time-stepping state for the three-level scheme, reusing the factorized
/// system and scratch buffers between steps.
#[derive(Debug, Clone)]
pub struct Stepper {
    op: FluxOperator,
    dt: f64,
    system: TridiagonalSystem,
    prev: Vec<f64>,
    curr: Vec<f64>,
    rhs: Vec<f64>,
    next: Vec<f64>,
    scratch: Vec<f64>,
    step: usize,
}

impl Stepper {
    pub fn new(op: FluxOperator, dt: f64) -> Self {
        let n = op.grid.nx;
        let system = op.shifted_system(0.5 * dt * dt);
        Stepper {
            op,
            dt,
            system,
            prev: vec![0.0; n],
            curr: vec![0.0; n],
            rhs: vec![0.0; n],
            next: vec![0.0; n],
            scratch: vec![0.0; n],
            step: 0,
        }
    }

    /// Sets `u⁰` and the Taylor start `u¹`; `extra_accel` is an additional
    /// forcing `f⁰` entering as `(dt²/2)·f⁰`.
    pub fn start(&mut self, u0: &[f64], u1: &[f64], extra_accel: Option<&[f64]>) {
        self.prev = u0.to_vec();
        self.curr = initial_step(u0, u1, &self.op, self.dt);
        if let Some(f) = extra_accel {
            let n = self.curr.len();
            for i in 1..n - 1 {
                self.curr[i] += 0.5 * self.dt * self.dt * f[i];
            }
        }
        self.step = 1;
    }

    pub fn advance(&mut self) -> Result<()> {
        self.advance_with_source(None)
    }

    /// Advances one step; `source` is added to the right-hand side as is.
    pub fn advance_with_source(&mut self, source: Option<&[f64]>) -> Result<()> {
        let a = 0.5 * self.dt * self.dt;
        self.op.apply_into(&self.prev, &mut self.rhs);
        let n = self.rhs.len();
        for i in 0..n {
            self.rhs[i] = 2.0 * self.curr[i] - self.prev[i] + a * self.rhs[i];
        }
        if let Some(s) = source {
            for i in 0..n {
                self.rhs[i] += s[i];
            }
        }
        self.rhs[0] = 0.0;
        self.rhs[n - 1] = 0.0;
        thomas_into(
            self.system.lower(),
            self.system.diag(),
            self.system.upper(),
            &self.rhs,
            &mut self.next,
            &mut self.scratch,
        )?;
        std::mem::swap(&mut self.prev, &mut self.curr);
        std::mem::swap(&mut self.curr, &mut self.next);
        self.step += 1;
        Ok(())
    }

    pub fn operator(&self) -> &FluxOperator {
        &self.op
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Index `n` of the current level `u^n`.
    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn current(&self) -> &[f64] {
        &self.curr
    }

    pub fn previous(&self) -> &[f64] {
        &self.prev
    }

    /// `E^{n-1/2}` for the current pair `(u^{n-1}, u^n)`.
    pub fn discrete_energy(&self) -> f64 {
        let grid = self.op.grid;
        let kinetic: f64 = self
            .curr
            .iter()
            .zip(&self.prev)
            .enumerate()
            .filter(|(k, _)| grid.weighted(*k))
            .map(|(_, (c, p))| {
                let d = (c - p) / self.dt;
                d * d
            })
            .sum::<f64>()
            * grid.dx;
        kinetic
            + 0.5
                * (self.op.energy_form(&self.curr, &self.curr)
                    + self.op.energy_form(&self.prev, &self.prev))
    }

    /// Snapshot of the current level with the backward-difference velocity.
    pub fn field(&self) -> WaveField {
        WaveField {
            grid: self.op.grid,
            t: self.time(),
            u: self.curr.clone(),
            v: self
                .curr
                .iter()
                .zip(&self.prev)
                .map(|(c, p)| (c - p) / self.dt)
                .collect(),
        }
    }
}

/// Output of [`run_1d`]: snapshots in ascending time and the energy series.
#[derive(Debug, Clone)]
pub struct Run1D {
    pub config: SimConfig1D,
    pub grid: Grid1D,
    pub snapshots: Vec<WaveField>,
    pub energy: EnergyReport,
}

impl Run1D {
    /// Snapshot closest to time `t`.
    pub fn at(&self, t: f64) -> Option<&WaveField> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .filter(|f| (f.t - t).abs() < 1e-9 + 1e-6 * self.config.dt)
    }
}

pub fn run_1d(config: &SimConfig1D) -> Result<Run1D> {
    config.validate()?;
    let grid = config.grid()?;
    let depth = regularize(&config.profile, config.eps)?;
    let op = assemble_operator(&depth, &grid)?;
    run_with_operator(config, op)
}

/// Runs the time loop with a prebuilt operator.
pub fn run_with_operator(config: &SimConfig1D, op: FluxOperator) -> Result<Run1D> {
    let grid = *op.grid();
    let dt = config.dt;
    let steps = step_count(config.t_final, dt)?;
    let mut wanted: Vec<usize> = config
        .snapshots
        .iter()
        .map(|&t| step_count(t, dt))
        .collect::<Result<_>>()?;
    wanted.sort_unstable();
    wanted.dedup();

    let u0 = config.initial.sample(&grid);
    let zero = vec![0.0; grid.nx];
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut want = wanted.iter().peekable();
    if want.peek() == Some(&&0) {
        snapshots.push(WaveField {
            grid,
            t: 0.0,
            u: u0.clone(),
            v: zero.clone(),
        });
        want.next();
    }

    let mut stepper = Stepper::new(op, dt);
    stepper.start(&u0, &zero, None);
    let mut discrete = Vec::with_capacity(steps);
    let mut continuous = Vec::with_capacity(steps);
    if steps >= 1 {
        discrete.push(DiscreteEnergy {
            n: 0,
            t: 0.5 * dt,
            energy: stepper.discrete_energy(),
        });
    }
    let mut before = u0;
    loop {
        if want.peek() == Some(&&stepper.step_index()) {
            snapshots.push(stepper.field());
            want.next();
        }
        if stepper.step_index() >= steps {
            break;
        }
        let middle = stepper.current().to_vec();
        stepper.advance()?;
        let n = stepper.step_index() - 1;
        continuous.push(ContinuousEnergy::from_levels(
            n,
            n as f64 * dt,
            [&before, &middle, stepper.current()],
            stepper.operator(),
            dt,
        ));
        discrete.push(DiscreteEnergy {
            n,
            t: (n as f64 + 0.5) * dt,
            energy: stepper.discrete_energy(),
        });
        before = middle;
    }
    if steps == 0 {
        discrete.clear();
    }
    debug_assert!(diagnostics::finite_nonnegative(&continuous));
    Ok(Run1D {
        config: config.clone(),
        grid,
        snapshots,
        energy: EnergyReport {
            discrete,
            continuous,
        },
    })
}
