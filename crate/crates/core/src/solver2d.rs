//! Factorized implicit scheme for
//! `u_tt = ∂x(H_ε ∂x u) + ∂y(H_ε ∂y u)` on `[0, 100]²`, `H_ε(x, y) = h_ε(x)`.
//!
//! Each step inverts `(I - aA_x)(I - aA_y)` with `a = dt²/2`, see
//! [`Factorization`]. Both factors are batches of independent tridiagonal
//! systems, one per grid line, solved by cyclic reduction and distributed
//! over a rayon pool.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bathymetry::{regularize, DepthProfile, RegularizedDepth};
use crate::diagnostics::{DiscreteEnergy, EnergyReport};
use crate::error::{invalid, Error, Result};
use crate::fields::{step_count, Grid2D, WaveField2D};
use crate::solver1d::InitialData;
use crate::tridiag::{thomas_into, CyclicReduction};

/// Side length of the square domain.
pub const DOMAIN_LENGTH: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineSolver {
    CyclicReduction,
    Thomas,
    /// Cyclic reduction, with every line re-solved by Thomas and the largest
    /// discrepancy recorded.
    CrossChecked,
}

/// Right-hand side paired with the factorized operator `(I - aA_x)(I - aA_y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Factorization {
    /// Solve for `u^{n+1}` with right-hand side
    /// `2u^n - u^{n-1} + a(A_x + A_y)u^{n-1} + a²A_xA_y u^{n-1}`.
    Level,
    /// Solve for `w = u^{n+1} - 2u^n + u^{n-1}` with right-hand side
    /// `dt²(A_x + A_y)u^n`.
    Increment,
}

/// Boundary condition on the `y = 0` and `y = 100` edges; `x` edges are
/// always Dirichlet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YBoundary {
    Dirichlet,
    /// Zero normal flux, which keeps `y`-independent data `y`-independent.
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData2D {
    /// `50·exp(-((x-40)² + (y-50)²)/8)`.
    Gaussian,
    Pulse {
        amplitude: f64,
        cx: f64,
        cy: f64,
        spread: f64,
    },
    /// A 1D profile in `x`, constant in `y`.
    YIndependent {
        profile: InitialData,
    },
    Zero,
}

impl InitialData2D {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            InitialData2D::Gaussian => {
                50.0 * (-((x - 40.0).powi(2) + (y - 50.0).powi(2)) / 8.0).exp()
            }
            InitialData2D::Pulse {
                amplitude,
                cx,
                cy,
                spread,
            } => amplitude * (-((x - cx).powi(2) + (y - cy).powi(2)) / spread).exp(),
            InitialData2D::YIndependent { profile } => profile.eval(x),
            InitialData2D::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig2D {
    pub profile: DepthProfile,
    pub eps: f64,
    pub dt: f64,
    /// Cells per axis; `dx = dy = 100/n`.
    pub n: usize,
    pub t_final: f64,
    pub snapshots: Vec<f64>,
    pub initial: InitialData2D,
    pub threads: usize,
    pub line_solver: LineSolver,
    pub y_boundary: YBoundary,
    pub factorization: Factorization,
    /// Skip the energy series (used when timing).
    pub record_energy: bool,
}

impl SimConfig2D {
    pub fn new(n: usize, eps: f64, t_final: f64) -> Self {
        SimConfig2D {
            profile: DepthProfile::case1(),
            eps,
            dt: 0.05,
            n,
            t_final,
            snapshots: vec![t_final],
            initial: InitialData2D::Gaussian,
            threads: 1,
            line_solver: LineSolver::CyclicReduction,
            y_boundary: YBoundary::Dirichlet,
            factorization: Factorization::Increment,
            record_energy: true,
        }
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.n, DOMAIN_LENGTH, self.dt, self.t_final)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(invalid(format!("eps must lie in (0,1], got {}", self.eps)));
        }
        if !(self.dt > 0.0) || !(self.t_final > 0.0) {
            return Err(invalid("dt and T must be positive"));
        }
        if self.threads == 0 {
            return Err(invalid("threads must be at least 1"));
        }
        self.grid()?;
        for &t in &self.snapshots {
            if !(0.0..=self.t_final + 1e-9).contains(&t) {
                return Err(invalid(format!(
                    "snapshot time {t} outside [0, {}]",
                    self.t_final
                )));
            }
            step_count(t, self.dt)?;
        }
        Ok(())
    }
}

/// `A_x` and `A_y` on a [`Grid2D`]: `A_x` uses `h_ε` at `x`-midpoints,
/// `A_y` uses `h_ε(x_i)` on the whole line `x = x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator2D {
    grid: Grid2D,
    x_midpoint: Vec<f64>,
    x_node: Vec<f64>,
    y_boundary: YBoundary,
}

impl Operator2D {
    pub fn assemble(depth: &RegularizedDepth, grid: Grid2D, y_boundary: YBoundary) -> Self {
        let x_midpoint = (0..grid.n)
            .map(|i| depth.eval((i as f64 + 0.5) * grid.h))
            .collect();
        let x_node = (0..=grid.n).map(|i| depth.eval(grid.coord(i))).collect();
        Operator2D {
            grid,
            x_midpoint,
            x_node,
            y_boundary,
        }
    }

    pub fn constant(grid: Grid2D, h: f64, y_boundary: YBoundary) -> Self {
        Operator2D {
            grid,
            x_midpoint: vec![h; grid.n],
            x_node: vec![h; grid.n + 1],
            y_boundary,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Range of `y` indices that are unknowns.
    fn y_rows(&self) -> std::ops::Range<usize> {
        match self.y_boundary {
            YBoundary::Dirichlet => 1..self.grid.n,
            YBoundary::Neumann => 0..self.grid.n + 1,
        }
    }

    /// Quadrature weight of row `iy` (half cells on Neumann edges).
    fn row_weight(&self, iy: usize) -> f64 {
        match self.y_boundary {
            YBoundary::Neumann if iy == 0 || iy == self.grid.n => 0.5,
            _ => 1.0,
        }
    }

    /// Writes `A_x u` into `out`, row by row.
    pub fn apply_x(&self, u: &[f64], out: &mut [f64]) {
        let m = self.grid.n + 1;
        let inv = 1.0 / (self.grid.h * self.grid.h);
        let mids = &self.x_midpoint;
        out.par_chunks_mut(m)
            .zip(u.par_chunks(m))
            .for_each(|(o, r)| {
                o[0] = 0.0;
                o[m - 1] = 0.0;
                for i in 1..m - 1 {
                    o[i] = (mids[i] * (r[i + 1] - r[i]) - mids[i - 1] * (r[i] - r[i - 1])) * inv;
                }
            });
    }

    /// Writes `A_y u` into `out`.
    pub fn apply_y(&self, u: &[f64], out: &mut [f64]) {
        let m = self.grid.n + 1;
        let inv = 1.0 / (self.grid.h * self.grid.h);
        let node = &self.x_node;
        let neumann = self.y_boundary == YBoundary::Neumann;
        out.par_chunks_mut(m).enumerate().for_each(|(iy, o)| {
            let row = &u[iy * m..(iy + 1) * m];
            if iy == 0 || iy == m - 1 {
                if !neumann {
                    o.fill(0.0);
                    return;
                }
                let inner = if iy == 0 {
                    &u[m..2 * m]
                } else {
                    &u[(m - 2) * m..(m - 1) * m]
                };
                for i in 0..m {
                    o[i] = 2.0 * node[i] * (inner[i] - row[i]) * inv;
                }
            } else {
                let below = &u[(iy - 1) * m..iy * m];
                let above = &u[(iy + 1) * m..(iy + 2) * m];
                for i in 0..m {
                    o[i] = node[i] * (above[i] - 2.0 * row[i] + below[i]) * inv;
                }
            }
            o[0] = 0.0;
            o[m - 1] = 0.0;
        });
    }

    /// `(A_x + A_y) u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut ax = vec![0.0; u.len()];
        let mut ay = vec![0.0; u.len()];
        self.apply_x(u, &mut ax);
        self.apply_y(u, &mut ay);
        ax.iter_mut().zip(&ay).for_each(|(a, b)| *a += b);
        ax
    }

    /// `-⟨(A_x + A_y) u, u⟩`, the potential energy.
    pub fn energy_form(&self, u: &[f64], scratch: &mut [f64]) -> f64 {
        let m = self.grid.n + 1;
        let au = self.apply(u);
        scratch.copy_from_slice(&au);
        let mut s = 0.0;
        for iy in 0..m {
            let w = self.row_weight(iy);
            for ix in 0..m {
                let k = iy * m + ix;
                s -= w * au[k] * u[k];
            }
        }
        s * self.grid.h * self.grid.h
    }

    /// Bands of `I - a·A_x` over the interior `x` unknowns.
    fn x_bands(&self, a: f64) -> [Vec<f64>; 3] {
        let n = self.grid.n;
        let r = a / (self.grid.h * self.grid.h);
        let mids = &self.x_midpoint;
        let lower = (1..n).map(|i| -r * mids[i - 1]).collect();
        let diag = (1..n).map(|i| 1.0 + r * (mids[i - 1] + mids[i])).collect();
        let upper = (1..n).map(|i| -r * mids[i]).collect();
        [lower, diag, upper]
    }

    /// Bands of `I - a·A_y` on the line `x = x_i`.
    fn y_bands(&self, a: f64, ix: usize, bands: &mut [Vec<f64>; 3]) {
        let r = a * self.x_node[ix] / (self.grid.h * self.grid.h);
        let len = self.y_rows().len();
        for b in bands.iter_mut() {
            b.clear();
        }
        bands[0].resize(len, -r);
        bands[1].resize(len, 1.0 + 2.0 * r);
        bands[2].resize(len, -r);
        if self.y_boundary == YBoundary::Neumann {
            bands[2][0] = -2.0 * r;
            bands[0][len - 1] = -2.0 * r;
        }
    }
}

#[derive(Default)]
struct LineWork {
    cr: CyclicReduction,
    rhs: Vec<f64>,
    x: Vec<f64>,
    check: Vec<f64>,
    scratch: Vec<f64>,
    bands: [Vec<f64>; 3],
}

impl LineWork {
    /// Solves the line held in `self.rhs` into `self.x`; returns the
    /// CR-vs-Thomas discrepancy when cross-checking.
    fn solve(&mut self, bands: &[Vec<f64>; 3], solver: LineSolver) -> Result<f64> {
        let len = self.rhs.len();
        self.x.resize(len, 0.0);
        match solver {
            LineSolver::CyclicReduction => {
                self.cr
                    .solve(&bands[0], &bands[1], &bands[2], &self.rhs, &mut self.x)?;
                Ok(0.0)
            }
            LineSolver::Thomas => {
                self.scratch.resize(len, 0.0);
                thomas_into(
                    &bands[0],
                    &bands[1],
                    &bands[2],
                    &self.rhs,
                    &mut self.x,
                    &mut self.scratch,
                )?;
                Ok(0.0)
            }
            LineSolver::CrossChecked => {
                self.cr
                    .solve(&bands[0], &bands[1], &bands[2], &self.rhs, &mut self.x)?;
                self.scratch.resize(len, 0.0);
                self.check.resize(len, 0.0);
                thomas_into(
                    &bands[0],
                    &bands[1],
                    &bands[2],
                    &self.rhs,
                    &mut self.check,
                    &mut self.scratch,
                )?;
                Ok(self
                    .x
                    .iter()
                    .zip(&self.check)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max))
            }
        }
    }
}

fn transpose_into(src: &[f64], dst: &mut [f64], m: usize) {
    dst.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = src[j * m + i];
        }
    });
}

/// Solves `(I - aA_x)(I - aA_y) w = rhs` line by line. `work` must have
/// the size of `rhs`. Returns the largest line discrepancy (cross-check only).
fn factorized_solve(
    op: &Operator2D,
    a: f64,
    rhs: &mut [f64],
    work: &mut [f64],
    solver: LineSolver,
) -> Result<f64> {
    let m = op.grid.n + 1;
    let x_bands = op.x_bands(a);

    // x-sweep, one row at a time; boundary columns stay zero.
    let rows = op.y_rows();
    let dx = rhs
        .par_chunks_mut(m)
        .enumerate()
        .map_init(LineWork::default, |w, (iy, row)| -> Result<f64> {
            if !rows.contains(&iy) {
                row.fill(0.0);
                return Ok(0.0);
            }
            w.rhs.clear();
            w.rhs.extend_from_slice(&row[1..m - 1]);
            let d = w.solve(&x_bands, solver)?;
            row[1..m - 1].copy_from_slice(&w.x);
            row[0] = 0.0;
            row[m - 1] = 0.0;
            Ok(d)
        })
        .try_reduce(|| 0.0, |p, q| Ok(p.max(q)))?;

    // y-sweep on the transposed field, one column (x = const) at a time.
    transpose_into(rhs, work, m);
    let dy = work
        .par_chunks_mut(m)
        .enumerate()
        .map_init(LineWork::default, |w, (ix, col)| -> Result<f64> {
            if ix == 0 || ix == m - 1 {
                col.fill(0.0);
                return Ok(0.0);
            }
            let rows = op.y_rows();
            let mut bands = std::mem::take(&mut w.bands);
            op.y_bands(a, ix, &mut bands);
            w.rhs.clear();
            w.rhs.extend_from_slice(&col[rows.clone()]);
            let d = w.solve(&bands, solver);
            w.bands = bands;
            let d = d?;
            col.fill(0.0);
            col[rows].copy_from_slice(&w.x);
            Ok(d)
        })
        .try_reduce(|| 0.0, |p, q| Ok(p.max(q)))?;
    transpose_into(work, rhs, m);
    Ok(dx.max(dy))
}

/// Reusable state for the 2D time loop.
pub struct Stepper2D {
    op: Operator2D,
    dt: f64,
    solver: LineSolver,
    factorization: Factorization,
    prev: Vec<f64>,
    curr: Vec<f64>,
    rhs: Vec<f64>,
    work: Vec<f64>,
    step: usize,
    max_discrepancy: f64,
}

impl Stepper2D {
    pub fn new(op: Operator2D, dt: f64, solver: LineSolver, factorization: Factorization) -> Self {
        let len = (op.grid.n + 1) * (op.grid.n + 1);
        Stepper2D {
            op,
            dt,
            solver,
            factorization,
            prev: vec![0.0; len],
            curr: vec![0.0; len],
            rhs: vec![0.0; len],
            work: vec![0.0; len],
            step: 0,
            max_discrepancy: 0.0,
        }
    }

    /// `u⁰` and the Taylor start `u¹ = u⁰ + (dt²/2)(A_x + A_y)u⁰` (zero velocity).
    pub fn start(&mut self, u0: &[f64]) {
        let a = 0.5 * self.dt * self.dt;
        self.prev.copy_from_slice(u0);
        let au = self.op.apply(u0);
        self.curr
            .iter_mut()
            .zip(u0.iter().zip(&au))
            .for_each(|(c, (u, f))| *c = u + a * f);
        self.step = 1;
    }

    pub fn advance(&mut self) -> Result<()> {
        let a = 0.5 * self.dt * self.dt;
        let dt2 = self.dt * self.dt;
        match self.factorization {
            Factorization::Increment => {
                self.op.apply_x(&self.curr, &mut self.rhs);
                self.op.apply_y(&self.curr, &mut self.work);
                self.rhs
                    .par_iter_mut()
                    .zip(self.work.par_iter())
                    .for_each(|(r, y)| *r = dt2 * (*r + y));
                let d = factorized_solve(&self.op, a, &mut self.rhs, &mut self.work, self.solver)?;
                self.max_discrepancy = self.max_discrepancy.max(d);
                // u^{n+1} = 2u^n - u^{n-1} + w, written over u^{n-1}
                self.prev
                    .par_iter_mut()
                    .zip(self.curr.par_iter().zip(self.rhs.par_iter()))
                    .for_each(|(p, (c, w))| *p = 2.0 * c - *p + w);
            }
            Factorization::Level => {
                // (I + aA_x)(I + aA_y)u^{n-1} + 2u^n - 2u^{n-1}
                self.op.apply_y(&self.prev, &mut self.work);
                self.work
                    .par_iter_mut()
                    .zip(self.prev.par_iter())
                    .for_each(|(w, p)| *w = p + a * *w);
                self.op.apply_x(&self.work, &mut self.rhs);
                self.rhs
                    .par_iter_mut()
                    .zip(self.work.par_iter())
                    .zip(self.curr.par_iter().zip(self.prev.par_iter()))
                    .for_each(|((r, t), (c, p))| *r = t + a * *r + 2.0 * (c - p));
                let d = factorized_solve(&self.op, a, &mut self.rhs, &mut self.work, self.solver)?;
                self.max_discrepancy = self.max_discrepancy.max(d);
                std::mem::swap(&mut self.prev, &mut self.rhs);
            }
        }
        std::mem::swap(&mut self.prev, &mut self.curr);
        self.step += 1;
        Ok(())
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn current(&self) -> &[f64] {
        &self.curr
    }

    pub fn previous(&self) -> &[f64] {
        &self.prev
    }

    pub fn max_discrepancy(&self) -> f64 {
        self.max_discrepancy
    }

    /// `E^{n-1/2} = ‖(u^n - u^{n-1})/dt‖² + ½[a(u^n,u^n) + a(u^{n-1},u^{n-1})]`.
    pub fn discrete_energy(&mut self) -> f64 {
        let m = self.op.grid.n + 1;
        let h2 = self.op.grid.h * self.op.grid.h;
        let mut kinetic = 0.0;
        for iy in 0..m {
            let w = self.op.row_weight(iy);
            for ix in 0..m {
                let k = iy * m + ix;
                let d = (self.curr[k] - self.prev[k]) / self.dt;
                kinetic += w * d * d;
            }
        }
        let pc = self.op.energy_form(&self.curr, &mut self.work);
        let pp = self.op.energy_form(&self.prev, &mut self.work);
        kinetic * h2 + 0.5 * (pc + pp)
    }

    pub fn field(&self) -> WaveField2D {
        WaveField2D {
            grid: self.op.grid,
            t: self.step as f64 * self.dt,
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

/// One factorized step from `(u^{n-1}, u^n)`.
pub fn adi_step(
    u_prev: &[f64],
    u_curr: &[f64],
    op: &Operator2D,
    dt: f64,
    solver: LineSolver,
    factorization: Factorization,
) -> Result<Vec<f64>> {
    let len = (op.grid.n + 1) * (op.grid.n + 1);
    for u in [u_prev, u_curr] {
        if u.len() != len {
            return Err(Error::Shape {
                expected: len,
                found: u.len(),
            });
        }
    }
    let mut s = Stepper2D::new(op.clone(), dt, solver, factorization);
    s.prev.copy_from_slice(u_prev);
    s.curr.copy_from_slice(u_curr);
    s.advance()?;
    Ok(s.curr)
}

#[derive(Debug, Clone)]
pub struct Run2D {
    pub config: SimConfig2D,
    pub grid: Grid2D,
    pub snapshots: Vec<WaveField2D>,
    pub energy: EnergyReport,
    /// Largest CR-vs-Thomas difference over all line solves (cross-check mode).
    pub max_line_discrepancy: Option<f64>,
}

pub fn initial_field(config: &SimConfig2D, grid: &Grid2D) -> Vec<f64> {
    let m = grid.n + 1;
    let mut u = vec![0.0; m * m];
    let dirichlet_y = config.y_boundary == YBoundary::Dirichlet;
    for iy in 0..m {
        for ix in 0..m {
            let boundary = ix == 0 || ix == m - 1 || (dirichlet_y && (iy == 0 || iy == m - 1));
            if !boundary {
                u[iy * m + ix] = config.initial.eval(grid.coord(ix), grid.coord(iy));
            }
        }
    }
    u
}

pub fn run_2d(config: &SimConfig2D) -> Result<Run2D> {
    config.validate()?;
    let grid = config.grid()?;
    let nodes = grid.node_count_checked()?;
    let _ = nodes;
    let depth = regularize(&config.profile, config.eps)?;
    let op = Operator2D::assemble(&depth, grid, config.y_boundary);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| invalid(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_with_operator(config, op))
}

fn run_with_operator(config: &SimConfig2D, op: Operator2D) -> Result<Run2D> {
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

    let u0 = initial_field(config, &grid);
    let mut snapshots = Vec::new();
    let mut want = wanted.iter().peekable();
    if want.peek() == Some(&&0) {
        let mut f = WaveField2D::zeros(grid, 0.0);
        f.u.copy_from_slice(&u0);
        snapshots.push(f);
        want.next();
    }
    let mut stepper = Stepper2D::new(op, dt, config.line_solver, config.factorization);
    stepper.start(&u0);
    let mut discrete = Vec::new();
    loop {
        if config.record_energy && steps > 0 {
            let n = stepper.step_index() - 1;
            let energy = stepper.discrete_energy();
            discrete.push(DiscreteEnergy {
                n,
                t: (n as f64 + 0.5) * dt,
                energy,
            });
        }
        if want.peek() == Some(&&stepper.step_index()) {
            snapshots.push(stepper.field());
            want.next();
        }
        if stepper.step_index() >= steps {
            break;
        }
        stepper.advance()?;
    }
    let max_line_discrepancy =
        (config.line_solver == LineSolver::CrossChecked).then(|| stepper.max_discrepancy());
    Ok(Run2D {
        config: config.clone(),
        grid,
        snapshots,
        energy: EnergyReport {
            discrete,
            continuous: Vec::new(),
        },
        max_line_discrepancy,
    })
}

impl Grid2D {
    /// Node count, refusing grids whose working set cannot be allocated.
    pub fn node_count_checked(&self) -> Result<usize> {
        let m = self.n.checked_add(1).ok_or(Error::Allocation {
            n: self.n,
            bytes: usize::MAX,
        })?;
        let nodes = m.checked_mul(m).ok_or(Error::Allocation {
            n: self.n,
            bytes: usize::MAX,
        })?;
        // prev, curr, rhs, work plus per-snapshot copies
        let bytes = nodes.checked_mul(8 * 4).ok_or(Error::Allocation {
            n: self.n,
            bytes: usize::MAX,
        })?;
        let mut probe: Vec<u8> = Vec::new();
        if probe.try_reserve_exact(bytes).is_err() {
            return Err(Error::Allocation { n: self.n, bytes });
        }
        Ok(nodes)
    }
}
