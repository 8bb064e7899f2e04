//! Uniform grids, wave snapshots, discrete norms and snapshot file formats.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Formats a float with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Anything a nodal array can live on.
pub trait Grid {
    fn node_count(&self) -> usize;
    /// Quadrature weight of one cell.
    fn cell_volume(&self) -> f64;
    /// Whether node `k` (flat index) carries a quadrature weight; the
    /// left-endpoint rule drops the last node along each axis.
    fn weighted(&self, k: usize) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(x0: f64, x1: f64, nx: usize) -> Result<Self> {
        if nx < 3 {
            return Err(invalid(format!("grid needs at least 3 nodes, got {nx}")));
        }
        if !(x1 > x0) {
            return Err(invalid(format!(
                "grid endpoints out of order: [{x0}, {x1}]"
            )));
        }
        Ok(Grid1D {
            x0,
            x1,
            nx,
            dx: (x1 - x0) / (nx - 1) as f64,
        })
    }

    /// Grid whose spacing divides `[x0, x1]` into a whole number of cells.
    pub fn with_spacing(x0: f64, x1: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(invalid(format!("dx must be positive, got {dx}")));
        }
        let cells = (x1 - x0) / dx;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-6 * rounded.max(1.0) {
            return Err(invalid(format!(
                "dx={dx} does not divide [{x0}, {x1}] evenly"
            )));
        }
        Self::new(x0, x1, rounded as usize + 1)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    /// Midpoint between nodes `i` and `i+1`.
    pub fn midpoint(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }
}

impl Grid for Grid1D {
    fn node_count(&self) -> usize {
        self.nx
    }

    fn cell_volume(&self) -> f64 {
        self.dx
    }

    fn weighted(&self, k: usize) -> bool {
        k + 1 < self.nx
    }
}

/// Square space-time grid: `n` cells per axis on `[0, L]²`, `steps` time
/// steps of size `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub n: usize,
    pub length: f64,
    pub h: f64,
    pub tau: f64,
    pub steps: usize,
}

impl Grid2D {
    pub fn new(n: usize, length: f64, tau: f64, final_time: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!(
                "2D grid needs at least 2 cells per axis, got {n}"
            )));
        }
        let steps = step_count(final_time, tau)?;
        Ok(Grid2D {
            n,
            length,
            h: length / n as f64,
            tau,
            steps,
        })
    }

    /// Nodes per axis (`n + 1`).
    pub fn nodes_per_axis(&self) -> usize {
        self.n + 1
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * (self.n + 1) + ix
    }

    pub fn axis(&self) -> Grid1D {
        Grid1D {
            x0: 0.0,
            x1: self.length,
            nx: self.n + 1,
            dx: self.h,
        }
    }
}

impl Grid for Grid2D {
    fn node_count(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    fn cell_volume(&self) -> f64 {
        self.h * self.h
    }

    fn weighted(&self, k: usize) -> bool {
        let m = self.n + 1;
        k % m + 1 < m && k / m + 1 < m
    }
}

/// Number of steps of size `dt` to reach `t` exactly.
pub fn step_count(t: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t >= 0.0) {
        return Err(invalid(format!(
            "need dt > 0 and t >= 0, got dt={dt}, t={t}"
        )));
    }
    let s = t / dt;
    let r = s.round();
    if (s - r).abs() > 1e-6 {
        return Err(invalid(format!("time {t} is not a multiple of dt={dt}")));
    }
    Ok(r as usize)
}

/// One 1D snapshot: displacement `u` and the backward-difference velocity
/// proxy `v = (u^n - u^{n-1})/dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid1D,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl WaveField {
    pub fn zeros(grid: Grid1D, t: f64) -> Self {
        WaveField {
            grid,
            t,
            u: vec![0.0; grid.nx],
            v: vec![0.0; grid.nx],
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "# t={}", fmt17(self.t))?;
        writeln!(w, "x,u")?;
        for (i, u) in self.u.iter().enumerate() {
            writeln!(w, "{},{}", fmt17(self.grid.x(i)), fmt17(*u))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `# t=...` / `x,u` snapshot; `v` is left at zero.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let perr = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            msg,
        };
        let mut t = None;
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("# t=") {
                t = Some(
                    rest.trim()
                        .parse::<f64>()
                        .map_err(|e| perr(format!("bad time: {e}")))?,
                );
                continue;
            }
            if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
                continue;
            }
            let mut cols = line.split(',');
            let mut next = || -> Result<f64> {
                cols.next()
                    .ok_or_else(|| perr(format!("line {}: missing column", lineno + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| perr(format!("line {}: {e}", lineno + 1)))
            };
            xs.push(next()?);
            us.push(next()?);
        }
        let t = t.ok_or_else(|| perr("missing '# t=' header".into()))?;
        if xs.len() < 3 {
            return Err(perr(format!("need at least 3 rows, found {}", xs.len())));
        }
        let grid = Grid1D::new(xs[0], *xs.last().expect("non-empty"), xs.len())?;
        let nx = us.len();
        Ok(WaveField {
            grid,
            t,
            u: us,
            v: vec![0.0; nx],
        })
    }
}

/// One 2D snapshot, row-major with `x` varying fastest: `u[iy*(n+1) + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField2D {
    pub grid: Grid2D,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// Magic bytes of the binary 2D dump.
pub const BIN_MAGIC: &[u8; 4] = b"VWW2";

impl WaveField2D {
    pub fn zeros(grid: Grid2D, t: f64) -> Self {
        let n = grid.node_count();
        WaveField2D {
            grid,
            t,
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        let m = self.grid.nodes_per_axis();
        writeln!(w, "# t={}", fmt17(self.t))?;
        writeln!(w, "x,y,u")?;
        for iy in 0..m {
            for ix in 0..m {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt17(self.grid.coord(ix)),
                    fmt17(self.grid.coord(iy)),
                    fmt17(self.u[self.grid.index(ix, iy)])
                )?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `"VWW2"`, u64 nx, u64 ny, f64 t, then nx·ny little-endian f64.
    pub fn write_bin(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        let m = self.grid.nodes_per_axis() as u64;
        w.write_all(BIN_MAGIC)?;
        w.write_all(&m.to_le_bytes())?;
        w.write_all(&m.to_le_bytes())?;
        w.write_all(&self.t.to_le_bytes())?;
        for v in &self.u {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Contents of a binary 2D dump.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDump {
    pub nx: usize,
    pub ny: usize,
    pub t: f64,
    pub u: Vec<f64>,
}

pub fn read_bin(path: &Path) -> Result<BinaryDump> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let perr = |msg: &str| Error::Parse {
        path: path.to_path_buf(),
        msg: msg.to_string(),
    };
    if bytes.len() < 28 || &bytes[..4] != BIN_MAGIC {
        return Err(perr("missing VWW2 header"));
    }
    let word = |k: usize| <[u8; 8]>::try_from(&bytes[k..k + 8]).expect("8 bytes");
    let nx = u64::from_le_bytes(word(4)) as usize;
    let ny = u64::from_le_bytes(word(12)) as usize;
    let t = f64::from_le_bytes(word(20));
    let body = &bytes[28..];
    if body.len() != nx * ny * 8 {
        return Err(perr("payload length does not match nx*ny"));
    }
    let u = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(BinaryDump { nx, ny, t, u })
}

fn check_len(values: &[f64], grid: &impl Grid) -> Result<()> {
    if values.len() != grid.node_count() {
        return Err(Error::Shape {
            expected: grid.node_count(),
            found: values.len(),
        });
    }
    Ok(())
}

/// Discrete `L²` norm, left-endpoint rectangle rule.
pub fn l2_norm(values: &[f64], grid: &impl Grid) -> Result<f64> {
    check_len(values, grid)?;
    let sum: f64 = values
        .iter()
        .enumerate()
        .filter(|(k, _)| grid.weighted(*k))
        .map(|(_, v)| v * v)
        .sum();
    Ok((sum * grid.cell_volume()).sqrt())
}

/// Nodal derivative: central in the interior, one-sided at the ends.
pub fn gradient(values: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    check_len(values, grid)?;
    let n = values.len();
    let dx = grid.dx;
    Ok((0..n)
        .map(|i| match i {
            0 => (values[1] - values[0]) / dx,
            i if i == n - 1 => (values[n - 1] - values[n - 2]) / dx,
            i => (values[i + 1] - values[i - 1]) / (2.0 * dx),
        })
        .collect())
}

/// `‖∂x u‖_{L²}`.
pub fn h1_seminorm(values: &[f64], grid: &Grid1D) -> Result<f64> {
    l2_norm(&gradient(values, grid)?, grid)
}

pub fn l2_difference(a: &WaveField, b: &WaveField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    let diff: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
    l2_norm(&diff, &a.grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(x: f64) -> f64 {
        40.0 * (-(x - 40.0) * (x - 40.0) / 8.0).exp()
    }

    #[test]
    fn l2_examples() {
        let g = Grid1D::with_spacing(0.0, 100.0, 0.005).unwrap();
        assert_eq!(g.nx, 20_001);
        assert_eq!(l2_norm(&vec![0.0; g.nx], &g).unwrap(), 0.0);
        let u: Vec<f64> = g.nodes().into_iter().map(gaussian).collect();
        let exact = (1600.0 * (4.0 * std::f64::consts::PI).sqrt()).sqrt();
        assert!((l2_norm(&u, &g).unwrap() - exact).abs() < 0.1);
        assert!((l2_norm(&u, &g).unwrap() - 75.31).abs() < 0.1);
        assert!((l2_norm(&vec![1.0; g.nx], &g).unwrap() - 10.0).abs() < g.dx);
    }

    #[test]
    fn h1_examples() {
        let g = Grid1D::new(0.0, 1.0, 101).unwrap();
        assert_eq!(h1_seminorm(&vec![3.0; 101], &g).unwrap(), 0.0);
        let lin = g.nodes();
        assert!((h1_seminorm(&lin, &g).unwrap() - 1.0).abs() < 1e-6);

        // ∫(u0')² = 100∫s²e^{-s²/4}ds = 400√π
        let g = Grid1D::with_spacing(0.0, 100.0, 0.005).unwrap();
        let u: Vec<f64> = g.nodes().into_iter().map(gaussian).collect();
        let exact = (400.0 * std::f64::consts::PI.sqrt()).sqrt();
        let got = h1_seminorm(&u, &g).unwrap();
        assert!((got - exact).abs() / exact < 1e-3, "{got} vs {exact}");
    }

    #[test]
    fn shape_errors() {
        let g = Grid1D::new(0.0, 1.0, 11).unwrap();
        assert!(matches!(
            l2_norm(&[1.0; 10], &g),
            Err(Error::Shape {
                expected: 11,
                found: 10
            })
        ));
        assert!(h1_seminorm(&[1.0; 12], &g).is_err());
        let a = WaveField::zeros(g, 0.0);
        let b = WaveField::zeros(Grid1D::new(0.0, 1.0, 12).unwrap(), 0.0);
        assert!(matches!(l2_difference(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn difference_examples() {
        let g = Grid1D::new(0.0, 10.0, 101).unwrap();
        let f = WaveField {
            u: g.nodes().iter().map(|x| x.sin()).collect(),
            ..WaveField::zeros(g, 0.0)
        };
        assert_eq!(l2_difference(&f, &f).unwrap(), 0.0);
        let zero = WaveField::zeros(g, 0.0);
        assert_eq!(
            l2_difference(&f, &zero).unwrap(),
            l2_norm(&f.u, &g).unwrap()
        );
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
        assert!(Grid1D::with_spacing(0.0, 100.0, 0.03).is_err());
        assert_eq!(step_count(5.0, 0.05).unwrap(), 100);
        assert!(step_count(5.0, 0.3).is_err());
        let g = Grid2D::new(256, 100.0, 0.05, 5.0).unwrap();
        assert_eq!(g.steps as f64 * g.tau, 5.0);
        assert_eq!(g.n as f64 * g.h, 100.0);
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid1D::new(0.0, 100.0, 41).unwrap();
        let mut f = WaveField::zeros(g, 1.15);
        f.u = g.nodes().iter().map(|x| (x / 7.0).sin() / 3.0).collect();
        let p = dir.path().join("s.csv");
        f.write_csv(&p).unwrap();
        let back = WaveField::read_csv(&p).unwrap();
        assert_eq!(back.u, f.u);
        assert_eq!(back.t, 1.15);
        assert_eq!(back.grid.nx, g.nx);

        let g2 = Grid2D::new(4, 100.0, 0.05, 0.1).unwrap();
        let mut f2 = WaveField2D::zeros(g2, 2.5);
        f2.u.iter_mut()
            .enumerate()
            .for_each(|(k, v)| *v = k as f64 * 0.1);
        let pb = dir.path().join("s.bin");
        f2.write_bin(&pb).unwrap();
        let dump = read_bin(&pb).unwrap();
        assert_eq!((dump.nx, dump.ny, dump.t), (5, 5, 2.5));
        assert_eq!(dump.u, f2.u);
        assert_eq!(fs::metadata(&pb).unwrap().len(), 28 + 25 * 8);
    }
}
