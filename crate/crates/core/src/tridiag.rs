//! Tridiagonal systems and their two direct solvers: the Thomas algorithm
//! (sequential LU sweep) and cyclic reduction (odd-even elimination).

use crate::error::{invalid, Error, Result};

/// `lower[i]·x[i-1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]`, stored as
/// full-length bands with `lower[0] = upper[n-1] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagonalSystem {
    /// `sub` and `sup` hold the `n-1` off-diagonal entries.
    pub fn new(sub: &[f64], diag: Vec<f64>, sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(invalid("empty tridiagonal system"));
        }
        if sub.len() != n - 1 || sup.len() != n - 1 {
            return Err(Error::Shape {
                expected: n - 1,
                found: sub.len().max(sup.len()),
            });
        }
        let mut lower = vec![0.0; n];
        lower[1..].copy_from_slice(sub);
        let mut upper = vec![0.0; n];
        upper[..n - 1].copy_from_slice(sup);
        Ok(TridiagonalSystem { lower, diag, upper })
    }

    /// Bands already padded to length `n`; the corner entries are zeroed.
    pub fn from_bands(mut lower: Vec<f64>, diag: Vec<f64>, mut upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if lower.len() != n || upper.len() != n || n == 0 {
            return Err(Error::Shape {
                expected: n,
                found: lower.len().min(upper.len()),
            });
        }
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        Ok(TridiagonalSystem { lower, diag, upper })
    }

    /// Constant-band system such as `(-1, 2, -1)`.
    pub fn constant(n: usize, sub: f64, diag: f64, sup: f64) -> Result<Self> {
        Self::from_bands(vec![sub; n], vec![diag; n], vec![sup; n])
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Weak row diagonal dominance `|d_i| >= |l_i| + |u_i|`.
    pub fn is_diagonally_dominant(&self) -> bool {
        (0..self.len()).all(|i| self.diag[i].abs() >= self.lower[i].abs() + self.upper[i].abs())
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

fn check_rhs(sys: &TridiagonalSystem, rhs: &[f64]) -> Result<()> {
    if rhs.len() != sys.len() {
        return Err(Error::Shape {
            expected: sys.len(),
            found: rhs.len(),
        });
    }
    Ok(())
}

pub fn thomas_solve(sys: &TridiagonalSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    check_rhs(sys, rhs)?;
    let mut x = vec![0.0; sys.len()];
    let mut scratch = vec![0.0; sys.len()];
    thomas_into(&sys.lower, &sys.diag, &sys.upper, rhs, &mut x, &mut scratch)?;
    Ok(x)
}

/// Thomas algorithm on raw bands; `scratch` holds the modified super-diagonal.
pub fn thomas_into(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
    x: &mut [f64],
    scratch: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::SingularSystem { row: 0 });
    }
    scratch[0] = upper[0] / pivot;
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * scratch[i - 1];
        if pivot == 0.0 {
            return Err(Error::SingularSystem { row: i });
        }
        scratch[i] = upper[i] / pivot;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= scratch[i] * x[i + 1];
    }
    Ok(())
}

pub fn cyclic_reduction_solve(sys: &TridiagonalSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    check_rhs(sys, rhs)?;
    let mut ws = CyclicReduction::default();
    let mut x = vec![0.0; sys.len()];
    ws.solve(&sys.lower, &sys.diag, &sys.upper, rhs, &mut x)?;
    Ok(x)
}

/// Reusable buffers for cyclic reduction. Systems are padded with identity
/// rows up to the next size of the form `2^k - 1`.
#[derive(Debug, Default, Clone)]
pub struct CyclicReduction {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    x: Vec<f64>,
}

/// Smallest `2^k - 1 >= n`.
pub fn padded_size(n: usize) -> usize {
    let mut m = 1;
    while m < n {
        m = 2 * m + 1;
    }
    m
}

impl CyclicReduction {
    pub fn solve(
        &mut self,
        lower: &[f64],
        diag: &[f64],
        upper: &[f64],
        rhs: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        let n = diag.len();
        if n == 0 {
            return Ok(());
        }
        let m = padded_size(n);
        for buf in [
            &mut self.a,
            &mut self.b,
            &mut self.c,
            &mut self.d,
            &mut self.x,
        ] {
            buf.clear();
            buf.resize(m, 0.0);
        }
        self.a[..n].copy_from_slice(lower);
        self.b[..n].copy_from_slice(diag);
        self.c[..n].copy_from_slice(upper);
        self.d[..n].copy_from_slice(rhs);
        self.a[0] = 0.0;
        self.c[n - 1] = 0.0;
        self.b[n..].fill(1.0);

        let (a, b, c, d, x) = (
            &mut self.a,
            &mut self.b,
            &mut self.c,
            &mut self.d,
            &mut self.x,
        );

        // Forward elimination: at stride s, row i absorbs rows i-s and i+s.
        let mut s = 1;
        while 2 * s - 1 < m && 4 * s - 1 <= m {
            let mut i = 2 * s - 1;
            while i < m {
                let left = i - s;
                let right = i + s;
                if b[left] == 0.0 {
                    return Err(Error::SingularSystem {
                        row: left.min(n - 1),
                    });
                }
                let alpha = -a[i] / b[left];
                let mut bi = b[i] + alpha * c[left];
                let mut di = d[i] + alpha * d[left];
                a[i] = alpha * a[left];
                if right < m {
                    if b[right] == 0.0 {
                        return Err(Error::SingularSystem {
                            row: right.min(n - 1),
                        });
                    }
                    let gamma = -c[i] / b[right];
                    bi += gamma * a[right];
                    di += gamma * d[right];
                    c[i] = gamma * c[right];
                } else {
                    c[i] = 0.0;
                }
                b[i] = bi;
                d[i] = di;
                i += 2 * s;
            }
            s *= 2;
        }

        // `s` is now the stride of the single remaining equation.
        let mid = s - 1;
        if b[mid] == 0.0 {
            return Err(Error::SingularSystem {
                row: mid.min(n - 1),
            });
        }
        x[mid] = d[mid] / b[mid];

        while s > 1 {
            s /= 2;
            let mut i = s - 1;
            while i < m {
                let mut r = d[i];
                if i >= s {
                    r -= a[i] * x[i - s];
                }
                if i + s < m {
                    r -= c[i] * x[i + s];
                }
                if b[i] == 0.0 {
                    return Err(Error::SingularSystem { row: i.min(n - 1) });
                }
                x[i] = r / b[i];
                i += 2 * s;
            }
        }
        out[..n].copy_from_slice(&x[..n]);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(sys: &TridiagonalSystem, rhs: &[f64]) -> Vec<f64> {
        let n = sys.len();
        let mut m = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            m[i][i] = sys.diag()[i];
            if i > 0 {
                m[i][i - 1] = sys.lower()[i];
            }
            if i + 1 < n {
                m[i][i + 1] = sys.upper()[i];
            }
            m[i][n] = rhs[i];
        }
        for col in 0..n {
            let p = (col..n)
                .max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))
                .unwrap();
            m.swap(col, p);
            for r in col + 1..n {
                let f = m[r][col] / m[col][col];
                for k in col..=n {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
            x[i] = (m[i][n] - s) / m[i][i];
        }
        x
    }

    pub(crate) fn random_dominant(rng: &mut impl Rng, n: usize) -> TridiagonalSystem {
        let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upper: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag = (0..n)
            .map(|i| {
                let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                s * (lower[i].abs() + upper[i].abs() + rng.gen_range(0.1..2.0))
            })
            .collect();
        TridiagonalSystem::from_bands(lower, diag, upper).unwrap()
    }

    #[test]
    fn identity_returns_rhs() {
        let sys = TridiagonalSystem::constant(9, 0.0, 1.0, 0.0).unwrap();
        let r: Vec<f64> = (0..9).map(|i| i as f64 - 3.5).collect();
        assert_eq!(thomas_solve(&sys, &r).unwrap(), r);
        assert_eq!(cyclic_reduction_solve(&sys, &r).unwrap(), r);
    }

    #[test]
    fn second_difference_n3() {
        let sys = TridiagonalSystem::constant(3, -1.0, 2.0, -1.0).unwrap();
        let x = thomas_solve(&sys, &[1.0, 1.0, 1.0]).unwrap();
        let oracle = dense_solve(&sys, &[1.0, 1.0, 1.0]);
        for (a, b) in x.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in x.iter().zip([1.5, 2.0, 1.5]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn thomas_matches_dense_n200() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let sys = random_dominant(&mut rng, 200);
        let rhs: Vec<f64> = (0..200).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let x = thomas_solve(&sys, &rhs).unwrap();
        let oracle = dense_solve(&sys, &rhs);
        for (a, b) in x.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
        let r = sys.apply(&x);
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(r
            .iter()
            .zip(&rhs)
            .all(|(a, b)| (a - b).abs() <= 1e-10 * scale));
    }

    #[test]
    fn cyclic_reduction_second_difference_n7() {
        let sys = TridiagonalSystem::constant(7, -1.0, 2.0, -1.0).unwrap();
        let ones = vec![1.0; 7];
        let cr = cyclic_reduction_solve(&sys, &ones).unwrap();
        let th = thomas_solve(&sys, &ones).unwrap();
        for (a, b) in cr.iter().zip(&th) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cyclic_reduction_matches_thomas_sweep() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for n in [1, 2, 3, 5, 64, 257, 1000] {
            let sys = random_dominant(&mut rng, n);
            let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cr = cyclic_reduction_solve(&sys, &rhs).unwrap();
            let th = thomas_solve(&sys, &rhs).unwrap();
            let diff = cr
                .iter()
                .zip(&th)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(diff <= 1e-9, "n={n}: {diff}");
        }
    }

    #[test]
    fn cyclic_reduction_is_deterministic() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let sys = random_dominant(&mut rng, 300);
        let rhs: Vec<f64> = (0..300).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = cyclic_reduction_solve(&sys, &rhs).unwrap();
        let b = cyclic_reduction_solve(&sys, &rhs).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn zero_pivot_is_reported() {
        let sys = TridiagonalSystem::constant(4, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            thomas_solve(&sys, &[1.0; 4]),
            Err(Error::SingularSystem { row: 0 })
        ));
        let sys = TridiagonalSystem::constant(3, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            cyclic_reduction_solve(&sys, &[1.0; 3]),
            Err(Error::SingularSystem { .. })
        ));
        let sys = TridiagonalSystem::constant(3, 1.0, 1.0, 1.0).unwrap();
        assert!(thomas_solve(&sys, &[1.0; 2]).is_err());
    }

    #[test]
    fn padding_sizes() {
        assert_eq!(padded_size(1), 1);
        assert_eq!(padded_size(2), 3);
        assert_eq!(padded_size(7), 7);
        assert_eq!(padded_size(8), 15);
        assert_eq!(padded_size(255), 255);
        assert_eq!(padded_size(257), 511);
    }
}
