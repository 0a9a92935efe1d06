//! Small linear-algebra kernels: tridiagonal and banded solves, CG, dense LU.

use crate::error::{Error, Result};

/// Thomas algorithm for `lo[i]·x[i-1] + di[i]·x[i] + up[i]·x[i+1] = rhs[i]`.
pub fn solve_tridiagonal(lo: &[f64], di: &[f64], up: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = di.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = di[0];
    if beta == 0.0 {
        return Err(Error::Singular("tridiagonal pivot 0".into()));
    }
    c[0] = up[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = di[i] - lo[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Singular(format!("tridiagonal pivot {i}")));
        }
        c[i] = if i + 1 < n { up[i] / beta } else { 0.0 };
        d[i] = (rhs[i] - lo[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Symmetric matrix with bandwidth `w`, stored by diagonals: `band[k][i] = A[i][i+k]`.
#[derive(Clone, Debug)]
pub struct SymBand {
    pub n: usize,
    pub band: Vec<Vec<f64>>,
}

impl SymBand {
    pub fn zeros(n: usize, w: usize) -> Self {
        Self { n, band: (0..=w).map(|k| vec![0.0; n.saturating_sub(k)]).collect() }
    }

    /// Adds `v` to `A[i][j]` (and to `A[j][i]` when `i ≠ j`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.band[b - a][a] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.band.get(b - a).map_or(0.0, |d| d[a])
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (yi, (&d, &xi)) in y.iter_mut().zip(self.band[0].iter().zip(x)) {
            *yi = d * xi;
        }
        for (k, diag) in self.band.iter().enumerate().skip(1) {
            for (i, &a) in diag.iter().enumerate() {
                y[i] += a * x[i + k];
                y[i + k] += a * x[i];
            }
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = self.get(i, j);
            }
        }
        a
    }
}

#[derive(Clone, Debug, Default)]
pub struct CgReport {
    pub iterations: usize,
    /// ‖Ax₀ − b‖ at the starting point.
    pub residual_start: f64,
    pub residual_end: f64,
    pub converged: bool,
    /// Values of `½xᵀAx − bᵀx` after each iteration, starting with x₀.
    pub energy: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients for SPD `A`, stopping at `‖r‖ ≤ tol·max(‖b‖, ‖r₀‖)`.
pub fn cg(a: &SymBand, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize, track: bool) -> CgReport {
    let n = b.len();
    let mut ax = vec![0.0; n];
    a.mul(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let r0 = rr.sqrt();
    let target = tol * dot(b, b).sqrt().max(r0);
    let energy = |x: &[f64], ax: &[f64]| 0.5 * dot(x, ax) - dot(b, x);
    let mut report = CgReport { residual_start: r0, ..Default::default() };
    if track {
        report.energy.push(energy(x, &ax));
    }
    let mut ap = vec![0.0; n];
    let mut it = 0;
    while rr.sqrt() > target && it < max_iter {
        a.mul(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let step = rr / pap;
        if track {
            // E(x + αp) − E(x) = −α·rᵀr/2; exact for CG and free of cancellation.
            let last = report.energy[report.energy.len() - 1];
            report.energy.push(last - 0.5 * step * rr);
        }
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        it += 1;
    }
    report.iterations = it;
    report.residual_end = rr.sqrt();
    report.converged = rr.sqrt() <= target;
    report
}

/// Dense LU factorization with partial pivoting, row-major.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    a: Vec<f64>,
    perm: Vec<usize>,
    norm1: f64,
}

pub fn norm1(a: &[f64], n: usize) -> f64 {
    (0..n).map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>()).fold(0.0, f64::max)
}

impl Lu {
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let norm = norm1(&a, n);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut best) = (k, a[k * n + k].abs());
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 1e-14 * norm.max(f64::MIN_POSITIVE)) {
                return Err(Error::Singular(format!("zero pivot in column {k} of {n}")));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let (top, rest) = a.split_at_mut((k + 1) * n);
            let row_k = &top[k * n..];
            let pivot = row_k[k];
            for row in rest.chunks_exact_mut(n) {
                let l = row[k] / pivot;
                row[k] = l;
                if l != 0.0 {
                    for (x, &y) in row[k + 1..].iter_mut().zip(&row_k[k + 1..]) {
                        *x -= l * y;
                    }
                }
            }
        }
        Ok(Self { n, a, perm, norm1: norm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.a[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.a[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.a[i * n + i];
        }
        x
    }

    /// Solves `Aᵀx = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.a[j * n + i] * y[j]).sum();
            y[i] = (y[i] - s) / self.a[i * n + i];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.a[j * n + i] * y[j]).sum();
            y[i] -= s;
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    /// Hager–Higham estimate of the 1-norm condition number.
    pub fn cond1_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for it in 0..5 {
            let y = self.solve(&x);
            est = y.iter().map(|v| v.abs()).sum::<f64>();
            let xi: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .fold((0, 0.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
            if it > 0 && (zmax <= dot(&z, &x) || j == last_j) {
                break;
            }
            last_j = j;
            x.iter_mut().for_each(|v| *v = 0.0);
            x[j] = 1.0;
        }
        if n > 1 {
            let alt: Vec<f64> = (0..n)
                .map(|i| {
                    let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                    s * (1.0 + i as f64 / (n - 1) as f64)
                })
                .collect();
            let y = self.solve(&alt);
            est = f64::max(est, 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64));
        }
        est * self.norm1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense() {
        let lo = [0.0, 1.0, 2.0, 1.0];
        let di = [4.0, 5.0, 6.0, 5.0];
        let up = [1.0, 2.0, 1.0, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                di[i] * x[i]
                    + if i > 0 { lo[i] * x[i - 1] } else { 0.0 }
                    + if i < 3 { up[i] * x[i + 1] } else { 0.0 }
            })
            .collect();
        let got = solve_tridiagonal(&lo, &di, &up, &rhs).unwrap();
        for i in 0..4 {
            assert!((got[i] - x[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn lu_solves_and_transposes() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let lu = Lu::factor(a.clone(), 3).unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = lu.solve(&b);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - b[i]).abs() < 1e-13);
        }
        let y = lu.solve_transpose(&b);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[j * 3 + i] * y[j]).sum();
            assert!((r - b[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn condition_estimate_of_diagonal() {
        let a = vec![1.0, 0.0, 0.0, 0.0, 0.01, 0.0, 0.0, 0.0, 2.0];
        let c = Lu::factor(a, 3).unwrap().cond1_estimate();
        assert!((c - 200.0).abs() < 1e-9);
    }

    #[test]
    fn singular_is_reported() {
        assert!(Lu::factor(vec![1.0, 2.0, 2.0, 4.0], 2).is_err());
    }

    #[test]
    fn cg_energy_decreases() {
        let mut a = SymBand::zeros(20, 1);
        for i in 0..20 {
            a.add(i, i, 2.0 + i as f64 * 0.1);
            if i + 1 < 20 {
                a.add(i, i + 1, -1.0);
            }
        }
        let b: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; 20];
        let rep = cg(&a, &b, &mut x, 1e-12, 200, true);
        assert!(rep.converged);
        assert!(rep.energy.windows(2).all(|w| w[1] < w[0] + 1e-15));
    }
}
