//! Linear solvers for the per-step systems: sparse LU (faer) with a cached
//! symbolic factorization, and Jacobi-preconditioned BiCGSTAB on a
//! matrix-free operator.

use std::str::FromStr;

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, Mat};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Direct,
    Krylov,
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "krylov" | "iterative" => Ok(Self::Krylov),
            _ => Err(Error::Parse(format!("unknown solver '{s}' (expected direct or krylov)"))),
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::Krylov => "krylov",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub method: SolverKind,
    /// Relative residual `‖b − Ax‖₂/‖b‖₂` required of every solve.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            method: SolverKind::Direct,
            tolerance: 1e-12,
            max_iterations: 2000,
        }
    }
}

impl SolveSettings {
    pub fn krylov() -> Self {
        Self {
            method: SolverKind::Krylov,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Argument(format!("solver tolerance {} must be positive", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Argument("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Relative residual `‖b − Ax‖/‖b‖` (absolute when `b = 0`).
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let nb = norm2(b);
    if nb > 0.0 {
        norm2(&r) / nb
    } else {
        norm2(&r)
    }
}

/// Normwise backward error `‖b − Ax‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)`.
pub fn backward_error(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r = b.iter().zip(&ax).fold(0.0f64, |m, (bi, ai)| m.max((bi - ai).abs()));
    let norm_a = (0..a.nrows())
        .map(|i| a.row(i).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = norm_a * inf(x) + inf(b);
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

/// Sparse LU solver that keeps the symbolic analysis of the last pattern.
#[derive(Default)]
pub struct DirectSolver {
    cached: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
}

impl std::fmt::Debug for DirectSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectSolver").field("has_symbolic", &self.cached.is_some()).finish()
    }
}

/// Numeric LU factors of one matrix.
pub struct Factorization {
    lu: Lu<usize, f64>,
    n: usize,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("n", &self.n).finish()
    }
}

impl Factorization {
    fn raw_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut m = Mat::from_fn(self.n, 1, |i, _| rhs[i]);
        // factors are of Aᵀ, see `DirectSolver::factor`
        self.lu.solve_transpose_in_place_with_conj(Conj::No, m.as_mut());
        (0..self.n).map(|i| m[(i, 0)]).collect()
    }

    /// Solve `A x = b` where `a` is the factored matrix; fails if the
    /// normwise backward error exceeds `tolerance` after up to three steps of
    /// iterative refinement.
    pub fn solve(&self, a: &CsrMatrix, b: &[f64], tolerance: f64) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Argument(format!(
                "right-hand side has length {} for a system of size {}",
                b.len(),
                self.n
            )));
        }
        let mut x = self.raw_solve(b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solve {
                reason: "direct solve produced non-finite values".into(),
                residual: f64::NAN,
            });
        }
        let mut res = backward_error(a, &x, b);
        for _ in 0..3 {
            if res <= tolerance {
                break;
            }
            let ax = a.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let dx = self.raw_solve(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
            res = backward_error(a, &x, b);
        }
        if !(res <= tolerance) {
            return Err(Error::Solve {
                reason: "direct solve did not reach the requested backward error".into(),
                residual: res,
            });
        }
        Ok(x)
    }
}

impl DirectSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn factor(&mut self, a: &CsrMatrix) -> Result<Factorization> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Argument(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
        }
        // The CSR arrays of A are the CSC arrays of Aᵀ: factor Aᵀ and use
        // transposed solves.
        let reuse = matches!(&self.cached, Some((rp, ci, _)) if rp == a.row_ptr() && ci == a.col_idx());
        if !reuse {
            let sym = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
            let symbolic = SymbolicLu::try_new(sym).map_err(|e| Error::Solve {
                reason: format!("symbolic factorization failed: {e:?}"),
                residual: f64::NAN,
            })?;
            self.cached = Some((a.row_ptr().to_vec(), a.col_idx().to_vec(), symbolic));
        }
        let (rp, ci, symbolic) = self.cached.as_ref().expect("cached symbolic");
        let sym = SymbolicSparseColMatRef::new_checked(n, n, rp.as_slice(), None, ci.as_slice());
        let mat = SparseColMatRef::new(sym, a.values());
        let lu = Lu::try_new_with_symbolic(symbolic.clone(), mat).map_err(|e| Error::Solve {
            reason: format!("matrix is singular: {e:?}"),
            residual: f64::NAN,
        })?;
        Ok(Factorization { lu, n })
    }

    /// Factor and solve `A x = b` in one go.
    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64], tolerance: f64) -> Result<Vec<f64>> {
        if b.len() != a.nrows() {
            return Err(Error::Argument(format!(
                "right-hand side has length {} for a system of size {}",
                b.len(),
                a.nrows()
            )));
        }
        if b.is_empty() {
            return Ok(Vec::new());
        }
        self.factor(a)?.solve(a, b, tolerance)
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Right-preconditioned BiCGSTAB for `A x = b` with `A` given by `apply`
/// (`y ← A x`) and a Jacobi preconditioner `inv_diag`. `x` holds the
/// initial guess on entry.
pub fn bicgstab(
    apply: impl Fn(&[f64], &mut [f64]),
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<KrylovStats> {
    let n = b.len();
    let nb = norm2(b);
    let scale = if nb > 0.0 { nb } else { 1.0 };
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut res = norm2(&r) / scale;
    if res <= tolerance {
        return Ok(KrylovStats {
            iterations: 0,
            residual: res,
        });
    }
    let r0 = r.clone();
    let mut p = r.clone();
    let mut v = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut ph = vec![0.0; n];
    let mut sh = vec![0.0; n];
    let mut rho = dot(&r0, &r);
    for it in 1..=max_iterations {
        ph.iter_mut().zip(&p).zip(inv_diag).for_each(|((o, pi), d)| *o = pi * d);
        apply(&ph, &mut v);
        let r0v = dot(&r0, &v);
        if r0v == 0.0 || !r0v.is_finite() {
            return Err(Error::Solve {
                reason: format!("BiCGSTAB breakdown at iteration {it}"),
                residual: res,
            });
        }
        let alpha = rho / r0v;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let sn = norm2(&s) / scale;
        if sn <= tolerance {
            x.iter_mut().zip(&ph).for_each(|(xi, pi)| *xi += alpha * pi);
            return finish(&apply, b, x, scale, tolerance, it);
        }
        sh.iter_mut().zip(&s).zip(inv_diag).for_each(|((o, si), d)| *o = si * d);
        apply(&sh, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(Error::Solve {
                reason: format!("BiCGSTAB breakdown at iteration {it}"),
                residual: sn,
            });
        }
        let omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        res = norm2(&r) / scale;
        if !res.is_finite() {
            return Err(Error::Solve {
                reason: "BiCGSTAB diverged".into(),
                residual: res,
            });
        }
        if res <= tolerance {
            return finish(&apply, b, x, scale, tolerance, it);
        }
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 || omega == 0.0 {
            return Err(Error::Solve {
                reason: format!("BiCGSTAB breakdown at iteration {it}"),
                residual: res,
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
    }
    Err(Error::Solve {
        reason: format!("BiCGSTAB did not converge in {max_iterations} iterations"),
        residual: res,
    })
}

// Confirm convergence on the true residual; the recurrence can drift.
fn finish(
    apply: &impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &[f64],
    scale: f64,
    tolerance: f64,
    iterations: usize,
) -> Result<KrylovStats> {
    let mut ax = vec![0.0; b.len()];
    apply(x, &mut ax);
    let res = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai).powi(2)).sum::<f64>().sqrt() / scale;
    if res <= 10.0 * tolerance {
        Ok(KrylovStats {
            iterations,
            residual: res,
        })
    } else {
        Err(Error::Solve {
            reason: "BiCGSTAB recurrence residual diverged from the true residual".into(),
            residual: res,
        })
    }
}
