//! Preconditioned conjugate gradients with multiplication accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precond::IncompleteLdl;
use crate::sparse::{dot, norm2, Permutation, SparseMatrix};

/// Something that approximates `F⁻¹` for `F = Q A Qᵀ`.
pub trait Preconditioner {
    fn dim(&self) -> usize;

    /// The permutation `Q` defining the frame the preconditioner acts in.
    fn frame(&self) -> Permutation;

    /// `z = M⁻¹ r`; returns the number of multiplications performed.
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<usize>;

    /// Stored nonzeros counted by the cost model.
    fn size(&self) -> usize;
}

/// `M = I`: no preconditioning at all.
#[derive(Clone, Debug)]
pub struct IdentityPreconditioner {
    n: usize,
}

impl IdentityPreconditioner {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Preconditioner for IdentityPreconditioner {
    fn dim(&self) -> usize {
        self.n
    }

    fn frame(&self) -> Permutation {
        Permutation::identity(self.n)
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<usize> {
        z.copy_from_slice(r);
        Ok(0)
    }

    fn size(&self) -> usize {
        0
    }
}

impl Preconditioner for IncompleteLdl {
    fn dim(&self) -> usize {
        self.n()
    }

    fn frame(&self) -> Permutation {
        IncompleteLdl::frame(self).clone()
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<usize> {
        apply_ldl_inverse(self, r, z)
    }

    fn size(&self) -> usize {
        self.nnz()
    }
}

/// Solves `L D Lᵀ z = r` by forward substitution, diagonal division and
/// backward substitution. Returns the multiplication count `2C - N`.
pub fn apply_ldl_inverse(f: &IncompleteLdl, r: &[f64], z: &mut [f64]) -> Result<usize> {
    let n = f.n();
    if r.len() != n || z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: r.len().min(z.len()) });
    }
    let l = f.l();
    let d = f.d();
    let mut mults = 0;
    for i in 0..n {
        let (cols, vals) = l.row(i);
        let mut s = r[i];
        for (&c, &v) in cols.iter().zip(vals) {
            if c < i {
                s -= v * z[c];
                mults += 1;
            }
        }
        z[i] = s;
    }
    for (i, zi) in z.iter_mut().enumerate() {
        if d[i] == 0.0 {
            return Err(Error::NonPositivePivot { row: i, value: 0.0 });
        }
        *zi /= d[i];
        mults += 1;
    }
    // Lᵀ z = y, walking the rows of L backwards as columns of Lᵀ.
    for i in (0..n).rev() {
        let (cols, vals) = l.row(i);
        let zi = z[i];
        for (&c, &v) in cols.iter().zip(vals) {
            if c < i {
                z[c] -= v * zi;
                mults += 1;
            }
        }
    }
    Ok(mults)
}

/// Per-iteration multiplication model `2C + E + 4N`.
pub fn count_m1(c: u64, e: u64, n: u64) -> u64 {
    2 * c + e + 4 * n
}

#[derive(Clone, Debug)]
pub struct PcgOptions {
    /// Relative residual target `‖b - A x‖ / ‖b‖`.
    pub tol: f64,
    /// `None` means `ceil(10 sqrt(N))`.
    pub max_iter: Option<usize>,
    /// Recompute the true residual every this many iterations.
    pub true_residual_every: usize,
}

impl Default for PcgOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: None, true_residual_every: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub n: usize,
    /// Nonzeros of the system matrix.
    pub e: usize,
    /// Nonzeros of the preconditioner.
    pub c: usize,
    pub iterations: usize,
    /// Modeled multiplications per iteration, `2C + E + 4N`.
    pub m1: u64,
    /// `M1 * iterations`.
    pub m2: u64,
    /// Multiplications counted inside the iteration loop, per iteration.
    pub measured_per_iter: Vec<u64>,
    /// Multiplications spent on true-residual checks.
    pub overhead_mults: u64,
    /// Relative recursive residual after each iteration.
    pub residuals: Vec<f64>,
    pub final_true_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` with PCG in the preconditioner's frame and returns `x`
/// in the original ordering.
pub fn pcg_solve(
    a: &SparseMatrix,
    b: &[f64],
    pre: &dyn Preconditioner,
    opts: &PcgOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    pcg_impl(a, b, pre, opts, None)
}

/// [`pcg_solve`] calling `observer(iteration, x)` after every iteration,
/// with `x` in the original ordering.
pub fn pcg_observe(
    a: &SparseMatrix,
    b: &[f64],
    pre: &dyn Preconditioner,
    opts: &PcgOptions,
    observer: &mut dyn FnMut(usize, &[f64]),
) -> Result<(Vec<f64>, SolveReport)> {
    pcg_impl(a, b, pre, opts, Some(observer))
}

fn pcg_impl(
    a: &SparseMatrix,
    b: &[f64],
    pre: &dyn Preconditioner,
    opts: &PcgOptions,
    mut observer: Option<&mut dyn FnMut(usize, &[f64])>,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.n();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if pre.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: pre.dim() });
    }
    let q = pre.frame();
    let f = a.permute(&q);
    let rhs = q.apply(b);
    let c = pre.size();
    let e = a.nnz();
    let m1 = count_m1(c as u64, e as u64, n as u64);
    let max_iter = opts.max_iter.unwrap_or_else(|| (10.0 * (n as f64).sqrt()).ceil() as usize);
    let every = opts.true_residual_every.max(1);

    let bnorm = norm2(&rhs);
    let mut report = SolveReport {
        n,
        e,
        c,
        iterations: 0,
        m1,
        m2: 0,
        measured_per_iter: Vec::new(),
        overhead_mults: 0,
        residuals: Vec::new(),
        final_true_residual: 0.0,
        converged: false,
    };
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        report.converged = true;
        return Ok((x, report));
    }

    let mut r = rhs.clone();
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut qv = vec![0.0; n];
    let mut rz_old = 0.0;
    let target = opts.tol * bnorm;

    for it in 1..=max_iter {
        let mut mults = pre.apply(&r, &mut z)? as u64;
        let rz = dot(&r, &z);
        mults += n as u64;
        if it == 1 {
            p.copy_from_slice(&z);
        } else {
            let beta = rz / rz_old;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            mults += n as u64;
        }
        rz_old = rz;
        mults += f.matvec_into(&p, &mut qv) as u64;
        let pq = dot(&p, &qv);
        mults += n as u64;
        if pq <= 0.0 || !pq.is_finite() {
            return Err(Error::NonPositivePivot { row: it, value: pq });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * qv[i];
        }
        mults += 2 * n as u64;
        let rnorm = norm2(&r);
        mults += n as u64;
        report.iterations = it;
        report.residuals.push(rnorm / bnorm);
        report.measured_per_iter.push(mults);
        if let Some(obs) = observer.as_deref_mut() {
            obs(it, &q.unapply(&x));
        }

        if rnorm < target || it % every == 0 {
            let true_r = true_residual(&f, &rhs, &x);
            report.overhead_mults += (e + n) as u64;
            if true_r < target {
                report.final_true_residual = true_r / bnorm;
                report.converged = true;
                break;
            }
        }
    }
    if !report.converged {
        report.final_true_residual = true_residual(&f, &rhs, &x) / bnorm;
    }
    report.m2 = m1 * report.iterations as u64;
    Ok((q.unapply(&x), report))
}

fn true_residual(f: &SparseMatrix, rhs: &[f64], x: &[f64]) -> f64 {
    let ax = f.matvec(x);
    rhs.iter().zip(&ax).map(|(b, v)| (b - v) * (b - v)).sum::<f64>().sqrt()
}
