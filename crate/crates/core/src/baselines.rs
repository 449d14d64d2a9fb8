//! Classical incomplete Cholesky (LDLᵀ form) for comparison: the
//! pattern-restricted IC(0) and the threshold-based ICT.
//!
//! Both factor the same matrix as the stochastic builder, `rev(P A Pᵀ)`, so
//! a comparison under one ordering only differs in how entries are chosen.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::precond::{FactorMeta, IncompleteLdl};
use crate::sparse::{Permutation, SparseMatrix};

#[derive(Clone, Copy, Debug)]
enum Rule {
    /// Keep only positions present in the matrix.
    Pattern,
    /// Drop `|u| < drop_tol * ‖row‖₂`, then keep the `max_row_nnz` largest.
    Threshold { drop_tol: f64, max_row_nnz: Option<usize> },
}

/// IC(0): fill restricted to the nonzero pattern of the matrix.
pub fn ic0(a: &SparseMatrix, ordering: &Permutation) -> Result<IncompleteLdl> {
    let meta = FactorMeta { method: "ic0".into(), ..Default::default() };
    factor(a, ordering, Rule::Pattern, meta)
}

/// ICT with relative drop tolerance `drop_tol` and an optional cap on the
/// off-diagonal entries kept per row of `L`.
pub fn ict(a: &SparseMatrix, ordering: &Permutation, drop_tol: f64, max_row_nnz: Option<usize>) -> Result<IncompleteLdl> {
    if !(drop_tol >= 0.0) {
        return Err(Error::InvalidCriterion(format!("drop tolerance must be non-negative, got {drop_tol}")));
    }
    let meta = FactorMeta {
        method: "ict".into(),
        drop_tol: Some(drop_tol),
        max_row_nnz,
        ..Default::default()
    };
    factor(a, ordering, Rule::Threshold { drop_tol, max_row_nnz }, meta)
}

/// Complete LDLᵀ: ICT that drops nothing.
pub fn complete_ldl(a: &SparseMatrix, ordering: &Permutation) -> Result<IncompleteLdl> {
    let mut f = ict(a, ordering, 0.0, None)?;
    f.meta.method = "ldl".into();
    Ok(f)
}

fn factor(a: &SparseMatrix, ordering: &Permutation, rule: Rule, meta: FactorMeta) -> Result<IncompleteLdl> {
    if ordering.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: ordering.len() });
    }
    let f = a.permute(&ordering.reversed());
    let (l, d) = left_looking(&f, rule)?;
    IncompleteLdl::new(l, d, ordering.clone(), true, meta)
}

/// Row-by-row LDLᵀ. Row `i` of `L` is obtained by eliminating the entries
/// of row `i` of `F` in increasing column order against the finished rows;
/// `u_k = L_ik D_k` is the value seen when column `k` is reached.
fn left_looking(f: &SparseMatrix, rule: Rule) -> Result<(SparseMatrix, Vec<f64>)> {
    let n = f.n();
    // cols[k] holds (j, L_jk) for finished rows j > k.
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut d = vec![0.0; n];
    let mut work = vec![0.0; n];
    let mut present = vec![false; n];
    let mut allowed = vec![false; n];
    let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
    let mut kept: Vec<(usize, f64)> = Vec::new();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);

    for i in 0..n {
        let (fc, fv) = f.row(i);
        let diag = f.get(i, i);
        if diag <= 0.0 {
            return Err(Error::NonPositivePivot { row: i, value: diag });
        }
        let row_norm = fv.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (&c, &v) in fc.iter().zip(fv) {
            if c < i {
                work[c] = v;
                present[c] = true;
                allowed[c] = true;
                heap.push(Reverse(c));
            }
        }
        kept.clear();
        let mut dropped = 0.0;
        while let Some(Reverse(k)) = heap.pop() {
            let u = work[k];
            work[k] = 0.0;
            present[k] = false;
            if let Rule::Threshold { drop_tol, .. } = rule {
                if u.abs() < drop_tol * row_norm || u == 0.0 {
                    dropped += u.abs();
                    continue;
                }
            }
            if u == 0.0 {
                continue;
            }
            kept.push((k, u));
            for &(j, ljk) in &cols[k] {
                if present[j] {
                    work[j] -= u * ljk;
                } else if matches!(rule, Rule::Threshold { .. }) || allowed[j] {
                    work[j] = -u * ljk;
                    present[j] = true;
                    heap.push(Reverse(j));
                }
            }
        }
        for &c in fc {
            allowed[c] = false;
        }
        if let Rule::Threshold { max_row_nnz: Some(cap), .. } = rule {
            if kept.len() > cap {
                kept.sort_by(|x, y| (y.1.abs() / d[y.0]).total_cmp(&(x.1.abs() / d[x.0])));
                dropped += kept[cap..].iter().map(|e| e.1.abs()).sum::<f64>();
                kept.truncate(cap);
                kept.sort_unstable_by_key(|e| e.0);
            }
        }
        let mut di = diag;
        for &(k, u) in &kept {
            di -= u * u / d[k];
        }
        if di <= 0.0 {
            if matches!(rule, Rule::Threshold { .. }) {
                di += dropped;
            }
            if di <= 0.0 {
                return Err(Error::NonPositivePivot { row: i, value: di });
            }
        }
        d[i] = di;
        for &(k, u) in &kept {
            let lik = u / d[k];
            col_idx.push(k);
            values.push(lik);
            cols[k].push((i, lik));
        }
        col_idx.push(i);
        values.push(1.0);
        row_ptr.push(col_idx.len());
    }
    Ok((SparseMatrix::from_csr(n, row_ptr, col_idx, values)?, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{gen_laplace3d, random_r_matrix, sym_factor_pattern};
    use walkprec_oracle as oracle;

    fn close(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
        oracle::frobenius_diff(&a.to_vec(), &b.to_vec()) < tol
    }

    #[test]
    fn complete_ldl_matches_dense_oracle() {
        for seed in 0..10 {
            let a = random_r_matrix(9, 0.4, seed);
            let p = Permutation::new((0..9).map(|i| (i * 4 + seed as usize) % 9).collect()).unwrap();
            let f = complete_ldl(&a, &p).unwrap();
            let dense = a.permute(f.frame()).to_dense();
            let (l, d) = oracle::ldl(&dense);
            assert!(close(&f.l().to_dense(), &l, 1e-12), "seed {seed}");
            for (x, y) in f.d().iter().zip(&d) {
                assert!((x - y).abs() < 1e-12 * y.abs());
            }
        }
    }

    #[test]
    fn tridiagonal_ic0_is_complete() {
        let a = gen_laplace3d(7, 1, 1).unwrap();
        let p = Permutation::identity(7);
        let inc = ic0(&a, &p).unwrap();
        let full = complete_ldl(&a, &p).unwrap();
        assert!(close(&inc.l().to_dense(), &full.l().to_dense(), 1e-14));
        assert_eq!(inc.d(), full.d());
    }

    #[test]
    fn diagonal_matrix_gives_unit_factor() {
        let a = SparseMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let f = ic0(&a, &Permutation::identity(3)).unwrap();
        assert_eq!(f.l().to_dense(), SparseMatrix::identity(3).to_dense());
        assert_eq!(f.d(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn ic0_pattern_is_permuted_lower_triangle() {
        let a = gen_laplace3d(4, 4, 4).unwrap();
        let p = crate::precond::make_ordering(&a, crate::precond::OrderingStrategy::Random, 8);
        let f = ic0(&a, &p).unwrap();
        assert_eq!(f.l().pattern(), a.permute(f.frame()).lower_triangle().pattern());
    }

    #[test]
    fn infinite_drop_tolerance_is_jacobi() {
        let a = gen_laplace3d(3, 3, 3).unwrap();
        let f = ict(&a, &Permutation::identity(27), f64::INFINITY, None).unwrap();
        assert_eq!(f.nnz(), 27);
        assert!(f.d().iter().all(|&d| d == 6.0));
    }

    #[test]
    fn ict_is_between_ic0_and_complete() {
        let a = gen_laplace3d(5, 5, 5).unwrap();
        let p = Permutation::identity(125);
        let c0 = ic0(&a, &p).unwrap().nnz();
        let ct = ict(&a, &p, 0.01, None).unwrap();
        let cf = complete_ldl(&a, &p).unwrap().nnz();
        assert!(c0 < ct.nnz() && ct.nnz() < cf);
        assert!(ct.l().pattern_excess(&sym_factor_pattern(&a, ct.frame())).is_empty());
        let capped = ict(&a, &p, 0.01, Some(3)).unwrap();
        assert!((0..125).all(|i| capped.l().row(i).0.len() <= 4));
    }

    #[test]
    fn negative_tolerance_rejected() {
        let a = gen_laplace3d(2, 2, 1).unwrap();
        assert!(ict(&a, &Permutation::identity(4), -1.0, None).is_err());
    }
}
