//! Compressed-row sparse matrices and the structural tools built on them.
//!
//! Every matrix here is square. Column indices inside a row are strictly
//! increasing and no explicit zeros are stored, so `nnz()` is the true
//! structural count used by the cost model.

mod certificate;
mod generate;
pub mod market;
mod permutation;
mod symbolic;

pub use certificate::{validate_r_matrix, RMatrixCertificate};
pub(crate) use certificate::is_connected;
pub use generate::{gen_laplace3d, random_r_matrix};
pub use permutation::Permutation;
pub use symbolic::sym_factor_pattern;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric_hint: bool,
}

impl SparseMatrix {
    /// Builds a matrix from raw compressed-row arrays, checking every
    /// storage invariant.
    pub fn from_csr(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n + 1 {
            return Err(Error::InvalidStorage(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                n + 1
            )));
        }
        if row_ptr[0] != 0 || row_ptr[n] != col_idx.len() || col_idx.len() != values.len() {
            return Err(Error::InvalidStorage(
                "row_ptr endpoints do not match the entry arrays".into(),
            ));
        }
        for i in 0..n {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::InvalidStorage(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            for (k, &c) in cols.iter().enumerate() {
                if c >= n {
                    return Err(Error::IndexOutOfBounds { row: i, col: c, n });
                }
                if k > 0 && cols[k - 1] >= c {
                    return Err(Error::InvalidStorage(format!(
                        "row {i}: column indices not strictly increasing"
                    )));
                }
            }
        }
        if let Some(pos) = values.iter().position(|&v| v == 0.0) {
            return Err(Error::InvalidStorage(format!(
                "explicit zero stored at entry {pos}"
            )));
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
            symmetric_hint: false,
        })
    }

    /// Assembles a matrix from (row, col, value) triplets. Duplicates are
    /// summed and entries that end up exactly zero are dropped.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= n || c >= n {
                return Err(Error::IndexOutOfBounds { row: r, col: c, n });
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut iter = entries.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != 0.0 {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
            symmetric_hint: false,
        })
    }

    /// Converts a dense row-major matrix, skipping zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, trip)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    /// Diagonal matrix; zero entries are left structurally empty.
    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        row_ptr.push(0);
        for (i, &v) in d.iter().enumerate() {
            if v != 0.0 {
                col_idx.push(i);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
            symmetric_hint: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn symmetric_hint(&self) -> bool {
        self.symmetric_hint
    }

    pub fn with_symmetric_hint(mut self, hint: bool) -> Self {
        self.symmetric_hint = hint;
        self
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).0.binary_search(&j).is_ok()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let dst = next[c];
                col_idx[dst] = i;
                values[dst] = v;
                next[c] += 1;
            }
        }
        Self {
            n: self.n,
            row_ptr: counts,
            col_idx,
            values,
            symmetric_hint: self.symmetric_hint,
        }
    }

    /// Symmetric permutation `Q A Qᵀ`: entry `(i, j)` of `self` lands at
    /// `(q(i), q(j))`.
    pub fn permute(&self, q: &Permutation) -> Self {
        assert_eq!(q.len(), self.n, "permutation length must match matrix dimension");
        let n = self.n;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        row_ptr.push(0);
        for new_row in 0..n {
            let old_row = q.inverse()[new_row];
            let (cols, vals) = self.row(old_row);
            scratch.clear();
            scratch.extend(cols.iter().zip(vals).map(|(&c, &v)| (q.forward()[c], v)));
            scratch.sort_unstable_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
            symmetric_hint: self.symmetric_hint,
        }
    }

    /// Reverses both row and column order: `rev(A)[i][j] = A[n-1-i][n-1-j]`.
    pub fn rev(&self) -> Self {
        self.permute(&Permutation::reversal(self.n))
    }

    /// `y = A x`, returning the number of multiplications performed.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> usize {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
        self.nnz()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// True when the nonzero pattern is symmetric (values are ignored).
    pub fn is_structurally_symmetric(&self) -> bool {
        let t = self.transpose();
        t.row_ptr == self.row_ptr && t.col_idx == self.col_idx
    }

    /// True when `A == Aᵀ` up to a relative tolerance of `rel_tol`.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let t = self.transpose();
        if t.row_ptr != self.row_ptr || t.col_idx != self.col_idx {
            return false;
        }
        self.values
            .iter()
            .zip(&t.values)
            .all(|(&a, &b)| (a - b).abs() <= rel_tol * a.abs().max(b.abs()))
    }

    /// Lower triangle including the diagonal.
    pub fn lower_triangle(&self) -> Self {
        let trip = (0..self.n).flat_map(|i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .filter(move |(&c, _)| c <= i)
                .map(move |(&c, &v)| (i, c, v))
                .collect::<Vec<_>>()
        });
        Self::from_triplets(self.n, trip).expect("indices come from a valid matrix")
    }

    /// Boolean pattern as sorted (row, col) pairs.
    pub fn pattern(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| self.row(i).0.iter().map(move |&c| (i, c)))
            .collect()
    }

    /// Entries of `self` that are not structurally present in `other`.
    pub fn pattern_excess(&self, other: &SparseMatrix) -> Vec<(usize, usize)> {
        self.pattern()
            .into_iter()
            .filter(|&(i, j)| !other.contains(i, j))
            .collect()
    }
}

/// Reverses the order of a vector's entries.
pub fn rev_vector(x: &[f64]) -> Vec<f64> {
    x.iter().rev().copied().collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m3() -> SparseMatrix {
        SparseMatrix::from_dense(&[
            vec![1.0, 2.0, 3.0],
            vec![4.0, 5.0, 6.0],
            vec![7.0, 8.0, 9.0],
        ])
        .unwrap()
    }

    #[test]
    fn rev_matches_worked_example() {
        let r = m3().rev();
        assert_eq!(
            r.to_dense(),
            vec![
                vec![9.0, 8.0, 7.0],
                vec![6.0, 5.0, 4.0],
                vec![3.0, 2.0, 1.0]
            ]
        );
    }

    #[test]
    fn rev_of_identity_is_identity() {
        let id = SparseMatrix::identity(7);
        assert_eq!(id.rev().to_dense(), id.to_dense());
    }

    #[test]
    fn rev_vector_basic() {
        assert_eq!(rev_vector(&[1.0, 2.0, 3.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(rev_vector(&rev_vector(&[4.0, 5.0])), vec![4.0, 5.0]);
    }

    #[test]
    fn reversed_system_is_equivalent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let dense: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                (0..10)
                    .map(|_| if rng.random::<f64>() < 0.4 { rng.random::<f64>() - 0.5 } else { 0.0 })
                    .collect()
            })
            .collect();
        let a = SparseMatrix::from_dense(&dense).unwrap();
        let x: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
        let b = a.matvec(&x);
        let lhs = a.rev().matvec(&rev_vector(&x));
        for (u, v) in lhs.iter().zip(rev_vector(&b)) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let a = SparseMatrix::from_triplets(2, vec![(0, 1, 1.0), (0, 1, -1.0), (1, 0, 2.0), (1, 0, 0.5)])
            .unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(1, 0), 2.5);
    }

    #[test]
    fn from_csr_rejects_bad_storage() {
        assert!(SparseMatrix::from_csr(2, vec![0, 1, 2], vec![1, 0], vec![1.0, 0.0]).is_err());
        assert!(SparseMatrix::from_csr(2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(2, vec![0, 1, 2], vec![0, 2], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(2, vec![0, 1, 2], vec![0, 1], vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn transpose_and_permute() {
        let a = m3();
        assert_eq!(a.transpose().get(0, 2), 7.0);
        let q = Permutation::new(vec![2, 0, 1]).unwrap();
        let b = a.permute(&q);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b.get(q.forward()[i], q.forward()[j]), a.get(i, j));
            }
        }
    }

    fn arb_sparse() -> impl Strategy<Value = SparseMatrix> {
        (1usize..12).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n, -5.0f64..5.0), 0..40)
                .prop_map(move |t| SparseMatrix::from_triplets(n, t).unwrap())
        })
    }

    proptest! {
        #[test]
        fn rev_is_an_involution(a in arb_sparse()) {
            prop_assert_eq!(a.rev().rev(), a);
        }

        #[test]
        fn transpose_is_an_involution(a in arb_sparse()) {
            prop_assert_eq!(a.transpose().transpose(), a);
        }
    }
}
