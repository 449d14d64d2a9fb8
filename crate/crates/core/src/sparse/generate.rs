use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SparseMatrix;
use crate::error::{Error, Result};

/// 7-point finite-difference Laplacian on an `nx × ny × nz` grid with
/// Dirichlet boundaries. Node `(x, y, z)` has index `x + nx*(y + ny*z)`.
pub fn gen_laplace3d(nx: usize, ny: usize, nz: usize) -> Result<SparseMatrix> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::ZeroExtent { nx, ny, nz });
    }
    let n = nx * ny * nz;
    let idx = |x: usize, y: usize, z: usize| x + nx * (y + ny * z);
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(7 * n);
    let mut values = Vec::with_capacity(7 * n);
    row_ptr.push(0);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                // Ascending column order: -z, -y, -x, diag, +x, +y, +z.
                if z > 0 {
                    col_idx.push(idx(x, y, z - 1));
                    values.push(-1.0);
                }
                if y > 0 {
                    col_idx.push(idx(x, y - 1, z));
                    values.push(-1.0);
                }
                if x > 0 {
                    col_idx.push(idx(x - 1, y, z));
                    values.push(-1.0);
                }
                col_idx.push(idx(x, y, z));
                values.push(6.0);
                if x + 1 < nx {
                    col_idx.push(idx(x + 1, y, z));
                    values.push(-1.0);
                }
                if y + 1 < ny {
                    col_idx.push(idx(x, y + 1, z));
                    values.push(-1.0);
                }
                if z + 1 < nz {
                    col_idx.push(idx(x, y, z + 1));
                    values.push(-1.0);
                }
                row_ptr.push(col_idx.len());
            }
        }
    }
    Ok(SparseMatrix::from_csr(n, row_ptr, col_idx, values)?.with_symmetric_hint(true))
}

/// Random symmetric irreducibly diagonally dominant M-matrix.
///
/// A random spanning tree guarantees connectivity; extra edges are added
/// until roughly `density * n * n` nonzeros are reached. About a third of
/// the rows (and always row 0) get a positive dominance margin, the rest
/// are exactly balanced.
pub fn random_r_matrix(n: usize, density: f64, seed: u64) -> SparseMatrix {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    for i in 1..n {
        let j = rng.random_range(0..i);
        weights.insert((j, i), rng.random_range(0.1..1.0));
    }
    let target_offdiag = ((density * (n * n) as f64) as usize).saturating_sub(n) / 2;
    let mut attempts = 0;
    while weights.len() < target_offdiag && attempts < 20 * n * n {
        attempts += 1;
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        weights.entry(key).or_insert_with(|| rng.random_range(0.1..1.0));
    }

    let mut rowsum = vec![0.0; n];
    let mut trip = Vec::with_capacity(2 * weights.len() + n);
    for (&(i, j), &w) in &weights {
        trip.push((i, j, -w));
        trip.push((j, i, -w));
        rowsum[i] += w;
        rowsum[j] += w;
    }
    for (i, &s) in rowsum.iter().enumerate() {
        let margin = if i == 0 || rng.random::<f64>() < 0.33 {
            rng.random_range(0.05..1.0) * s.max(0.1)
        } else {
            0.0
        };
        trip.push((i, i, s + margin));
    }
    SparseMatrix::from_triplets(n, trip)
        .expect("generated indices are in range")
        .with_symmetric_hint(true)
}
