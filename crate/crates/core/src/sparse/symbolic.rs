use super::{Permutation, SparseMatrix};

/// Exact nonzero pattern of the complete `L` factor of `Q A Qᵀ`, where `Q`
/// is `order`, found by symbolic Gaussian elimination.
///
/// Eliminating a node turns its remaining neighborhood into a clique; the
/// neighborhood itself becomes that node's column of `L`. The result is
/// lower triangular, includes the diagonal and stores `1.0` at every
/// structural nonzero. `A` must be structurally symmetric; only the union
/// of both triangles is looked at.
pub fn sym_factor_pattern(a: &SparseMatrix, order: &Permutation) -> SparseMatrix {
    let n = a.n();
    let b = a.permute(order);

    // adj[v] holds the not-yet-eliminated neighbours of v, i.e. those > v.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in b.row(i).0 {
            if j > i {
                adj[i].push(j);
            } else if j < i {
                adj[j].push(i);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut trip: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
    let mut merged = Vec::new();
    for v in 0..n {
        let column = std::mem::take(&mut adj[v]);
        for (pos, &u) in column.iter().enumerate() {
            trip.push((u, v, 1.0));
            // Members of the clique above u join u's neighbourhood.
            let tail = &column[pos + 1..];
            if tail.is_empty() {
                continue;
            }
            merged.clear();
            merge_sorted(&adj[u], tail, &mut merged);
            std::mem::swap(&mut adj[u], &mut merged);
        }
    }
    SparseMatrix::from_triplets(n, trip).expect("indices are in range")
}

fn merge_sorted(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}
