use serde::{Deserialize, Serialize};

use super::SparseMatrix;

/// Result of checking whether a matrix is a symmetric, irreducibly
/// diagonally dominant M-matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RMatrixCertificate {
    pub is_symmetric: bool,
    pub diag_positive: bool,
    pub offdiag_nonpositive: bool,
    pub row_dominant: bool,
    pub irreducible: bool,
    /// Rows with `|A_ii| > sum_{j != i} |A_ij|`.
    pub strictly_dominant_rows: Vec<usize>,
}

impl RMatrixCertificate {
    /// All flags hold and at least one row is strictly dominant, which is
    /// what makes a connected, weakly dominant matrix nonsingular.
    pub fn is_valid(&self) -> bool {
        self.is_symmetric
            && self.diag_positive
            && self.offdiag_nonpositive
            && self.row_dominant
            && self.irreducible
            && !self.strictly_dominant_rows.is_empty()
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.is_symmetric {
            out.push("not symmetric");
        }
        if !self.diag_positive {
            out.push("non-positive diagonal");
        }
        if !self.offdiag_nonpositive {
            out.push("positive off-diagonal");
        }
        if !self.row_dominant {
            out.push("not row diagonally dominant");
        }
        if !self.irreducible {
            out.push("matrix graph disconnected");
        }
        if self.strictly_dominant_rows.is_empty() {
            out.push("no strictly dominant row");
        }
        out
    }
}

// Row sums are compared with a relative slack so that rounding in the
// off-diagonal sum does not flip a balanced row.
const DOMINANCE_SLACK: f64 = 1e-12;

pub fn validate_r_matrix(a: &SparseMatrix) -> RMatrixCertificate {
    let n = a.n();
    let mut diag_positive = true;
    let mut offdiag_nonpositive = true;
    let mut row_dominant = true;
    let mut strictly_dominant_rows = Vec::new();

    for i in 0..n {
        let (cols, vals) = a.row(i);
        let mut d = 0.0;
        let mut off = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            if c == i {
                d = v;
            } else {
                off += v.abs();
                if v > 0.0 {
                    offdiag_nonpositive = false;
                }
            }
        }
        if d <= 0.0 {
            diag_positive = false;
        }
        let slack = DOMINANCE_SLACK * d.abs();
        if d.abs() + slack < off {
            row_dominant = false;
        }
        if d.abs() > off + slack {
            strictly_dominant_rows.push(i);
        }
    }

    RMatrixCertificate {
        is_symmetric: a.is_symmetric(1e-12),
        diag_positive,
        offdiag_nonpositive,
        row_dominant,
        irreducible: is_connected(a),
        strictly_dominant_rows,
    }
}

/// Single connected-component test on the undirected matrix graph.
pub(crate) fn is_connected(a: &SparseMatrix) -> bool {
    let n = a.n();
    if n == 0 {
        return true;
    }
    let at = a.transpose();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &u in a.row(v).0.iter().chain(at.row(v).0) {
            if !seen[u] {
                seen[u] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    count == n
}
