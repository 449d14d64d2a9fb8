use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::market::{read_matrix_market, read_vector, write_matrix_market, write_vector};
use crate::sparse::{Permutation, SparseMatrix};

/// Parameters a factor was built with, kept for exact reproduction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FactorMeta {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_walks: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reuse: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_row_nnz: Option<usize>,
}

/// `L D Lᵀ ≈ F`, where `F = Q A Qᵀ` and `Q` is [`IncompleteLdl::frame`].
///
/// `Q` is `ordering` itself, or `ordering` followed by a reversal when
/// `reversed` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct IncompleteLdl {
    l: SparseMatrix,
    d: Vec<f64>,
    ordering: Permutation,
    reversed: bool,
    frame: Permutation,
    pub meta: FactorMeta,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    ordering: Permutation,
    reversed: bool,
    #[serde(flatten)]
    meta: FactorMeta,
}

impl IncompleteLdl {
    /// `l` must be lower triangular with a stored unit diagonal.
    pub fn new(
        l: SparseMatrix,
        d: Vec<f64>,
        ordering: Permutation,
        reversed: bool,
        meta: FactorMeta,
    ) -> Result<Self> {
        let n = l.n();
        if d.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: d.len() });
        }
        if ordering.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: ordering.len() });
        }
        check_unit_triangular(&l, true)?;
        if let Some(row) = d.iter().position(|&v| v == 0.0 || !v.is_finite()) {
            return Err(Error::NonPositivePivot { row, value: d[row] });
        }
        let frame = if reversed { ordering.reversed() } else { ordering.clone() };
        Ok(Self { l, d, ordering, reversed, frame, meta })
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn l(&self) -> &SparseMatrix {
        &self.l
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn ordering(&self) -> &Permutation {
        &self.ordering
    }

    pub fn reversed(&self) -> bool {
        self.reversed
    }

    pub fn frame(&self) -> &Permutation {
        &self.frame
    }

    /// Nonzeros of `L`, diagonal included.
    pub fn nnz(&self) -> usize {
        self.l.nnz()
    }

    /// `L D Lᵀ` as a dense matrix, for small checks.
    pub fn product_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let l = self.l.to_dense();
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..=i.min(j)).map(|k| l[i][k] * self.d[k] * l[j][k]).sum();
            }
        }
        out
    }

    /// Writes `l.mtx`, `d.mtx` and `factor.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_matrix_market(&self.l, dir.join("l.mtx"))?;
        write_vector(&self.d, dir.join("d.mtx"))?;
        write_sidecar(dir, &self.ordering, self.reversed, &self.meta)
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let l = read_matrix_market(dir.join("l.mtx"))?;
        let d = read_vector(dir.join("d.mtx"))?;
        let (ordering, reversed, meta) = read_sidecar(dir)?;
        Self::new(l, d, ordering, reversed, meta)
    }
}

pub(crate) fn write_sidecar(
    dir: &Path,
    ordering: &Permutation,
    reversed: bool,
    meta: &FactorMeta,
) -> Result<()> {
    let side = Sidecar { ordering: ordering.clone(), reversed, meta: meta.clone() };
    let path = dir.join("factor.json");
    let text = serde_json::to_string_pretty(&side)?;
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_sidecar(dir: &Path) -> Result<(Permutation, bool, FactorMeta)> {
    let path = dir.join("factor.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let side: Sidecar = serde_json::from_str(&text)?;
    Ok((side.ordering, side.reversed, side.meta))
}

/// Checks that `m` is triangular (lower or upper) with a stored unit
/// diagonal.
pub(crate) fn check_unit_triangular(m: &SparseMatrix, lower: bool) -> Result<()> {
    for i in 0..m.n() {
        let (cols, vals) = m.row(i);
        let mut diag = false;
        for (&c, &v) in cols.iter().zip(vals) {
            if (lower && c > i) || (!lower && c < i) {
                return Err(Error::InvalidStorage(format!(
                    "entry ({i}, {c}) violates triangular shape"
                )));
            }
            if c == i {
                if v != 1.0 {
                    return Err(Error::InvalidStorage(format!("diagonal at row {i} is {v}, expected 1")));
                }
                diag = true;
            }
        }
        if !diag {
            return Err(Error::InvalidStorage(format!("missing unit diagonal at row {i}")));
        }
    }
    Ok(())
}
