//! Nonsymmetric LDU factors from a pair of walk games, and the sign-scaled
//! game for matrices with positive off-diagonals.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::game::{ScalingMode, WalkGame};
use crate::precond::{
    check_unit_triangular, read_sidecar, walk_factors, write_sidecar, BuildOptions, FactorMeta,
};
use crate::sparse::market::{read_matrix_market, read_vector, write_matrix_market, write_vector};
use crate::sparse::{is_connected, Permutation, SparseMatrix};

const ROW_GAME_TAG: u64 = 0x006c_6475_2d72_6f77;
const COL_GAME_TAG: u64 = 0x006c_6475_2d63_6f6c;
const DOMINANCE_SLACK: f64 = 1e-12;

/// `L D U ≈ rev(P A Pᵀ)` with unit lower `L` and unit upper `U`.
#[derive(Clone, Debug, PartialEq)]
pub struct IncompleteLdu {
    l: SparseMatrix,
    d: Vec<f64>,
    u: SparseMatrix,
    ordering: Permutation,
    frame: Permutation,
    pub meta: FactorMeta,
}

impl IncompleteLdu {
    pub fn new(l: SparseMatrix, d: Vec<f64>, u: SparseMatrix, ordering: Permutation, meta: FactorMeta) -> Result<Self> {
        let n = l.n();
        if d.len() != n || u.n() != n || ordering.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: d.len().min(u.n()).min(ordering.len()) });
        }
        check_unit_triangular(&l, true)?;
        check_unit_triangular(&u, false)?;
        let frame = ordering.reversed();
        Ok(Self { l, d, u, ordering, frame, meta })
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

    pub fn u(&self) -> &SparseMatrix {
        &self.u
    }

    pub fn ordering(&self) -> &Permutation {
        &self.ordering
    }

    /// Combined permutation `Q` with `L D U ≈ Q A Qᵀ`.
    pub fn frame(&self) -> &Permutation {
        &self.frame
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_matrix_market(&self.l, dir.join("l.mtx"))?;
        write_vector(&self.d, dir.join("d.mtx"))?;
        write_matrix_market(&self.u, dir.join("u.mtx"))?;
        write_sidecar(dir, &self.ordering, true, &self.meta)
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let l = read_matrix_market(dir.join("l.mtx"))?;
        let d = read_vector(dir.join("d.mtx"))?;
        let u = read_matrix_market(dir.join("u.mtx"))?;
        let (ordering, _, meta) = read_sidecar(dir)?;
        Self::new(l, d, u, ordering, meta)
    }
}

/// Row and column sums of off-diagonal magnitudes, and the diagonal.
fn margins(a: &SparseMatrix) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = a.n();
    let mut diag = vec![0.0; n];
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for i in 0..n {
        let (cs, vs) = a.row(i);
        for (&j, &v) in cs.iter().zip(vs) {
            if i == j {
                diag[i] = v;
            } else {
                rows[i] += v.abs();
                cols[j] += v.abs();
            }
        }
    }
    (diag, rows, cols)
}

fn check_dominance(a: &SparseMatrix) -> Result<(Vec<bool>, Vec<bool>)> {
    if a.n() == 0 {
        return Ok((vec![], vec![]));
    }
    let (diag, rows, cols) = margins(a);
    let mut strict_rows = vec![false; a.n()];
    let mut strict_cols = vec![false; a.n()];
    for i in 0..a.n() {
        let d = diag[i];
        if d <= 0.0 {
            return Err(Error::NonPositiveDiagonal { row: i, value: d });
        }
        let slack = DOMINANCE_SLACK * d;
        if rows[i] > d + slack {
            return Err(Error::NotDominant { row: i, escape: (d - rows[i]) / d });
        }
        if cols[i] > d + slack {
            return Err(Error::Admission(format!("column {i} is not diagonally dominant")));
        }
        strict_rows[i] = d > rows[i] + slack;
        strict_cols[i] = d > cols[i] + slack;
    }
    Ok((strict_rows, strict_cols))
}

/// Admission for the sign-scaled game: positive diagonal, row- and
/// column-wise diagonal dominance, connected graph and at least one
/// strictly dominant row. Every scaling factor then has magnitude one.
pub fn admit_sign_scaled(a: &SparseMatrix) -> Result<()> {
    let (strict_rows, _) = check_dominance(a)?;
    if !is_connected(a) {
        return Err(Error::Admission("matrix graph disconnected".into()));
    }
    if !strict_rows.iter().any(|&s| s) {
        return Err(Error::Admission("no strictly dominant row".into()));
    }
    Ok(())
}

/// Game with unit-magnitude scaling factors; positive off-diagonals are
/// allowed.
pub fn build_scaled_game(a: &SparseMatrix, b: Option<&[f64]>) -> Result<WalkGame> {
    admit_sign_scaled(a)?;
    WalkGame::build(a, b, ScalingMode::Sign)
}

/// Nodes from which a directed path along nonzeros of `a` (row to column)
/// reaches a node flagged in `target`.
fn reaches(a: &SparseMatrix, target: &[bool]) -> Vec<bool> {
    let at = a.transpose();
    let mut ok = target.to_vec();
    let mut stack: Vec<usize> = (0..a.n()).filter(|&i| target[i]).collect();
    while let Some(v) = stack.pop() {
        // Predecessors of v are the rows with a nonzero in column v.
        for &u in at.row(v).0 {
            if !ok[u] {
                ok[u] = true;
                stack.push(u);
            }
        }
    }
    ok
}

/// Admission for the LDU builder: positive diagonal, nonpositive
/// off-diagonals, row- and column-wise dominance, and walks in both games
/// are absorbed with probability one.
pub fn admit_ldu(a: &SparseMatrix) -> Result<()> {
    for i in 0..a.n() {
        let (cs, vs) = a.row(i);
        if let Some((&j, _)) = cs.iter().zip(vs).find(|(&j, &v)| j != i && v > 0.0) {
            return Err(Error::NegativeProbability { row: i, col: j });
        }
    }
    let (strict_rows, strict_cols) = check_dominance(a)?;
    if let Some(i) = reaches(a, &strict_rows).iter().position(|&r| !r) {
        return Err(Error::Admission(format!("walks from node {i} never reach a strictly dominant row")));
    }
    if let Some(i) = reaches(&a.transpose(), &strict_cols).iter().position(|&r| !r) {
        return Err(Error::Admission(format!("walks from node {i} never reach a strictly dominant column")));
    }
    Ok(())
}

/// Stochastic incomplete LDU of `rev(P A Pᵀ)`. `U` comes from the game on
/// the rows of `A`, `L` from the game on its columns, `D` from the row
/// game.
pub fn build_ldu(a: &SparseMatrix, ordering: &Permutation, opts: &BuildOptions) -> Result<IncompleteLdu> {
    admit_ldu(a)?;
    if ordering.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: ordering.len() });
    }
    let opts = BuildOptions { mode: ScalingMode::Unscaled, ..opts.clone() };
    let b = a.permute(ordering);
    let bt = b.transpose();
    let (rows, cols) = rayon::join(
        || walk_factors(&b, &opts, ROW_GAME_TAG),
        || walk_factors(&bt, &opts, COL_GAME_TAG),
    );
    let (rows, cols) = (rows?, cols?);
    let n = a.n();
    let mut u_trip = Vec::with_capacity(n);
    let mut l_trip = Vec::with_capacity(n);
    let mut d = vec![0.0; n];
    for k in 0..n {
        u_trip.push((k, k, 1.0));
        l_trip.push((k, k, 1.0));
        for &(i, y) in &rows.y[k] {
            u_trip.push((n - 1 - k, n - 1 - i, y));
        }
        for &(i, y) in &cols.y[k] {
            l_trip.push((n - 1 - i, n - 1 - k, y));
        }
        d[n - 1 - k] = b.get(k, k) / rows.visits[k];
    }
    let meta = FactorMeta {
        method: "stochastic-ldu".into(),
        seed: Some(opts.seed),
        delta: Some(opts.stop.delta),
        alpha: Some(opts.stop.alpha),
        min_walks: Some(opts.stop.min_walks),
        reuse: Some(opts.reuse),
        ..Default::default()
    };
    IncompleteLdu::new(
        SparseMatrix::from_triplets(n, l_trip)?,
        d,
        SparseMatrix::from_triplets(n, u_trip)?,
        ordering.clone(),
        meta,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::StoppingCriterion;

    fn dense(rows: &[&[f64]]) -> SparseMatrix {
        SparseMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn one_by_one_ldu() {
        let a = dense(&[&[3.0]]);
        let f = build_ldu(&a, &Permutation::identity(1), &BuildOptions::default()).unwrap();
        assert_eq!(f.l().to_dense(), vec![vec![1.0]]);
        assert_eq!(f.u().to_dense(), vec![vec![1.0]]);
        assert_eq!(f.d(), &[3.0]);
    }

    #[test]
    fn upper_triangular_two_by_two() {
        let a = dense(&[&[2.0, -1.0], &[0.0, 2.0]]);
        // Reversed ordering makes the factored matrix `A` itself.
        let f = build_ldu(&a, &Permutation::reversal(2), &BuildOptions::default()).unwrap();
        assert_eq!(f.frame(), &Permutation::identity(2));
        assert_eq!(f.l().to_dense(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(f.u().to_dense(), vec![vec![1.0, -0.5], vec![0.0, 1.0]]);
        assert_eq!(f.d(), &[2.0, 2.0]);
    }

    #[test]
    fn ldu_admission() {
        assert!(admit_ldu(&dense(&[&[2.0, 1.0], &[0.0, 2.0]])).is_err());
        assert!(admit_ldu(&dense(&[&[1.0, -1.0], &[-2.0, 3.0]])).is_err());
        // Balanced cycle with no strict row or column.
        assert!(admit_ldu(&dense(&[&[1.0, -1.0], &[-1.0, 1.0]])).is_err());
        assert!(admit_ldu(&dense(&[&[2.0, -1.0], &[0.0, 2.0]])).is_ok());
    }

    #[test]
    fn scaled_game_admission() {
        let g = build_scaled_game(&dense(&[&[2.0, 1.0], &[1.0, 2.0]]), None).unwrap();
        assert_eq!(g.mode(), ScalingMode::Sign);
        assert!(build_scaled_game(&dense(&[&[1.0, 2.0], &[2.0, 1.0]]), None).is_err());
        assert!(build_scaled_game(&dense(&[&[2.0, 0.0], &[3.0, 4.0]]), None).is_err());
    }

    #[test]
    fn ldu_round_trip() {
        let a = dense(&[&[3.0, -1.0, -1.0], &[-0.5, 2.0, -1.0], &[-1.0, 0.0, 2.5]]);
        let opts = BuildOptions { stop: StoppingCriterion::new(0.2, 0.99, 20).unwrap(), seed: 4, ..Default::default() };
        let f = build_ldu(&a, &Permutation::identity(3), &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        f.save(dir.path()).unwrap();
        assert!(dir.path().join("u.mtx").exists());
        assert_eq!(IncompleteLdu::load(dir.path()).unwrap(), f);
    }
}
