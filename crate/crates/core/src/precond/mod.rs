//! Incomplete LDL factors assembled from random walks.
//!
//! With `B = P A Pᵀ`, the walks from row `k` treat every node `i < k` as a
//! home. The estimated probabilities of ending at each home form a unit
//! lower triangular `Y`, and the expected number of returns to `k` gives
//! `Z_kk`. Reversing `Y` yields the `L` factor of `rev(B)` and `1 / Z` its
//! diagonal factor.

mod factor;
mod ordering;
mod record;

pub use factor::{FactorMeta, IncompleteLdl};
pub use ordering::{make_ordering, OrderingStrategy};
pub use record::{extract_reused_walks, PrecondJourneyRecord, RowRecord, WalkCredit};

pub(crate) use factor::{check_unit_triangular, read_sidecar, write_sidecar};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{ScalingMode, StepOutcome, StepSampler, WalkGame, STEP_CAP};
use crate::sparse::{validate_r_matrix, Permutation, SparseMatrix};
use crate::stats::two_sided_quantile;
use record::{add_unchecked, ReuseScan};

pub(crate) const PRECOND_TAG: u64 = 0x7072_6563;

/// Walks from a row continue until the mean walk length is known to a
/// relative margin `delta` with confidence `alpha`, and at least
/// `min_walks` walks have been credited.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingCriterion {
    pub delta: f64,
    pub alpha: f64,
    pub min_walks: u64,
    q: f64,
}

impl StoppingCriterion {
    pub fn new(delta: f64, alpha: f64, min_walks: u64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidCriterion(format!("delta must be positive, got {delta}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidCriterion(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if min_walks == 0 {
            return Err(Error::InvalidCriterion("min_walks must be at least 1".into()));
        }
        Ok(Self { delta, alpha, min_walks, q: two_sided_quantile(alpha) })
    }

    pub fn quantile(&self) -> f64 {
        self.q
    }

    /// `delta * mean * sqrt(M) / sigma > q`, rearranged so that it only
    /// uses the integer sums and never divides by a zero variance.
    pub fn is_met(&self, row: &RowRecord) -> bool {
        let m = row.walks;
        if m < self.min_walks || m == 0 {
            return false;
        }
        let sum = row.length_sum as f64;
        let spread = (m as u128 * row.length_sq_sum - (row.length_sum as u128).pow(2)) as f64;
        self.delta * self.delta * sum * sum * (m - 1) as f64 > self.q * self.q * spread
            || spread == 0.0
    }
}

impl Default for StoppingCriterion {
    fn default() -> Self {
        Self::new(0.05, 0.99, 20).expect("defaults are valid")
    }
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub stop: StoppingCriterion,
    pub seed: u64,
    /// Credit sub-walks extracted from each simulation to their own starts.
    pub reuse: bool,
    pub mode: ScalingMode,
    /// Rows simulated between two merges of reused-walk credits.
    pub batch_size: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            stop: StoppingCriterion::default(),
            seed: 0,
            reuse: true,
            mode: ScalingMode::Unscaled,
            batch_size: 64,
        }
    }
}

/// Walk-estimated rows of `Y` and `Z` for a matrix already in position
/// order.
#[derive(Clone, Debug)]
pub struct WalkFactors {
    /// Strictly lower entries `(i, Y_ki)` of each row, ascending in `i`.
    pub y: Vec<Vec<(usize, f64)>>,
    /// Expected signed visits to `k` per walk from `k`; `Z_kk = v_k / B_kk`.
    pub visits: Vec<f64>,
    pub record: PrecondJourneyRecord,
}

/// Stochastic incomplete LDL of `rev(P A Pᵀ)` with default options.
pub fn build_preconditioner(
    a: &SparseMatrix,
    ordering: &Permutation,
    stop: StoppingCriterion,
    seed: u64,
) -> Result<IncompleteLdl> {
    let opts = BuildOptions { stop, seed, ..Default::default() };
    build_with_options(a, ordering, &opts)
}

pub fn build_with_options(a: &SparseMatrix, ordering: &Permutation, opts: &BuildOptions) -> Result<IncompleteLdl> {
    build_with_record(a, ordering, opts).map(|(f, _)| f)
}

/// Same as [`build_with_options`], also returning the walk record in the
/// permuted (pre-reversal) frame.
pub fn build_with_record(
    a: &SparseMatrix,
    ordering: &Permutation,
    opts: &BuildOptions,
) -> Result<(IncompleteLdl, PrecondJourneyRecord)> {
    admit(a, opts.mode)?;
    if ordering.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: ordering.len() });
    }
    let b = a.permute(ordering);
    let wf = walk_factors(&b, opts, PRECOND_TAG)?;
    let n = b.n();
    let mut trip = Vec::with_capacity(n + wf.y.iter().map(Vec::len).sum::<usize>());
    let mut d = vec![0.0; n];
    for k in 0..n {
        trip.push((k, k, 1.0));
        for &(i, y) in &wf.y[k] {
            trip.push((n - 1 - i, n - 1 - k, y));
        }
        d[n - 1 - k] = b.get(k, k) / wf.visits[k];
    }
    let l = SparseMatrix::from_triplets(n, trip)?;
    let meta = FactorMeta {
        method: "stochastic".into(),
        seed: Some(opts.seed),
        delta: Some(opts.stop.delta),
        alpha: Some(opts.stop.alpha),
        min_walks: Some(opts.stop.min_walks),
        reuse: Some(opts.reuse),
        ..Default::default()
    };
    Ok((IncompleteLdl::new(l, d, ordering.clone(), true, meta)?, wf.record))
}

fn admit(a: &SparseMatrix, mode: ScalingMode) -> Result<()> {
    match mode {
        ScalingMode::Unscaled => {
            let cert = validate_r_matrix(a);
            if cert.is_valid() {
                Ok(())
            } else {
                Err(Error::Admission(cert.failures().join(", ")))
            }
        }
        ScalingMode::Sign => {
            if !a.is_symmetric(1e-12) {
                return Err(Error::Admission("not symmetric".into()));
            }
            crate::general::admit_sign_scaled(a)
        }
    }
}

/// Runs the row walks on `b` (already in position order, any symmetry)
/// and assembles the `Y` rows and visit estimates.
pub fn walk_factors(b: &SparseMatrix, opts: &BuildOptions, tag: u64) -> Result<WalkFactors> {
    let n = b.n();
    let game = WalkGame::build(b, None, opts.mode)?;
    if (0..n).any(|k| game.diag(k) <= 0.0) {
        let row = (0..n).find(|&k| game.diag(k) <= 0.0).unwrap();
        return Err(Error::NonPositiveDiagonal { row, value: game.diag(row) });
    }
    let mut record = PrecondJourneyRecord::new(n);
    let batch = opts.batch_size.max(1);
    let mut lo = 0;
    while lo < n {
        let hi = (lo + batch).min(n);
        let rows = &record;
        let results: Vec<Vec<WalkCredit>> = (lo..hi)
            .into_par_iter()
            .map(|k| simulate_row(&game, k, rows.row(k), opts, tag))
            .collect::<Result<_>>()?;
        for credits in results {
            for c in &credits {
                add_unchecked(&mut record.rows_mut()[c.start], c);
            }
        }
        lo = hi;
    }
    let (y, visits): (Vec<_>, Vec<_>) = (0..n)
        .into_par_iter()
        .map(|k| {
            let (cols, vals) = b.row(k);
            finalize_row(k, record.row(k), cols, vals)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(WalkFactors { y, visits, record })
}

/// Walks from `k` until the row's criterion holds, starting from the
/// credits it already has. Returns every credit produced, the row's own
/// included.
fn simulate_row(
    game: &WalkGame,
    k: usize,
    prior: &RowRecord,
    opts: &BuildOptions,
    tag: u64,
) -> Result<Vec<WalkCredit>> {
    let mut credits = Vec::new();
    if game.transitions(k).all(|t| t.0 < k) {
        return Ok(credits);
    }
    let mut own = prior.clone();
    let mut w = 0u64;
    while !opts.stop.is_met(&own) {
        let mut sampler = StepSampler::new(opts.seed, tag, k, w);
        w += 1;
        let before = credits.len();
        run_walk(game, k, opts.reuse, &mut sampler, &mut |c| credits.push(c))?;
        for c in &credits[before..] {
            if c.start == k {
                add_unchecked(&mut own, c);
            }
        }
    }
    Ok(credits)
}

fn run_walk(
    game: &WalkGame,
    k: usize,
    reuse: bool,
    sampler: &mut StepSampler,
    out: &mut impl FnMut(WalkCredit),
) -> Result<()> {
    let mut scan = ReuseScan::new(k, reuse);
    let (mut node, mut sign) = game.sample_above(k, sampler).expect("caller checked for a higher neighbour");
    let mut steps = 1u64;
    loop {
        scan.visit(node, sign, out);
        steps += 1;
        if steps > STEP_CAP {
            return Err(Error::StepCapExceeded { start: k, cap: STEP_CAP });
        }
        match game.sample_step(node, sampler) {
            StepOutcome::Absorbed => {
                scan.finish(None, sign, out);
                return Ok(());
            }
            StepOutcome::Move { to, sign: s } => {
                sign *= s;
                debug_assert!(sign == 1 || sign == -1);
                if to < k {
                    scan.finish(Some(to), sign, out);
                    return Ok(());
                }
                node = to;
            }
        }
    }
}

/// `Y` row and visit estimate for row `k` of `b`.
///
/// With `S_k = sum_{j>k} |B_kj| / B_kk`, one-step walks are replaced by
/// their exact contribution and the recorded multi-step walks supply the
/// rest: `Y_ki = B_ki / B_kk - S_k H_ki / M` and
/// `v_k = 1 + S_k (J_kk / M - 1)`.
pub fn finalize_row(k: usize, rec: &RowRecord, cols: &[usize], vals: &[f64]) -> Result<(Vec<(usize, f64)>, f64)> {
    let pos = cols.binary_search(&k).map_err(|_| Error::NonPositiveDiagonal { row: k, value: 0.0 })?;
    let diag = vals[pos];
    if diag <= 0.0 {
        return Err(Error::NonPositiveDiagonal { row: k, value: diag });
    }
    let s: f64 = vals[pos + 1..].iter().map(|v| v.abs()).sum::<f64>() / diag;
    let mut row: Vec<(usize, f64)> = cols[..pos].iter().zip(&vals[..pos]).map(|(&c, &v)| (c, v / diag)).collect();
    if s == 0.0 {
        return Ok((row, 1.0));
    }
    if rec.walks == 0 {
        return Err(Error::InsufficientWalks { row: k });
    }
    let m = rec.walks as f64;
    let mut ends = rec.ends.clone();
    ends.sort_unstable_by_key(|e| e.0);
    let mut merged = Vec::with_capacity(row.len() + ends.len());
    let (mut a, mut e) = (0, 0);
    while a < row.len() || e < ends.len() {
        let take_row = e == ends.len() || (a < row.len() && row[a].0 <= ends[e].0);
        let take_end = a == row.len() || (e < ends.len() && ends[e].0 <= row[a].0);
        let (col, base) = if take_row { row[a] } else { (ends[e].0, 0.0) };
        let hits = if take_end { ends[e].1 } else { 0 };
        let y = base - s * hits as f64 / m;
        if y != 0.0 {
            merged.push((col, y));
        }
        a += usize::from(take_row);
        e += usize::from(take_end);
    }
    row = merged;
    let visits = 1.0 + s * (rec.self_visits as f64 / m - 1.0);
    if !(visits > 0.0) {
        return Err(Error::NonPositivePivot { row: k, value: visits });
    }
    Ok((row, visits))
}
