//! Stand-alone Monte Carlo solver.
//!
//! `x_i` is the expected gain of a walk that starts at `i`, pays the motel
//! price at every motel it visits (the start included) and collects the
//! award of the home where it ends. Processing nodes one at a time and
//! turning each solved node into a home shortens later walks.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::game::{StepOutcome, StepSampler, WalkGame, STEP_CAP};
use crate::sparse::Permutation;
use crate::stats::{two_sided_quantile, Welford};

const SOLVER_TAG: u64 = 0x736f_6c76;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Half-width of the confidence interval, in solution units.
    pub delta: f64,
    pub alpha: f64,
    pub min_walks: u64,
    /// Upper bound on walks per node; reaching it marks the estimate as
    /// not converged instead of looping forever.
    pub max_walks: u64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            delta: 0.05,
            alpha: 0.99,
            min_walks: 20,
            max_walks: 10_000_000,
            seed: 0,
        }
    }
}

impl SolverOptions {
    fn check(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::InvalidCriterion(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidCriterion(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.min_walks == 0 || self.max_walks < self.min_walks {
            return Err(Error::InvalidCriterion("need 1 <= min_walks <= max_walks".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntryEstimate {
    pub value: f64,
    pub half_width: f64,
    pub walks: u64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct SolverState {
    /// Estimates indexed by node; `None` for nodes not yet processed.
    pub values: Vec<Option<f64>>,
    /// Nodes in the order they became homes.
    pub home_order: Vec<usize>,
    pub stats: Vec<Option<EntryEstimate>>,
}

impl SolverState {
    /// Dense solution vector; unprocessed nodes read as zero.
    pub fn solution(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.unwrap_or(0.0)).collect()
    }

    pub fn is_home(&self, i: usize) -> bool {
        self.values[i].is_some()
    }
}

/// Signed counters gathered while walking. `None` keys the initial home.
#[derive(Default)]
struct Tally {
    homes: BTreeMap<Option<usize>, i64>,
    motels: BTreeMap<usize, i64>,
}

/// One walk from `start`. Returns the gain; optionally tallies visits.
fn walk(
    game: &WalkGame,
    start: usize,
    awards: &[Option<f64>],
    sampler: &mut StepSampler,
    mut tally: Option<&mut Tally>,
) -> Result<f64> {
    let mut node = start;
    let mut sign: i8 = 1;
    let mut gain = 0.0;
    let mut steps = 0u64;
    loop {
        if let Some(price) = game.price(node) {
            gain -= sign as f64 * price;
        }
        if let Some(t) = tally.as_deref_mut() {
            *t.motels.entry(node).or_default() += sign as i64;
        }
        steps += 1;
        if steps > STEP_CAP {
            return Err(Error::StepCapExceeded { start, cap: STEP_CAP });
        }
        match game.sample_step(node, sampler) {
            StepOutcome::Absorbed => {
                if let Some(t) = tally.as_deref_mut() {
                    *t.homes.entry(None).or_default() += sign as i64;
                }
                return Ok(gain);
            }
            StepOutcome::Move { to, sign: s } => {
                sign *= s;
                debug_assert!(sign == 1 || sign == -1);
                if let Some(x) = awards[to] {
                    gain += sign as f64 * x;
                    if let Some(t) = tally.as_deref_mut() {
                        *t.homes.entry(Some(to)).or_default() += sign as i64;
                    }
                    return Ok(gain);
                }
                node = to;
            }
        }
    }
}

fn require_prices(game: &WalkGame) -> Result<()> {
    if game.has_prices() {
        Ok(())
    } else {
        Err(Error::Admission("game has no right-hand side; motel prices are required".into()))
    }
}

/// Walks from `start` until the gain estimate is within `delta` of its
/// mean with confidence `alpha`.
fn estimate(
    game: &WalkGame,
    start: usize,
    awards: &[Option<f64>],
    opts: &SolverOptions,
    q: f64,
    mut tally: Option<&mut Tally>,
) -> Result<EntryEstimate> {
    let mut acc = Welford::default();
    loop {
        let mut sampler = StepSampler::new(opts.seed, SOLVER_TAG, start, acc.count());
        let g = walk(game, start, awards, &mut sampler, tally.as_deref_mut())?;
        acc.push(g);
        let hw = acc.half_width(q);
        let n = acc.count();
        if n >= opts.min_walks && hw < opts.delta {
            return Ok(EntryEstimate { value: acc.mean(), half_width: hw, walks: n, converged: true });
        }
        if n >= opts.max_walks {
            return Ok(EntryEstimate { value: acc.mean(), half_width: hw, walks: n, converged: false });
        }
    }
}

/// Estimates `x_i` with only the initial home available.
pub fn solve_entry(game: &WalkGame, i: usize, opts: &SolverOptions) -> Result<EntryEstimate> {
    opts.check()?;
    require_prices(game)?;
    let awards = vec![None; game.n()];
    estimate(game, i, &awards, opts, two_sided_quantile(opts.alpha), None)
}

/// Solves every node in `ordering` position order, turning each solved
/// node into a home for the walks that follow.
pub fn solve_all(game: &WalkGame, ordering: &Permutation, opts: &SolverOptions) -> Result<SolverState> {
    opts.check()?;
    require_prices(game)?;
    check_len(game, ordering)?;
    let q = two_sided_quantile(opts.alpha);
    let n = game.n();
    let mut state = SolverState {
        values: vec![None; n],
        home_order: Vec::with_capacity(n),
        stats: vec![None; n],
    };
    for &k in ordering.inverse() {
        let est = estimate(game, k, &state.values, opts, q, None)?;
        state.values[k] = Some(est.value);
        state.stats[k] = Some(est);
        state.home_order.push(k);
    }
    Ok(state)
}

fn check_len(game: &WalkGame, ordering: &Permutation) -> Result<()> {
    if ordering.len() != game.n() {
        return Err(Error::DimensionMismatch { expected: game.n(), found: ordering.len() });
    }
    Ok(())
}

/// How many walks `record_journeys` runs per node.
#[derive(Clone, Debug)]
pub enum JourneyStopping {
    Fixed(u64),
    /// Stop exactly where `solve_all` with these options would, which needs
    /// a game with prices.
    GainMargin(SolverOptions),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct JourneyRow {
    pub start: usize,
    pub walks: u64,
    /// `(home, signed hits)`; `None` is the initial home.
    pub homes: Vec<(Option<usize>, i64)>,
    /// `(motel, signed visits)` for every motel reached at least once.
    pub motels: Vec<(usize, i64)>,
}

/// Right-hand-side independent summary of a `solve_all` run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FullJourneyRecord {
    pub n: usize,
    /// Rows in processing order.
    pub rows: Vec<JourneyRow>,
}

impl FullJourneyRecord {
    pub fn row_of(&self, k: usize) -> Option<&JourneyRow> {
        self.rows.iter().find(|r| r.start == k)
    }
}

/// Runs the `solve_all` walk schedule and stores counts instead of gains.
pub fn record_journeys(
    game: &WalkGame,
    ordering: &Permutation,
    stopping: &JourneyStopping,
    seed: u64,
) -> Result<FullJourneyRecord> {
    check_len(game, ordering)?;
    let n = game.n();
    let mut rows = Vec::with_capacity(n);
    let mut awards: Vec<Option<f64>> = vec![None; n];
    match stopping {
        JourneyStopping::Fixed(walks) => {
            if *walks == 0 {
                return Err(Error::InvalidCriterion("need at least one walk per node".into()));
            }
            for &k in ordering.inverse() {
                let mut tally = Tally::default();
                for w in 0..*walks {
                    let mut sampler = StepSampler::new(seed, SOLVER_TAG, k, w);
                    walk(game, k, &awards, &mut sampler, Some(&mut tally))?;
                }
                rows.push(to_row(k, *walks, tally));
                // Any value marks the node as a home; gains are not used.
                awards[k] = Some(0.0);
            }
        }
        JourneyStopping::GainMargin(opts) => {
            opts.check()?;
            require_prices(game)?;
            let opts = SolverOptions { seed, ..opts.clone() };
            let q = two_sided_quantile(opts.alpha);
            for &k in ordering.inverse() {
                let mut tally = Tally::default();
                let est = estimate(game, k, &awards, &opts, q, Some(&mut tally))?;
                rows.push(to_row(k, est.walks, tally));
                awards[k] = Some(est.value);
            }
        }
    }
    Ok(FullJourneyRecord { n, rows })
}

fn to_row(start: usize, walks: u64, tally: Tally) -> JourneyRow {
    JourneyRow {
        start,
        walks,
        homes: tally.homes.into_iter().collect(),
        motels: tally.motels.into_iter().collect(),
    }
}

/// Re-evaluates a recorded run for the prices of `game`, with no new walks.
pub fn replay(record: &FullJourneyRecord, game: &WalkGame) -> Result<Vec<f64>> {
    if record.n != game.n() {
        return Err(Error::DimensionMismatch { expected: record.n, found: game.n() });
    }
    require_prices(game)?;
    let mut x = vec![0.0; record.n];
    for row in &record.rows {
        let mut total = 0.0;
        for &(home, hits) in &row.homes {
            if let Some(i) = home {
                total += hits as f64 * x[i];
            }
        }
        for &(motel, visits) in &row.motels {
            total -= visits as f64 * game.price(motel).expect("checked above");
        }
        x[row.start] = total / row.walks as f64;
    }
    Ok(x)
}
