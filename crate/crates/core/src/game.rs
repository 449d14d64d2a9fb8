//! The random-walk game that mirrors a linear system.
//!
//! Dividing row `i` of `A x = b` by `A_ii` gives
//! `x_i = sum_j (-A_ij / A_ii) x_j + b_i / A_ii`. The coefficients become
//! transition probabilities, the leftover row mass becomes the probability
//! of stepping into an absorbing initial home with award zero, and
//! `-b_i / A_ii` is the price paid at each visit to node `i`.
//!
//! With sign scaling, a positive off-diagonal `A_ij` is turned into a
//! transition with probability `|A_ij| / |A_ii|` and a factor `-1` that
//! multiplies every later transaction of the walk.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Hard cap on the number of steps in a single walk. Walks on admissible
/// games are absorbed with probability one; hitting the cap means the game
/// is not terminating.
pub const STEP_CAP: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ScalingMode {
    /// Off-diagonals must be non-positive; every scaling factor is `+1`.
    #[default]
    Unscaled,
    /// Unit-magnitude factors `-sign(A_ij / A_ii)`; off-diagonals of either
    /// sign are allowed as long as the matrix stays diagonally dominant.
    Sign,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Move { to: usize, sign: i8 },
    Absorbed,
}

#[derive(Clone, Debug)]
pub struct WalkGame {
    n: usize,
    ptr: Vec<usize>,
    targets: Vec<usize>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
    signs: Vec<i8>,
    escape: Vec<f64>,
    diag: Vec<f64>,
    prices: Option<Vec<f64>>,
    mode: ScalingMode,
}

// Escape mass this small is rounding noise on a balanced row.
const ESCAPE_SLACK: f64 = 1e-12;

impl WalkGame {
    pub fn build(a: &SparseMatrix, b: Option<&[f64]>, mode: ScalingMode) -> Result<Self> {
        let n = a.n();
        if let Some(b) = b {
            if b.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: b.len(),
                });
            }
        }
        let mut ptr = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(a.nnz());
        let mut probs = Vec::with_capacity(a.nnz());
        let mut cdf = Vec::with_capacity(a.nnz());
        let mut signs = Vec::with_capacity(a.nnz());
        let mut escape = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        ptr.push(0);

        for i in 0..n {
            let d = a.get(i, i);
            let (cols, vals) = a.row(i);
            match mode {
                ScalingMode::Unscaled if d <= 0.0 => {
                    return Err(Error::NonPositiveDiagonal { row: i, value: d })
                }
                ScalingMode::Sign if d == 0.0 => {
                    return Err(Error::NonPositiveDiagonal { row: i, value: d })
                }
                _ => {}
            }
            let mut acc = 0.0;
            let mut row_mass = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c == i {
                    continue;
                }
                let (p, s) = match mode {
                    ScalingMode::Unscaled => {
                        if v > 0.0 {
                            return Err(Error::NegativeProbability { row: i, col: c });
                        }
                        (-v / d, 1)
                    }
                    ScalingMode::Sign => {
                        let ratio = v / d;
                        (ratio.abs(), if ratio > 0.0 { -1 } else { 1 })
                    }
                };
                acc += p;
                row_mass += match mode {
                    ScalingMode::Unscaled => v,
                    ScalingMode::Sign => -v.abs(),
                };
                targets.push(c);
                probs.push(p);
                cdf.push(acc);
                signs.push(s);
            }
            // (sum_j A_ij) / A_ii, computed from the row itself so that a
            // balanced integer row gives exactly zero.
            let mut esc = (d.abs() + row_mass) / d.abs();
            if esc < 0.0 {
                if esc < -ESCAPE_SLACK {
                    return Err(Error::NotDominant { row: i, escape: esc });
                }
                esc = 0.0;
            } else if esc < ESCAPE_SLACK {
                esc = 0.0;
            }
            if let Some(last) = cdf.last_mut() {
                if targets.len() > ptr[i] {
                    *last = 1.0 - esc;
                }
            }
            escape.push(esc);
            diag.push(d);
            ptr.push(targets.len());
        }

        let prices = b.map(|b| b.iter().zip(&diag).map(|(&bi, &d)| -bi / d).collect());
        Ok(Self {
            n,
            ptr,
            targets,
            probs,
            cdf,
            signs,
            escape,
            diag,
            prices,
            mode,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> ScalingMode {
        self.mode
    }

    pub fn degree(&self, i: usize) -> usize {
        self.ptr[i + 1] - self.ptr[i]
    }

    /// `(target, probability, sign)` for each outgoing transition of `i`.
    pub fn transitions(&self, i: usize) -> impl Iterator<Item = (usize, f64, i8)> + '_ {
        let r = self.ptr[i]..self.ptr[i + 1];
        self.targets[r.clone()]
            .iter()
            .zip(&self.probs[r.clone()])
            .zip(&self.signs[r])
            .map(|((&t, &p), &s)| (t, p, s))
    }

    pub fn cumulative(&self, i: usize) -> &[f64] {
        &self.cdf[self.ptr[i]..self.ptr[i + 1]]
    }

    pub fn escape_prob(&self, i: usize) -> f64 {
        self.escape[i]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    /// Motel price `m_i = -b_i / A_ii`; `None` when the game was built
    /// without a right-hand side.
    pub fn price(&self, i: usize) -> Option<f64> {
        self.prices.as_ref().map(|p| p[i])
    }

    pub fn has_prices(&self) -> bool {
        self.prices.is_some()
    }

    /// Inverse-CDF draw of the next position from node `i`.
    #[inline]
    pub fn sample_step(&self, i: usize, sampler: &mut StepSampler) -> StepOutcome {
        let u: f64 = sampler.uniform();
        let start = self.ptr[i];
        let cdf = &self.cdf[start..self.ptr[i + 1]];
        for (k, &c) in cdf.iter().enumerate() {
            if u < c {
                return StepOutcome::Move {
                    to: self.targets[start + k],
                    sign: self.signs[start + k],
                };
            }
        }
        StepOutcome::Absorbed
    }

    /// Total transition probability from `i` to neighbours `j > i`.
    pub fn mass_above(&self, i: usize) -> f64 {
        self.transitions(i).filter(|t| t.0 > i).map(|t| t.1).sum()
    }

    /// Step from `i` conditioned on landing on a neighbour `j > i`; `None`
    /// when `i` has no such neighbour.
    pub fn sample_above(&self, i: usize, sampler: &mut StepSampler) -> Option<(usize, i8)> {
        let r = self.ptr[i]..self.ptr[i + 1];
        let first = r.start + self.targets[r.clone()].partition_point(|&t| t <= i);
        if first == r.end {
            return None;
        }
        let total: f64 = self.probs[first..r.end].iter().sum();
        let u = sampler.uniform() * total;
        let mut acc = 0.0;
        for k in first..r.end {
            acc += self.probs[k];
            if u < acc {
                return Some((self.targets[k], self.signs[k]));
            }
        }
        // Rounding left `u` at the very top of the range.
        Some((self.targets[r.end - 1], self.signs[r.end - 1]))
    }
}

/// `A` with no right-hand side, or with one when a stand-alone solve is
/// wanted.
pub fn build_game(a: &SparseMatrix, b: Option<&[f64]>) -> Result<WalkGame> {
    WalkGame::build(a, b, ScalingMode::Unscaled)
}

/// Deterministic uniform stream for one walk.
///
/// Each `(seed, tag, node, walk)` tuple selects its own ChaCha8 stream and
/// block offset, so walks can be replayed individually and scheduled in any
/// order.
pub struct StepSampler {
    rng: ChaCha8Rng,
}

impl StepSampler {
    pub fn new(seed: u64, tag: u64, node: usize, walk: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag)));
        rng.set_stream(node as u64);
        // 2^40 words per walk; no walk gets close to that.
        rng.set_word_pos((walk as u128) << 40);
        Self { rng }
    }

    /// A sampler that is not tied to a walk index, for ad hoc use.
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
