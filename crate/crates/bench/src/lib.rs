//! Benchmark harness: builds each requested preconditioner for one system,
//! solves it with PCG and tabulates cost.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use walkprec::baselines::{ic0, ict};
use walkprec::krylov::{pcg_solve, PcgOptions, SolveReport};
use walkprec::precond::{build_with_options, make_ordering, BuildOptions, IncompleteLdl, OrderingStrategy};
use walkprec::{SparseMatrix, StoppingCriterion};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] walkprec::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
    #[error("no drop tolerance within {steps} steps gives {target} nonzeros (closest: {best_c} at {best_tol:e})")]
    SizeMatch { target: usize, steps: usize, best_c: usize, best_tol: f64 },
}

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Stochastic,
    Ic0,
    Ict,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "stochastic" => Ok(Self::Stochastic),
            "ic0" => Ok(Self::Ic0),
            "ict" => Ok(Self::Ict),
            other => Err(format!("unknown method '{other}' (expected stochastic, ic0 or ict)")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Stochastic => "stochastic",
            Self::Ic0 => "ic0",
            Self::Ict => "ict",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CompareConfig {
    pub methods: Vec<Method>,
    pub delta: f64,
    pub alpha: f64,
    pub min_walks: u64,
    pub reuse: bool,
    /// Ordering for the stochastic builder.
    pub ordering: OrderingStrategy,
    /// Ordering for IC(0) and ICT.
    pub baseline_ordering: OrderingStrategy,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: Option<usize>,
    /// Fixed ICT drop tolerance; `None` size-matches ICT to the stochastic
    /// factor (or uses [`DEFAULT_DROP_TOL`] when there is none).
    pub drop_tol: Option<f64>,
    pub max_row_nnz: Option<usize>,
    /// Relative size tolerance for the ICT size match.
    pub size_tol: f64,
}

pub const DEFAULT_DROP_TOL: f64 = 0.01;

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Stochastic, Method::Ic0, Method::Ict],
            delta: 0.05,
            alpha: 0.99,
            min_walks: 20,
            reuse: true,
            ordering: OrderingStrategy::Random,
            baseline_ordering: OrderingStrategy::Natural,
            seed: 0,
            tol: 1e-6,
            max_iter: None,
            drop_tol: None,
            max_row_nnz: None,
            size_tol: 0.1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MethodResult {
    pub method: Method,
    pub params: String,
    pub report: SolveReport,
    pub wall_precond_s: f64,
    pub wall_solve_s: f64,
    #[serde(skip)]
    pub x: Vec<f64>,
}

impl MethodResult {
    /// Largest gap between the measured per-iteration multiplications and
    /// the `2C + E + 4N` model.
    pub fn m1_model_gap(&self) -> u64 {
        self.report
            .measured_per_iter
            .iter()
            .map(|&m| m.abs_diff(self.report.m1))
            .max()
            .unwrap_or(0)
    }
}

/// Builds and solves with every method in `cfg.methods`, stochastic first
/// so that ICT can be size-matched against it.
pub fn compare(a: &SparseMatrix, b: &[f64], cfg: &CompareConfig) -> Result<Vec<MethodResult>> {
    let pcg = PcgOptions { tol: cfg.tol, max_iter: cfg.max_iter, ..Default::default() };
    let mut order: Vec<Method> = cfg.methods.clone();
    order.sort_by_key(|m| *m != Method::Stochastic);
    order.dedup();
    let mut out = Vec::new();
    let mut stochastic_c = None;
    for method in order {
        let t0 = Instant::now();
        let (factor, params) = match method {
            Method::Stochastic => {
                let p = make_ordering(a, cfg.ordering, cfg.seed);
                let opts = BuildOptions {
                    stop: StoppingCriterion::new(cfg.delta, cfg.alpha, cfg.min_walks)?,
                    seed: cfg.seed,
                    reuse: cfg.reuse,
                    ..Default::default()
                };
                let f = build_with_options(a, &p, &opts)?;
                stochastic_c = Some(f.nnz());
                let params = format!(
                    "delta={};alpha={};min_walks={};ordering={};reuse={};seed={}",
                    cfg.delta, cfg.alpha, cfg.min_walks, cfg.ordering, cfg.reuse, cfg.seed
                );
                (f, params)
            }
            Method::Ic0 => {
                let p = make_ordering(a, cfg.baseline_ordering, cfg.seed);
                (ic0(a, &p)?, format!("ordering={}", cfg.baseline_ordering))
            }
            Method::Ict => {
                let p = make_ordering(a, cfg.baseline_ordering, cfg.seed);
                let (f, tol) = match (cfg.drop_tol, stochastic_c) {
                    (Some(t), _) => (ict(a, &p, t, cfg.max_row_nnz)?, t),
                    (None, Some(target)) => {
                        let m = size_match(a, &p, target, cfg.size_tol, cfg.max_row_nnz)?;
                        (m.factor, m.drop_tol)
                    }
                    (None, None) => (ict(a, &p, DEFAULT_DROP_TOL, cfg.max_row_nnz)?, DEFAULT_DROP_TOL),
                };
                let cap = cfg.max_row_nnz.map_or("none".to_string(), |c| c.to_string());
                (f, format!("drop_tol={tol:e};max_row_nnz={cap};ordering={}", cfg.baseline_ordering))
            }
        };
        let wall_precond_s = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let (x, report) = pcg_solve(a, b, &factor, &pcg)?;
        let wall_solve_s = t1.elapsed().as_secs_f64();
        out.push(MethodResult { method, params, report, wall_precond_s, wall_solve_s, x });
    }
    Ok(out)
}

pub struct SizeMatch {
    pub drop_tol: f64,
    pub c: usize,
    pub steps: usize,
    pub factor: IncompleteLdl,
}

pub const SIZE_MATCH_STEPS: usize = 30;

/// Searches the ICT drop tolerance until the factor's nonzero count is
/// within `tol_frac` of `target`: geometric bracketing from 0.05, then
/// bisection in log space, at most [`SIZE_MATCH_STEPS`] factorizations.
pub fn size_match(
    a: &SparseMatrix,
    ordering: &walkprec::Permutation,
    target: usize,
    tol_frac: f64,
    max_row_nnz: Option<usize>,
) -> Result<SizeMatch> {
    let tgt = target as f64;
    let hit = |c: usize| ((c as f64) - tgt).abs() <= tol_frac * tgt;
    let mut best: Option<(f64, usize)> = None;
    let mut eval = |tau: f64, steps: &mut usize| -> Result<(IncompleteLdl, usize)> {
        *steps += 1;
        let f = ict(a, ordering, tau, max_row_nnz)?;
        let c = f.nnz();
        if best.is_none_or(|(_, bc)| (c as f64 - tgt).abs() < (bc as f64 - tgt).abs()) {
            best = Some((tau, c));
        }
        Ok((f, c))
    };
    let mut steps = 0;
    let mut tau = 0.05;
    let (f, c) = eval(tau, &mut steps)?;
    if hit(c) {
        return Ok(SizeMatch { drop_tol: tau, c, steps, factor: f });
    }
    // Larger tolerances drop more, so C falls as tau grows.
    let grow = c > target;
    let (mut lo, mut hi) = (tau, tau);
    loop {
        if steps >= SIZE_MATCH_STEPS {
            let (best_tol, best_c) = best.expect("evaluated at least once");
            return Err(BenchError::SizeMatch { target, steps, best_c, best_tol });
        }
        tau = if grow { tau * 4.0 } else { tau / 4.0 };
        let (f, c) = eval(tau, &mut steps)?;
        if hit(c) {
            return Ok(SizeMatch { drop_tol: tau, c, steps, factor: f });
        }
        if grow {
            lo = hi;
            hi = tau;
            if c < target {
                break;
            }
        } else {
            hi = lo;
            lo = tau;
            if c > target {
                break;
            }
        }
    }
    // Now C(lo) > target > C(hi).
    while steps < SIZE_MATCH_STEPS {
        let mid = (lo * hi).sqrt();
        let (f, c) = eval(mid, &mut steps)?;
        if hit(c) {
            return Ok(SizeMatch { drop_tol: mid, c, steps, factor: f });
        }
        if c > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (best_tol, best_c) = best.expect("evaluated at least once");
    Err(BenchError::SizeMatch { target, steps, best_c, best_tol })
}

pub const CSV_HEADER: &str =
    "method,N,E,C,M1,I,M2,R,converged,params,wall_precond_s,wall_solve_s";

/// Writes the comparison table. `R` is each row's `M2` over the stochastic
/// row's `M2`, blank when no stochastic row is present.
pub fn write_csv(rows: &[MethodResult], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let base = rows
        .iter()
        .find(|r| r.method == Method::Stochastic)
        .map(|r| r.report.m2);
    for r in rows {
        let rep = &r.report;
        let ratio = match base {
            Some(m) if m > 0 => format!("{:.4}", rep.m2 as f64 / m as f64),
            _ => String::new(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{:.3},{:.3}",
            r.method,
            rep.n,
            rep.e,
            rep.c,
            rep.m1,
            rep.iterations,
            rep.m2,
            ratio,
            rep.converged,
            r.params,
            r.wall_precond_s,
            r.wall_solve_s
        )?;
    }
    Ok(())
}

/// `R1 = M2(ic0) / M2(stochastic)` when both rows are present.
pub fn speedup(rows: &[MethodResult], baseline: Method) -> Option<f64> {
    let get = |m: Method| rows.iter().find(|r| r.method == m).map(|r| r.report.m2 as f64);
    Some(get(baseline)? / get(Method::Stochastic)?)
}
