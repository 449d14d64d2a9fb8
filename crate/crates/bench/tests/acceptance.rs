//! Acceptance suite. Runs every criterion in sequence, prints one
//! `PASS`/`FAIL` line each and exits non-zero if any failed.
//!
//! `WALKPREC_CALIBRATE=1` additionally reruns the one-time calibration that
//! produced [`FACTOR_RESIDUAL_BOUND`].

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use walkprec::general::build_ldu;
use walkprec::krylov::count_m1;
use walkprec::precond::{build_with_options, extract_reused_walks, make_ordering, BuildOptions, WalkCredit};
use walkprec::solver::{record_journeys, replay, solve_all, JourneyStopping, SolverOptions};
use walkprec::sparse::{gen_laplace3d, random_r_matrix, sym_factor_pattern};
use walkprec::{build_game, IncompleteLdl, OrderingStrategy, Permutation, ScalingMode, SparseMatrix, StoppingCriterion};
use walkprec_bench::{compare, CompareConfig, Method, MethodResult};
use walkprec_oracle as oracle;

/// Upper bound on `‖rev(B) - L D Lᵀ‖_F / ‖A‖_F` for the 10×10 grid at
/// Δ = 0.01 under random orderings. Calibrated on seeds 100..140 (mean
/// 0.0020, largest 0.0022), then given 50% headroom.
const FACTOR_RESIDUAL_BOUND: f64 = 0.0033;

/// Δ giving a stochastic factor of about 1.6e6 nonzeros on the 50³ grid.
const GRID50_DELTA: f64 = 1.0;

type Criterion = Box<dyn FnOnce(&mut Vec<MethodResult>) -> Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn main() -> ExitCode {
    if std::env::var_os("WALKPREC_CALIBRATE").is_some() {
        calibrate_factor_residual();
    }
    let mut runs: Vec<MethodResult> = Vec::new();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("pattern subset", Box::new(|_| pattern_subset())),
        ("exact rows", Box::new(|_| exact_rows())),
        ("factor accuracy", Box::new(|_| factor_accuracy())),
        ("50^3 iteration bands", Box::new(grid50)),
        ("speedup growth", Box::new(growth)),
        ("multiplication model", Box::new(mult_model)),
        ("stand-alone solver", Box::new(|_| standalone_solver())),
        ("walk reuse", Box::new(|_| walk_reuse())),
        ("asymmetric LDU", Box::new(|_| asymmetric_ldu())),
        ("sign scaling", Box::new(|_| sign_scaling())),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let o = run(&mut runs);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name} ({:.1}s): {}", i + 1, t.elapsed().as_secs_f64(), o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn stop(delta: f64) -> StoppingCriterion {
    StoppingCriterion::new(delta, 0.99, 20).unwrap()
}

fn opts(delta: f64, seed: u64) -> BuildOptions {
    BuildOptions { stop: stop(delta), seed, ..Default::default() }
}

fn rel_residual(a: &SparseMatrix, f: &IncompleteLdl) -> f64 {
    let target = a.permute(f.frame()).to_dense();
    oracle::frobenius_diff(&target, &f.product_dense()) / oracle::frobenius(&a.to_dense())
}

fn pattern_subset() -> Outcome {
    let t = Instant::now();
    let mut violations = 0;
    let mut cases = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut check = |a: &SparseMatrix, p: &Permutation, seed: u64| {
        let f = build_with_options(a, p, &opts(0.2, seed)).unwrap();
        violations += f.l().pattern_excess(&sym_factor_pattern(a, f.frame())).len();
        cases += 1;
    };
    for seed in 0..100 {
        let n = rng.random_range(2..=50);
        let density = rng.random_range(0.02..=0.2);
        let a = random_r_matrix(n, density, seed);
        let p = make_ordering(&a, OrderingStrategy::Random, seed);
        check(&a, &p, seed);
    }
    let grid = gen_laplace3d(8, 8, 8).unwrap();
    check(&grid, &make_ordering(&grid, OrderingStrategy::Random, 0), 0);
    let secs = t.elapsed().as_secs_f64();
    outcome(
        violations == 0 && secs < 60.0,
        format!("{cases} matrices, {violations} entries outside the symbolic pattern, {secs:.1}s"),
    )
}

/// Ordering that puts a maximal independent set last, so each of its nodes
/// has only earlier neighbours.
fn independent_set_last(a: &SparseMatrix, rng: &mut ChaCha8Rng) -> (Permutation, Vec<usize>) {
    let n = a.n();
    let mut nodes: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        nodes.swap(i, rng.random_range(0..=i));
    }
    let mut blocked = vec![false; n];
    let mut set = Vec::new();
    for &v in &nodes {
        if !blocked[v] {
            set.push(v);
            blocked[v] = true;
            for &j in a.row(v).0 {
                blocked[j] = true;
            }
        }
    }
    let mut order: Vec<usize> = nodes.iter().copied().filter(|v| !set.contains(v)).collect();
    order.extend(&set);
    (Permutation::from_order(order).unwrap(), set)
}

fn exact_rows() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for seed in 0..20 {
        let a = random_r_matrix(6, 0.5, 200 + seed);
        let (p, set) = independent_set_last(&a, &mut rng);
        let f = build_with_options(&a, &p, &opts(0.5, seed)).unwrap();
        let (lo, dor) = oracle::ldl(&a.permute(f.frame()).to_dense());
        let l = f.l().to_dense();
        let n = a.n();
        for &v in &set {
            // Position k in B is column n-1-k of the reversed factor.
            let c = n - 1 - p.forward()[v];
            for r in c..n {
                worst = worst.max((l[r][c] - lo[r][c]).abs());
            }
            worst = worst.max((f.d()[c] - dor[c]).abs() / dor[c]);
            rows += 1;
        }
    }
    outcome(worst <= 1e-12, format!("{rows} rows over 20 matrices, max deviation {worst:.1e}"))
}

fn factor_accuracy() -> Outcome {
    let a = gen_laplace3d(10, 10, 1).unwrap();
    let res: Vec<f64> = (0..10).map(|s| grid10_residual(&a, s, true)).collect();
    let max = res.iter().cloned().fold(0.0, f64::max);
    outcome(
        res.iter().all(|&r| r < FACTOR_RESIDUAL_BOUND),
        format!("max residual {max:.4} over 10 seeds (bound {FACTOR_RESIDUAL_BOUND})"),
    )
}

fn grid10_residual(a: &SparseMatrix, seed: u64, reuse: bool) -> f64 {
    let p = make_ordering(a, OrderingStrategy::Random, seed);
    let o = BuildOptions { reuse, ..opts(0.01, seed) };
    rel_residual(a, &build_with_options(a, &p, &o).unwrap())
}

fn calibrate_factor_residual() {
    let a = gen_laplace3d(10, 10, 1).unwrap();
    let res: Vec<f64> = (100..140).map(|s| grid10_residual(&a, s, true)).collect();
    let max = res.iter().cloned().fold(0.0, f64::max);
    let mean = res.iter().sum::<f64>() / res.len() as f64;
    println!("calibration: 10x10 grid, delta 0.01, seeds 100..140: mean {mean:.4}, max {max:.4}");
}

fn run_compare(n: usize, methods: &[Method], delta: f64) -> Vec<MethodResult> {
    let a = gen_laplace3d(n, n, n).unwrap();
    let b = vec![1.0; a.n()];
    let cfg = CompareConfig { methods: methods.to_vec(), delta, ..Default::default() };
    compare(&a, &b, &cfg).unwrap()
}

fn iters(rows: &[MethodResult], m: Method) -> usize {
    rows.iter().find(|r| r.method == m).unwrap().report.iterations
}

fn grid50(runs: &mut Vec<MethodResult>) -> Outcome {
    let rows = run_compare(50, &[Method::Stochastic, Method::Ic0, Method::Ict], GRID50_DELTA);
    let (h, i0, it) = (iters(&rows, Method::Stochastic), iters(&rows, Method::Ic0), iters(&rows, Method::Ict));
    let r1 = walkprec_bench::speedup(&rows, Method::Ic0).unwrap();
    let c = |m: Method| rows.iter().find(|r| r.method == m).unwrap().report.c;
    let pass = rows.iter().all(|r| r.report.converged)
        && (12..=26).contains(&h)
        && (33..=50).contains(&i0)
        && (15..=32).contains(&it)
        && r1 >= 1.0;
    let detail = format!(
        "hybrid I={h} C={}, ic0 I={i0}, ict I={it} C={}, R1={r1:.3}",
        c(Method::Stochastic),
        c(Method::Ict)
    );
    runs.extend(rows);
    outcome(pass, detail)
}

fn growth(runs: &mut Vec<MethodResult>) -> Outcome {
    let mut r1 = Vec::new();
    for n in [20, 30, 40] {
        let rows = run_compare(n, &[Method::Stochastic, Method::Ic0], GRID50_DELTA);
        r1.push(walkprec_bench::speedup(&rows, Method::Ic0).unwrap());
        runs.extend(rows);
    }
    let pass = r1.windows(2).all(|w| w[1] >= 0.95 * w[0]);
    outcome(pass, format!("R1 at 20^3, 30^3, 40^3 = {:.3}, {:.3}, {:.3}", r1[0], r1[1], r1[2]))
}

/// True when some inputs that round to the printed values give an `M1`
/// that rounds to the printed `M1`, all at two significant figures.
fn table_m1_consistent(c: f64, e: f64, n: f64, m1: f64) -> bool {
    let half_ulp = |x: f64| 0.05 * 10f64.powf(x.log10().floor());
    let lo = count_m1_f(c - half_ulp(c), e - half_ulp(e), n - half_ulp(n));
    let hi = count_m1_f(c + half_ulp(c), e + half_ulp(e), n + half_ulp(n));
    lo < m1 + half_ulp(m1) && hi >= m1 - half_ulp(m1)
}

fn count_m1_f(c: f64, e: f64, n: f64) -> f64 {
    2.0 * c + e + 4.0 * n
}

fn mult_model(runs: &mut Vec<MethodResult>) -> Outcome {
    let a = gen_laplace3d(6, 6, 6).unwrap();
    let b = vec![1.0; a.n()];
    runs.extend(compare(&a, &b, &CompareConfig { delta: 0.2, ..Default::default() }).unwrap());
    let worst = runs
        .iter()
        .map(|r| r.m1_model_gap() as f64 / r.report.n as f64)
        .fold(0.0, f64::max);
    let m2_ok = runs.iter().all(|r| r.report.m2 == r.report.m1 * r.report.iterations as u64);
    let exact = count_m1(1_600_000, 860_000, 125_000) == 4_560_000;
    // Reference cost rows (C, E, N, M1) for the m1 and m6 benchmarks, as
    // printed with two significant figures.
    let table = [
        (4.9e5, 8.6e5, 1.3e5, 2.3e6),
        (1.7e6, 8.6e5, 1.3e5, 4.8e6),
        (1.6e6, 8.6e5, 1.3e5, 4.5e6),
        (4.0e6, 6.9e6, 1.0e6, 1.9e7),
        (1.4e7, 6.9e6, 1.0e6, 3.9e7),
        (1.3e7, 6.9e6, 1.0e6, 3.8e7),
    ];
    let table_ok = table.iter().all(|&(c, e, n, m)| table_m1_consistent(c, e, n, m));
    outcome(
        worst <= 1.0 && m2_ok && exact && table_ok,
        format!(
            "{} runs, worst per-iteration gap {worst:.2} N, table rows consistent: {table_ok}",
            runs.len()
        ),
    )
}

fn standalone_solver() -> Outcome {
    let chain = SparseMatrix::from_dense(&[
        vec![2.0, -1.0, 0.0],
        vec![-1.0, 2.0, -1.0],
        vec![0.0, -1.0, 2.0],
    ])
    .unwrap();
    let grid = gen_laplace3d(5, 5, 1).unwrap();
    let delta = 0.05;
    let mut summary = Vec::new();
    let mut pass = true;
    for (name, a, b) in [
        ("chain", &chain, vec![1.0, 0.0, 1.0]),
        ("5x5 grid", &grid, vec![1.0; 25]),
    ] {
        let exact = oracle::solve(&a.to_dense(), &b);
        let game = build_game(a, Some(&b)).unwrap();
        let id = Permutation::identity(a.n());
        // The margin holds per entry, so trial `t` checks entry `t mod n`.
        let mut hits = 0;
        for seed in 0..100 {
            let o = SolverOptions { delta, seed, ..Default::default() };
            let x = solve_all(&game, &id, &o).unwrap().solution();
            let i = seed as usize % a.n();
            hits += usize::from((x[i] - exact[i]).abs() <= delta);
        }
        pass &= hits >= 97;
        summary.push(format!("{name} {hits}/100"));
    }

    // Replay is linear in the right-hand side for a fixed record.
    let b1: Vec<f64> = (0..25).map(|i| (i % 3) as f64).collect();
    let b2: Vec<f64> = (0..25).map(|i| 1.0 - (i % 4) as f64 * 0.5).collect();
    let mix: Vec<f64> = b1.iter().zip(&b2).map(|(u, v)| u + 2.0 * v).collect();
    let id = Permutation::identity(25);
    let rec = record_journeys(&build_game(&grid, None).unwrap(), &id, &JourneyStopping::Fixed(200), 9).unwrap();
    let r = |b: &[f64]| replay(&rec, &build_game(&grid, Some(b)).unwrap()).unwrap();
    let (x1, x2, xm) = (r(&b1), r(&b2), r(&mix));
    let lin = xm
        .iter()
        .zip(x1.iter().zip(&x2))
        .map(|(m, (u, v))| (m - (u + 2.0 * v)).abs() / m.abs().max(1.0))
        .fold(0.0, f64::max);
    pass &= lin < 1e-12;
    summary.push(format!("replay linearity {lin:.1e}"));
    outcome(pass, summary.join(", "))
}

fn walk_reuse() -> Outcome {
    let credit = |start, end, length, visits| WalkCredit { start, end: Some(end), length, sign: 1, visits };
    let got = extract_reused_walks(&[2, 4, 6, 4, 5, 7, 6, 3, 2, 5, 8, 1], false);
    let want = vec![credit(5, 3, 3, 1), credit(4, 3, 6, 2), credit(5, 1, 2, 1), credit(2, 1, 11, 2)];
    let fixture_ok = got == want;

    let a = gen_laplace3d(10, 10, 1).unwrap();
    let on: Vec<f64> = (0..10).map(|s| grid10_residual(&a, s, true)).collect();
    let off: Vec<f64> = (0..10).map(|s| grid10_residual(&a, s, false)).collect();
    let (m_on, _) = mean_std(&on);
    let (m_off, s_off) = mean_std(&off);
    let ab_ok = m_on <= m_off + 2.0 * s_off;
    outcome(
        fixture_ok && ab_ok,
        format!("fixture {}, residual reuse on {m_on:.4} vs off {m_off:.4} ± {s_off:.4}", if fixture_ok { "ok" } else { "mismatch" }),
    )
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64;
    (m, v.sqrt())
}

/// Random nonsymmetric M-matrix, dominant by rows and columns, connected
/// through a path with independent weights in each direction.
fn random_asymmetric(n: usize, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = vec![vec![0.0; n]; n];
    for i in 1..n {
        m[i][i - 1] = -rng.random_range(0.1..1.0);
        m[i - 1][i] = -rng.random_range(0.1..1.0);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && m[i][j] == 0.0 && rng.random_bool(0.3) {
                m[i][j] = -rng.random_range(0.1..1.0);
            }
        }
    }
    for i in 0..n {
        let row: f64 = (0..n).filter(|&j| j != i).map(|j| -m[i][j]).sum();
        let col: f64 = (0..n).filter(|&j| j != i).map(|j| -m[j][i]).sum();
        let margin = if i == 0 || rng.random_bool(0.3) { rng.random_range(0.1..1.0) } else { 0.0 };
        m[i][i] = row.max(col) + margin;
    }
    SparseMatrix::from_dense(&m).unwrap()
}

fn asymmetric_ldu() -> Outcome {
    let mut improved = 0;
    let mut violations = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..20 {
        let n = rng.random_range(3..=8);
        let a = random_asymmetric(n, 900 + seed);
        let p = make_ordering(&a, OrderingStrategy::Random, seed);
        let mut err = Vec::new();
        for delta in [0.2, 0.02] {
            let f = build_ldu(&a, &p, &opts(delta, seed)).unwrap();
            let target = a.permute(f.frame()).to_dense();
            let (lo, dor, uo) = oracle::ldu(&target);
            let e = oracle::frobenius_diff(&f.l().to_dense(), &lo)
                + oracle::frobenius_diff(&f.u().to_dense(), &uo)
                + f.d().iter().zip(&dor).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            err.push(e);
            let pat = oracle::elimination_pattern(&target);
            let l = f.l().to_dense();
            let u = f.u().to_dense();
            for i in 0..n {
                for j in 0..n {
                    if l[i][j] != 0.0 && !pat[i][j] {
                        violations += 1;
                    }
                    if u[j][i] != 0.0 && !pat[i][j] {
                        violations += 1;
                    }
                }
            }
        }
        improved += usize::from(err[1] < err[0]);
    }
    outcome(
        improved >= 16 && violations == 0,
        format!("error shrank in {improved}/20, {violations} pattern violations"),
    )
}

fn sign_scaling() -> Outcome {
    let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    let id = Permutation::identity(2);
    let target = a.permute(&id.reversed()).to_dense();
    let (lo, dor) = oracle::ldl(&target);
    let err: Vec<f64> = [0.2, 0.05, 0.01]
        .iter()
        .map(|&delta| {
            let o = BuildOptions { mode: ScalingMode::Sign, ..opts(delta, 4) };
            let f = build_with_options(&a, &id, &o).unwrap();
            oracle::frobenius_diff(&f.l().to_dense(), &lo)
                + f.d().iter().zip(&dor).map(|(x, y)| (x - y).abs()).sum::<f64>()
        })
        .collect();
    let converges = err[2] < err[0] && err[2] < 0.02;

    let mut identical = true;
    for seed in 0..5 {
        let r = random_r_matrix(12, 0.3, 50 + seed);
        let p = make_ordering(&r, OrderingStrategy::Random, seed);
        let plain = build_with_options(&r, &p, &opts(0.1, seed)).unwrap();
        let signed = build_with_options(&r, &p, &BuildOptions { mode: ScalingMode::Sign, ..opts(0.1, seed) }).unwrap();
        identical &= plain.l() == signed.l() && plain.d() == signed.d();
    }
    outcome(
        converges && identical,
        format!(
            "factor error {:.2e} / {:.2e} / {:.2e} at delta 0.2 / 0.05 / 0.01, unsigned inputs bit-identical: {identical}",
            err[0], err[1], err[2]
        ),
    )
}
