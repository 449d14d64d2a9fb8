use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use walkprec::precond::{make_ordering, OrderingStrategy};
use walkprec::sparse::market::{read_matrix_market, read_vector, write_matrix_market, write_vector};
use walkprec::sparse::gen_laplace3d;
use walkprec::SparseMatrix;
use walkprec_bench::{compare, size_match, write_csv, BenchError, CompareConfig, Method};

#[derive(Parser)]
#[command(name = "walkprec", version, about = "Random-walk incomplete factorization benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a 7-point Laplacian and an all-ones right-hand side.
    Gen {
        #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"])]
        grid: Vec<usize>,
        /// Output prefix; writes PREFIX.mtx and PREFIX.rhs.mtx.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build each preconditioner, solve with PCG and print a CSV table.
    Compare {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', default_value = "stochastic,ic0,ict")]
        method: Vec<Method>,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 0.99)]
        alpha: f64,
        #[arg(long, default_value_t = 20)]
        min_walks: u64,
        /// Disable crediting sub-walks of earlier walks to later rows.
        #[arg(long)]
        no_reuse: bool,
        #[arg(long, default_value = "random")]
        ordering: OrderingStrategy,
        #[arg(long, default_value = "natural")]
        baseline_ordering: OrderingStrategy,
        /// Fixed ICT drop tolerance; omitted means size-match to the stochastic factor.
        #[arg(long)]
        drop_tol: Option<f64>,
        #[arg(long)]
        max_row_nnz: Option<usize>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the stochastic solution vector here.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Find the ICT drop tolerance giving a target factor size.
    SizeMatch {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        target: usize,
        #[arg(long, default_value_t = 0.1)]
        size_tol: f64,
        #[arg(long, default_value = "natural")]
        ordering: OrderingStrategy,
        #[arg(long)]
        max_row_nnz: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory to save the matched factor in.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// Generate a 7-point Laplacian instead of reading a matrix.
    #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"], conflicts_with = "matrix")]
    grid: Option<Vec<usize>>,
    /// Matrix Market coordinate file.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Right-hand side as a Matrix Market array, or `ones`.
    #[arg(long, default_value = "ones")]
    rhs: String,
}

impl Input {
    fn matrix(&self) -> Result<SparseMatrix, BenchError> {
        match (&self.grid, &self.matrix) {
            (Some(g), _) => Ok(gen_laplace3d(g[0], g[1], g[2])?),
            (None, Some(p)) => Ok(read_matrix_market(p)?),
            (None, None) => Err(BenchError::Usage("one of --grid or --matrix is required".into())),
        }
    }

    fn rhs(&self, n: usize) -> Result<Vec<f64>, BenchError> {
        if self.rhs == "ones" {
            return Ok(vec![1.0; n]);
        }
        let b = read_vector(&self.rhs)?;
        if b.len() != n {
            return Err(walkprec::Error::DimensionMismatch { expected: n, found: b.len() }.into());
        }
        Ok(b)
    }
}

fn run(cli: Cli) -> Result<bool, BenchError> {
    match cli.cmd {
        Cmd::Gen { grid, out } => {
            let a = gen_laplace3d(grid[0], grid[1], grid[2])?;
            write_matrix_market(&a, out.with_extension("mtx"))?;
            write_vector(&vec![1.0; a.n()], out.with_extension("rhs.mtx"))?;
            eprintln!("N={} E={}", a.n(), a.nnz());
            Ok(true)
        }
        Cmd::Compare {
            input,
            method,
            delta,
            alpha,
            min_walks,
            no_reuse,
            ordering,
            baseline_ordering,
            drop_tol,
            max_row_nnz,
            tol,
            max_iter,
            seed,
            out,
            solution,
        } => {
            let a = input.matrix()?;
            let b = input.rhs(a.n())?;
            let cfg = CompareConfig {
                methods: method,
                delta,
                alpha,
                min_walks,
                reuse: !no_reuse,
                ordering,
                baseline_ordering,
                seed,
                tol,
                max_iter,
                drop_tol,
                max_row_nnz,
                ..Default::default()
            };
            let rows = compare(&a, &b, &cfg)?;
            match out {
                Some(p) => write_csv(&rows, BufWriter::new(File::create(p)?))?,
                None => write_csv(&rows, io::stdout().lock())?,
            }
            if let Some(p) = solution {
                if let Some(r) = rows.iter().find(|r| r.method == Method::Stochastic) {
                    write_vector(&r.x, p)?;
                }
            }
            Ok(rows.iter().all(|r| r.report.converged))
        }
        Cmd::SizeMatch { input, target, size_tol, ordering, max_row_nnz, seed, out } => {
            let a = input.matrix()?;
            let p = make_ordering(&a, ordering, seed);
            let m = size_match(&a, &p, target, size_tol, max_row_nnz)?;
            let mut so = io::stdout().lock();
            writeln!(so, "drop_tol={:e} C={} steps={}", m.drop_tol, m.c, m.steps)?;
            if let Some(dir) = out {
                m.factor.save(dir)?;
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: at least one solve did not converge");
            ExitCode::from(3)
        }
        Err(e @ BenchError::SizeMatch { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
