//! Command-line front end for the `spectral-dc` solvers.
//!
//! Exit codes: 0 success, 2 unreadable or invalid input, 3 numerical
//! failure (including a computed result that misses its contract),
//! 4 requested accuracy below the precision floor.

pub mod bench;
pub mod mm;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;
use spectral_dc::apps::{self, Spectrum};
use spectral_dc::arrowhead::Backend;
use spectral_dc::{matmul, DenseHermitian, Matrix, OpCounter};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PRECISION: i32 = 4;

/// Environment variable overriding `--threads`.
pub const THREADS_ENV: &str = "SPECTRAL_DC_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: mm::ParseError },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Solver(#[from] spectral_dc::Error),
    #[error("result misses its contract: {0}")]
    Contract(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use spectral_dc::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Usage(_) | CliError::Io(_) => EXIT_PARSE,
            CliError::Solver(E::PrecisionFloor { .. }) => EXIT_PRECISION,
            CliError::Solver(E::InvalidInput(_) | E::ShapeMismatch(_) | E::NotHermitian) => EXIT_PARSE,
            CliError::Solver(_) | CliError::Contract(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spectral-dc", version, about = "Divide-and-conquer Hermitian eigensolvers")]
pub struct Cli {
    /// Worker threads (default: all cores); SPECTRAL_DC_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues and eigenvectors of a Hermitian matrix.
    Eig(EigArgs),
    /// Singular value decomposition.
    Svd(SvdArgs),
    /// Gap between the k-th and (k+1)-th smallest eigenvalues, as JSON.
    Gap(GapArgs),
    /// Condition number estimate κ ≤ κ̃ ≤ 3nκ, as JSON.
    Cond(CondArgs),
    /// Benchmarks with scaling exponents, as JSON.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct EigArgs {
    /// MatrixMarket file holding a Hermitian matrix.
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Skip eigenvectors.
    #[arg(long)]
    pub values_only: bool,
    #[arg(long, default_value = "fmm", value_parser = parse_backend)]
    pub backend: Backend,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SvdArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    pub input: PathBuf,
    /// Gap index, 1 ≤ k < n.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    /// Positive definite S of a pencil (H, S).
    #[arg(long)]
    pub mass: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CondArgs {
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: bench::Suite,
    /// Comma-separated sizes; may be empty.
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "")]
    pub sizes: Vec<String>,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value = "fmm", value_parser = parse_backend)]
    pub backend: Backend,
    /// Bandwidths for the banded reduction cases.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    pub bandwidths: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for gnuplot data files.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: spectral_dc::Error| e.to_string())
}

/// Thread count from `--threads`, overridden by the environment.
pub fn thread_count(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>, CliError> {
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(v) => match v.parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV}={v} is not a positive integer"))),
        },
        None if flag == Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        None => Ok(flag),
    }
}

fn read_matrix(path: &Path) -> Result<Matrix<C64>, CliError> {
    mm::read(path).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

fn read_hermitian(path: &Path) -> Result<DenseHermitian, CliError> {
    let m = read_matrix(path)?;
    if !m.is_square() {
        return Err(spectral_dc::Error::ShapeMismatch(format!("{}x{} matrix is not square", m.rows(), m.cols())).into());
    }
    Ok(DenseHermitian::new(m)?)
}

fn write_csv(path: &Path, values: &[f64]) -> Result<(), CliError> {
    let mut body = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        body.push_str(&format!("{},{v:.16e}\n", i + 1));
    }
    std::fs::write(path, body)?;
    Ok(())
}

fn orth_defect(q: &Matrix<C64>) -> Result<f64, CliError> {
    Ok(matmul(&q.adjoint(), q)?.minus_identity().norm_fro())
}

fn cmd_eig(args: &EigArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let a = read_hermitian(&args.input)?;
    std::fs::create_dir_all(&args.out)?;
    if args.values_only {
        let values = apps::hermitian_eigenvalues_with(&a, args.eps, args.backend)?;
        write_csv(&args.out.join("eigenvalues.csv"), &values)?;
        writeln!(out, "n {}", a.n())?;
        return Ok(());
    }
    let e = apps::hermitian_diagonalize_with(&a, args.eps, args.backend, &OpCounter::new())?;
    let lam = Matrix::from_diag(&e.values).to_complex();
    let back = matmul(&matmul(&e.vectors, &lam)?, &e.vectors.adjoint())?;
    let residual = a.matrix().sub(&back)?.norm_fro();
    let orth = orth_defect(&e.vectors)?;
    write_csv(&args.out.join("eigenvalues.csv"), &e.values)?;
    mm::write(&args.out.join("eigenvectors.mtx"), &e.vectors)?;
    writeln!(out, "n {}", a.n())?;
    writeln!(out, "residual {residual:.3e} (bound {:.3e})", e.backward_bound)?;
    writeln!(out, "orthogonality {orth:.3e} (bound {:.3e})", e.orth_bound)?;
    if residual > e.backward_bound || orth > e.orth_bound {
        return Err(CliError::Contract(format!(
            "residual {residual:e} / orthogonality {orth:e} exceed bounds {:e} / {:e}",
            e.backward_bound, e.orth_bound
        )));
    }
    Ok(())
}

fn cmd_svd(args: &SvdArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let a = read_matrix(&args.input)?;
    let wide = a.rows() < a.cols();
    let r = apps::svd(&if wide { a.adjoint() } else { a.clone() }, args.eps)?;
    // For a wide A the factors of A* swap roles.
    let (u, v) = if wide { (r.v, r.u) } else { (r.u, r.v) };
    let k = r.sigma.len();
    let us = Matrix::from_fn(u.rows(), k, |i, j| u[(i, j)] * r.sigma[j]);
    let residual = a.sub(&matmul(&us, &v.adjoint())?)?.norm_fro();
    let (ou, ov) = (orth_defect(&u)?, orth_defect(&v)?);
    std::fs::create_dir_all(&args.out)?;
    write_csv(&args.out.join("singular_values.csv"), &r.sigma)?;
    mm::write(&args.out.join("u.mtx"), &u)?;
    mm::write(&args.out.join("v.mtx"), &v)?;
    let f = a.norm_fro();
    writeln!(out, "residual {:.3e} (relative to ‖A‖_F)", residual / f)?;
    writeln!(out, "orthogonality_u {ou:.3e}")?;
    writeln!(out, "orthogonality_v {ov:.3e}")?;
    if residual > args.eps * f || ou > args.eps || ov > args.eps {
        return Err(CliError::Contract(format!("residual {residual:e}, orthogonality {ou:e} / {ov:e} against eps {:e}", args.eps)));
    }
    Ok(())
}

#[derive(Serialize)]
struct GapJson {
    mu: f64,
    gap: f64,
    iterations: usize,
}

fn cmd_gap(args: &GapArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let h = read_hermitian(&args.input)?;
    let g = match &args.mass {
        Some(p) => {
            let s = read_hermitian(p)?;
            apps::spectral_gap(Spectrum::Pencil { h: &h, s: &s }, args.k, args.eps)?
        }
        None => apps::spectral_gap(Spectrum::Matrix(&h), args.k, args.eps)?,
    };
    let json = GapJson { mu: g.mu_k, gap: g.gap_k, iterations: g.iterations };
    writeln!(out, "{}", serde_json::to_string(&json).expect("plain struct"))?;
    Ok(())
}

#[derive(Serialize)]
struct CondJson {
    kappa: f64,
}

fn cmd_cond(args: &CondArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let a = read_matrix(&args.input)?;
    let kappa = apps::condition_number(&a)?;
    writeln!(out, "{}", serde_json::to_string(&CondJson { kappa }).expect("plain struct"))?;
    Ok(())
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sizes = args
        .sizes
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| CliError::Usage(format!("size `{s}` is not a positive integer"))))
        .collect::<Result<Vec<_>, _>>()?;
    if sizes.contains(&0) {
        return Err(CliError::Usage("sizes must be positive".into()));
    }
    let opts = bench::Options {
        suite: args.suite,
        sizes,
        eps: args.eps,
        backend: args.backend,
        bandwidths: args.bandwidths.clone(),
        seed: args.seed,
    };
    let report = bench::run(&opts);
    let json = serde_json::to_string_pretty(&report).expect("finite report");
    match &args.out {
        Some(p) => std::fs::write(p, json + "\n")?,
        None => writeln!(out, "{json}")?,
    }
    if let Some(dir) = &args.data {
        std::fs::create_dir_all(dir)?;
        for (name, body) in bench::data_files(&report) {
            std::fs::write(dir.join(name), body)?;
        }
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} = {}", c.name, c.value);
    }
    if !report.passed() {
        return Err(CliError::Contract("benchmark scaling checks failed".into()));
    }
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Eig(a) => cmd_eig(a, out),
        Command::Svd(a) => cmd_svd(a, out),
        Command::Gap(a) => cmd_gap(a, out),
        Command::Cond(a) => cmd_cond(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    }
}

/// Parses arguments, configures the thread pool and runs one command.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    let env = std::env::var(THREADS_ENV).ok();
    let result = thread_count(cli.threads, env.as_deref()).and_then(|threads| {
        if let Some(k) = threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
        }
        execute(&cli, &mut std::io::stdout().lock())
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
