//! Benchmark suites and scaling reports.
//!
//! Every record carries a residual measured on the computed output, never a
//! copy of a theoretical bound. Flop counts are deterministic and are what
//! the scaling checks use; wall time is informational.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spectral_dc::afmm::{eval_exact, eval_fmm, EvalRequest, Kernel, KernelSum};
use spectral_dc::arrowhead::Backend;
use spectral_dc::band::tridiagonalize_counted;
use spectral_dc::dc::{diagonalize_counted, eigenvalues_only_counted};
use spectral_dc::oracle::sturm_count;
use spectral_dc::{matmul, DenseHermitian, Matrix, OpCounter, SymTridiagonal};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Fmm,
    Dc,
    Reduce,
    All,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BenchRecord {
    pub op: String,
    pub n: usize,
    pub backend: String,
    pub wall_seconds: f64,
    pub counted_flops: u64,
    /// Measured output error; the meaning depends on `op`.
    pub achieved_residual: f64,
    /// Measured `‖Q*Q − I‖`; zero for operations that produce no basis.
    pub achieved_orth_defect: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Exponent {
    pub op: String,
    pub backend: String,
    /// Least-squares slope of `ln flops` against `ln n`.
    pub exponent: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, min: Option<f64>, max: Option<f64>) -> Self {
        let pass = min.is_none_or(|m| value >= m) && max.is_none_or(|m| value <= m);
        Check { name: name.into(), value, min, max, pass }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Default)]
pub struct Report {
    pub records: Vec<BenchRecord>,
    pub exponents: Vec<Exponent>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub suite: Suite,
    pub sizes: Vec<usize>,
    pub eps: f64,
    pub backend: Backend,
    pub bandwidths: Vec<usize>,
    pub seed: u64,
}

/// Sizes from which the asymptotic exponent limits are enforced; below
/// them lower-order terms dominate the counts.
pub const ASYMPTOTIC_FROM: usize = 1024;

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn timed<T>(f: impl FnOnce(&OpCounter) -> T) -> (T, f64, u64) {
    let ops = OpCounter::new();
    let start = Instant::now();
    let out = f(&ops);
    (out, start.elapsed().as_secs_f64(), ops.get())
}

fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Exact => "exact",
        Backend::Fmm => "fmm",
    }
}

/// Jittered-grid sources in (−1, 1) with one target between neighbours.
fn kernel_instance(n: usize, eps: f64, rng: &mut ChaCha8Rng) -> (KernelSum, EvalRequest) {
    let h = 2.0 / n as f64;
    let ys: Vec<f64> = (0..n).map(|j| -1.0 + h * (j as f64 + 0.5 + rng.gen_range(-0.3..0.3))).collect();
    let xs: Vec<f64> = ys.windows(2).map(|w| w[0] + (w[1] - w[0]) * rng.gen_range(0.25..0.75)).collect();
    let cs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0) / n as f64).collect();
    let ks = KernelSum::new(Kernel::Inverse, ys, cs, 2.0).expect("well-formed sources");
    (ks, EvalRequest::new(xs, 0.1 * h, eps))
}

/// Unreduced tridiagonal with `‖T‖ ≤ 1`.
pub fn random_tridiagonal(n: usize, rng: &mut ChaCha8Rng) -> SymTridiagonal {
    let d = (0..n).map(|_| rng.gen_range(-1.0..1.0) / 3.0).collect();
    let e = (0..n.saturating_sub(1)).map(|_| rng.gen_range(0.05..1.0) / 3.0).collect();
    SymTridiagonal::new(d, e).expect("finite entries")
}

fn random_hermitian(n: usize, band: usize, rng: &mut ChaCha8Rng) -> DenseHermitian {
    let m = Matrix::from_fn(n, n, |i, j| {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if i.abs_diff(j) <= band { z } else { C64::new(0.0, 0.0) }
    });
    let h = DenseHermitian::from_nearly_hermitian(m).expect("square");
    let f = h.matrix().norm_fro();
    DenseHermitian::new(h.matrix().scaled(1.0 / f)).expect("finite")
}

/// Largest distance from a computed eigenvalue to the true one of the same
/// index, located by Sturm-count bisection around the computed value.
pub fn eigenvalue_error(t: &SymTridiagonal, values: &[f64], eps: f64) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut w = eps.max(f64::EPSILON);
            let (mut a, mut b) = loop {
                let (a, b) = (v - w, v + w);
                if sturm_count(t, a) <= i && sturm_count(t, b) > i {
                    break (a, b);
                }
                w *= 4.0;
            };
            while b - a > 1e-3 * eps {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(t, mid) > i { b = mid } else { a = mid }
            }
            (v - 0.5 * (a + b)).abs() + 0.5 * (b - a)
        })
        .fold(0.0, f64::max)
}

/// `‖UᵀU − I‖_F`, exact up to `n = 1024` and otherwise estimated from a few
/// random probes `‖(UᵀU − I)x‖/‖x‖`.
fn orth_defect_real(u: &Matrix<f64>, rng: &mut ChaCha8Rng) -> f64 {
    let n = u.cols();
    if n <= 1024 {
        return matmul(&u.transpose(), u).expect("square").minus_identity().norm_fro();
    }
    (0..4)
        .map(|_| {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ux = u.matvec(&x);
            let mut y = vec![0.0; n];
            for (i, w) in ux.iter().enumerate() {
                for (yj, uij) in y.iter_mut().zip(u.row(i)) {
                    *yj += uij * w;
                }
            }
            let num: f64 = y.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
            (num / x.iter().map(|v| v * v).sum::<f64>()).sqrt()
        })
        .fold(0.0, f64::max)
}

/// `‖TU − UΛ‖_F` using the tridiagonal structure.
fn tridiagonal_residual(t: &SymTridiagonal, u: &Matrix<f64>, values: &[f64]) -> f64 {
    let (d, e) = (t.diag(), t.off());
    let n = t.n();
    let mut sum = 0.0;
    for i in 0..n {
        for (j, &lam) in values.iter().enumerate() {
            let mut r = (d[i] - lam) * u[(i, j)];
            if i > 0 {
                r += e[i - 1] * u[(i - 1, j)];
            }
            if i + 1 < n {
                r += e[i] * u[(i + 1, j)];
            }
            sum += r * r;
        }
    }
    sum.sqrt()
}

fn fmm_suite(opts: &Options, rng: &mut ChaCha8Rng, report: &mut Report) {
    for &n in &opts.sizes {
        let (ks, req) = kernel_instance(n, opts.eps, rng);
        let (exact, wall, flops) = timed(|ops| eval_exact(&ks, &req, ops).expect("separated instance"));
        // Reference for the direct sum itself: the same sum in reverse order.
        let reverse: Vec<f64> = req
            .targets
            .iter()
            .map(|x| ks.sources.iter().zip(&ks.weights).rev().map(|(y, c)| c * ks.kernel.eval(x.diff(*y))).sum())
            .collect();
        report.records.push(BenchRecord {
            op: "eval_exact".into(),
            n,
            backend: "exact".into(),
            wall_seconds: wall,
            counted_flops: flops,
            achieved_residual: max_diff(&exact, &reverse),
            achieved_orth_defect: 0.0,
        });
        let (fast, wall, flops) = timed(|ops| eval_fmm(&ks, &req, ops).expect("separated instance"));
        report.records.push(BenchRecord {
            op: "eval_fmm".into(),
            n,
            backend: "fmm".into(),
            wall_seconds: wall,
            counted_flops: flops,
            achieved_residual: max_diff(&fast, &exact),
            achieved_orth_defect: 0.0,
        });
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn dc_suite(opts: &Options, rng: &mut ChaCha8Rng, report: &mut Report) {
    let backend = backend_name(opts.backend);
    for &n in &opts.sizes {
        let t = random_tridiagonal(n, rng);
        let (values, wall, flops) = timed(|ops| eigenvalues_only_counted(&t, opts.eps, opts.backend, ops));
        match values {
            Ok(values) => report.records.push(BenchRecord {
                op: "eigenvalues_only".into(),
                n,
                backend: backend.into(),
                wall_seconds: wall,
                counted_flops: flops,
                achieved_residual: eigenvalue_error(&t, &values, opts.eps),
                achieved_orth_defect: 0.0,
            }),
            Err(e) => eprintln!("eigenvalues_only at n = {n}: {e}"),
        }
        let (diag, wall, flops) = timed(|ops| diagonalize_counted(&t, opts.eps, opts.backend, ops));
        match diag {
            Ok(d) => report.records.push(BenchRecord {
                op: "diagonalize".into(),
                n,
                backend: backend.into(),
                wall_seconds: wall,
                counted_flops: flops,
                achieved_residual: tridiagonal_residual(&t, &d.vectors, &d.values),
                achieved_orth_defect: orth_defect_real(&d.vectors, rng),
            }),
            Err(e) => eprintln!("diagonalize at n = {n}: {e}"),
        }
    }
}

fn reduce_suite(opts: &Options, rng: &mut ChaCha8Rng, report: &mut Report) {
    for &n in &opts.sizes {
        let mut cases = vec![("reduce_dense".to_string(), n.saturating_sub(1))];
        cases.extend(opts.bandwidths.iter().filter(|&&d| d < n).map(|&d| (format!("reduce_banded_d{d}"), d)));
        for (op, band) in cases {
            let a = random_hermitian(n, band, rng);
            // Counts and time come from the reduction alone; Q is formed in a
            // separate verification run.
            let (r, wall, flops) = timed(|ops| tridiagonalize_counted(&a, false, ops));
            if let Err(e) = r {
                eprintln!("{op} at n = {n}: {e}");
                continue;
            }
            let v = tridiagonalize_counted(&a, true, &OpCounter::new()).expect("reduction succeeded once");
            let q = v.q.expect("requested");
            let t = v.t.to_dense().to_complex();
            let back = matmul(&matmul(&q, &t).expect("square"), &q.adjoint()).expect("square");
            report.records.push(BenchRecord {
                op,
                n,
                backend: "none".into(),
                wall_seconds: wall,
                counted_flops: flops,
                achieved_residual: a.matrix().sub(&back).expect("same shape").norm_fro() / a.matrix().norm_fro(),
                achieved_orth_defect: matmul(&q.adjoint(), &q).expect("square").minus_identity().norm_fro(),
            });
        }
    }
}

fn add_exponents(report: &mut Report) {
    let mut keys: Vec<(String, String)> = report.records.iter().map(|r| (r.op.clone(), r.backend.clone())).collect();
    keys.dedup();
    keys.sort();
    keys.dedup();
    for (op, backend) in keys {
        let pts: Vec<(f64, f64)> = report
            .records
            .iter()
            .filter(|r| r.op == op && r.backend == backend)
            .map(|r| (r.n as f64, r.counted_flops.max(1) as f64))
            .collect();
        if let Some(exponent) = loglog_slope(&pts) {
            report.exponents.push(Exponent { op, backend, exponent });
        }
    }
}

fn add_checks(opts: &Options, report: &mut Report) {
    let asymptotic = opts.sizes.len() >= 2 && opts.sizes.iter().all(|&n| n >= ASYMPTOTIC_FROM);
    if asymptotic {
        for e in &report.exponents {
            let (min, max) = match e.op.as_str() {
                "eval_fmm" => (None, Some(1.4)),
                "eval_exact" => (Some(1.8), None),
                "eigenvalues_only" => (None, Some(2.4)),
                "diagonalize" => (None, Some(2.6)),
                _ => continue,
            };
            report.checks.push(Check::new(format!("{} exponent ({})", e.op, e.backend), e.exponent, min, max));
        }
    }
    // Banded reduction work grows linearly in the bandwidth.
    let mut bands = opts.bandwidths.clone();
    bands.sort_unstable();
    for &n in &opts.sizes {
        let flops = |d: usize| {
            let op = format!("reduce_banded_d{d}");
            report.records.iter().find(|r| r.n == n && r.op == op).map(|r| r.counted_flops as f64)
        };
        for w in bands.windows(2) {
            if w[1] != 2 * w[0] {
                continue;
            }
            if let (Some(lo), Some(hi)) = (flops(w[0]), flops(w[1])) {
                report.checks.push(Check::new(format!("banded flop ratio d={}→{} at n={n}", w[0], w[1]), hi / lo, Some(1.6), Some(2.6)));
            }
        }
    }
}

pub fn run(opts: &Options) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = Report::default();
    let all = opts.suite == Suite::All;
    if all || opts.suite == Suite::Fmm {
        fmm_suite(opts, &mut rng, &mut report);
    }
    if all || opts.suite == Suite::Dc {
        dc_suite(opts, &mut rng, &mut report);
    }
    if all || opts.suite == Suite::Reduce {
        reduce_suite(opts, &mut rng, &mut report);
    }
    add_exponents(&mut report);
    add_checks(opts, &mut report);
    report
}

/// Gnuplot-ready `n wall_seconds counted_flops` columns, one file per
/// operation and backend.
pub fn data_files(report: &Report) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    for r in &report.records {
        let name = format!("{}_{}.dat", r.op, r.backend);
        let line = format!("{} {:.6e} {}\n", r.n, r.wall_seconds, r.counted_flops);
        match out.iter_mut().find(|(f, _)| *f == name) {
            Some((_, body)) => body.push_str(&line),
            None => out.push((name, format!("# n wall_seconds counted_flops\n{line}"))),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0].iter().map(|&n: &f64| (n, 3.0 * n.powi(2))).collect();
        assert!((loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), None);
    }

    #[test]
    fn sturm_error_of_exact_values() {
        let t = SymTridiagonal::new(vec![0.0; 3], vec![0.5, 0.5]).unwrap();
        let s = 0.5 * 2f64.sqrt();
        assert!(eigenvalue_error(&t, &[-s, 0.0, s], 1e-8) <= 1e-10);
        assert!(eigenvalue_error(&t, &[-s, 1e-4, s], 1e-8) >= 0.9e-4);
    }

    #[test]
    fn empty_sizes_give_an_empty_report() {
        let opts = Options { suite: Suite::All, sizes: vec![], eps: 1e-6, backend: Backend::Fmm, bandwidths: vec![4, 8], seed: 0 };
        let r = run(&opts);
        assert_eq!(r, Report::default());
        assert!(r.passed());
    }
}
