//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_dc::afmm::{EvalRequest, Kernel, KernelSum};
use spectral_dc::{DenseHermitian, Matrix, SymTridiagonal, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unreduced symmetric tridiagonal with entries uniform in (−1, 1), scaled so
/// that its certified norm bound is at most one.
pub fn random_tridiagonal(n: usize, rng: &mut ChaCha8Rng) -> SymTridiagonal {
    let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let off: Vec<f64> = (0..n.saturating_sub(1))
        .map(|_| {
            let b: f64 = rng.gen_range(-1.0..1.0);
            if b == 0.0 { 0.5 } else { b }
        })
        .collect();
    let t = SymTridiagonal::new(diag, off).unwrap();
    let s = t.spectral_norm_upper();
    t.scaled(1.0 / s)
}

pub fn random_complex(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Matrix<C64> {
    Matrix::from_fn(m, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> DenseHermitian {
    DenseHermitian::from_nearly_hermitian(random_complex(n, n, rng)).unwrap()
}

/// Jittered-grid sources in (−1, 1), one target between each pair of
/// neighbouring sources, weights uniform in (−1/n, 1/n).
pub fn random_kernel_sum(kernel: Kernel, n: usize, eps: f64, rng: &mut ChaCha8Rng) -> (KernelSum, EvalRequest) {
    let h = 2.0 / n as f64;
    let ys: Vec<f64> = (0..n)
        .map(|j| -1.0 + h * (j as f64 + 0.5 + rng.gen_range(-0.3..0.3)))
        .collect();
    let xs: Vec<f64> = ys
        .windows(2)
        .map(|w| w[0] + (w[1] - w[0]) * rng.gen_range(0.25..0.75))
        .collect();
    let cs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0) / n as f64).collect();
    let delta = 0.1 * h;
    let ks = KernelSum::new(kernel, ys, cs, 2.0).unwrap();
    (ks, EvalRequest::new(xs, delta, eps))
}

/// Arrowhead with `‖H‖ ≤ 1`, including near-equal diagonal clusters and tiny
/// shaft entries so that deflation has work to do.
pub fn random_arrowhead(n: usize, rng: &mut ChaCha8Rng) -> spectral_dc::arrowhead::Arrowhead {
    let k = n - 1;
    let mut d: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut z: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0) / (k as f64).sqrt()).collect();
    for i in 1..k {
        if rng.gen_bool(0.1) {
            d[i] = d[i - 1] + rng.gen_range(0.0..1e-9);
        }
        if rng.gen_bool(0.1) {
            z[i] *= 1e-12;
        }
    }
    let h = spectral_dc::arrowhead::Arrowhead::new(rng.gen_range(-0.5..0.5), z, d).unwrap();
    let s = h.norm_upper().max(1.0);
    spectral_dc::arrowhead::Arrowhead::new(h.alpha / s, h.z.iter().map(|x| x / s).collect(), h.d.iter().map(|x| x / s).collect())
        .unwrap()
}

/// Hermitian matrix with bandwidth `d` and `‖A‖_F ≤ 1`.
pub fn random_banded_hermitian(n: usize, d: usize, rng: &mut ChaCha8Rng) -> DenseHermitian {
    let m = Matrix::from_fn(n, n, |i, j| {
        let x = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if i.abs_diff(j) <= d { x } else { C64::new(0.0, 0.0) }
    });
    let h = DenseHermitian::from_nearly_hermitian(m).unwrap();
    let f = h.matrix().norm_fro();
    DenseHermitian::new(h.matrix().scaled(1.0 / f)).unwrap()
}

/// Haar-like random unitary: the Q factor of a complex Gaussian-ish matrix.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> Matrix<C64> {
    spectral_dc::qr::householder_qr(&random_complex(n, n, rng)).unwrap().q
}

/// `U·diag(values)·U*` for a random unitary `U`.
pub fn planted_hermitian(values: &[f64], rng: &mut ChaCha8Rng) -> DenseHermitian {
    let u = random_unitary(values.len(), rng);
    let d = Matrix::from_diag(values).to_complex();
    let m = spectral_dc::matmul(&spectral_dc::matmul(&u, &d).unwrap(), &u.adjoint()).unwrap();
    DenseHermitian::from_nearly_hermitian(m).unwrap()
}

/// `m×n` matrix `U·diag(sigma)·V*` with random unitary factors.
pub fn planted_matrix(m: usize, sigma: &[f64], rng: &mut ChaCha8Rng) -> Matrix<C64> {
    let n = sigma.len();
    let u = random_unitary(m, rng).columns(0, n);
    let v = random_unitary(n, rng);
    let us = Matrix::from_fn(m, n, |i, j| u[(i, j)] * sigma[j]);
    spectral_dc::matmul(&us, &v.adjoint()).unwrap()
}

/// `κ·‖A‖` singular values log-spaced from 1 down to `1/κ`.
pub fn log_spaced(n: usize, kappa: f64) -> Vec<f64> {
    (0..n).map(|i| kappa.powf(-(i as f64) / (n - 1) as f64)).collect()
}
