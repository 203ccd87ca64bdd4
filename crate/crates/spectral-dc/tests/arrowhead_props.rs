mod common;

use proptest::prelude::*;
use spectral_dc::afmm::Point;
use spectral_dc::arrowhead::*;
use spectral_dc::matrix::matmul;
use spectral_dc::oracle::jacobi_eig_real;
use spectral_dc::{Matrix, OpCounter};

fn two_norm_bound(m: &Matrix<f64>) -> f64 {
    m.norm_fro()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn deflation_meets_its_guarantees(seed in any::<u64>()) {
        let n = 32;
        let tau = 1e-8;
        let h = common::random_arrowhead(n, &mut common::rng(seed));
        let out = deflate(&h, tau).unwrap();
        prop_assert!(out.core.d.windows(2).all(|w| w[1] - w[0] > tau));
        prop_assert!(out.core.z.iter().all(|z| z.abs() >= tau));
        let g = out.g.to_dense();
        let rebuilt = matmul(&matmul(&g, &out.reduced_dense()).unwrap(), &g.transpose()).unwrap();
        prop_assert!(two_norm_bound(&h.to_dense().sub(&rebuilt).unwrap()) <= n as f64 * tau);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reconstruction_is_exact_for_computed_roots(seed in any::<u64>(), n in 2usize..64) {
        let h = common::random_arrowhead(n, &mut common::rng(seed));
        let params = ArrowheadParams::full(&h, 1e-6);
        let out = deflate(&h, params.tau.effective).unwrap();
        prop_assume!(out.core.n() >= 2);
        let roots = secular_eigenvalues(&out.core, params.secular(), Backend::Exact, &OpCounter::new()).unwrap();
        let signs: Vec<f64> = out.core.z.iter().map(|z| z.signum()).collect();
        let rec = reconstruct(&roots.lambdas, &out.core.d, &signs, Backend::Exact, 1e-14, &OpCounter::new()).unwrap();
        let hat = Arrowhead::new(rec.alpha_hat, rec.z_hat.clone(), out.core.d.clone()).unwrap();
        let eig = jacobi_eig_real(&hat.to_dense()).unwrap();
        for (a, b) in eig.values.iter().zip(roots.values()) {
            prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
        }
        for (a, b) in rec.z_hat.iter().zip(&out.core.z) {
            prop_assert!(a.signum() == b.signum());
        }
    }

    #[test]
    fn diagonalization_bounds_hold_for_both_backends(seed in any::<u64>(), n in 2usize..48) {
        let h = common::random_arrowhead(n, &mut common::rng(seed));
        let eps = 1e-6;
        let mut all = Vec::new();
        for backend in [Backend::Exact, Backend::Fmm] {
            let out = arrowhead_diagonalize(&h, &Matrix::identity(n), eps, backend, &OpCounter::new()).unwrap();
            let q = out.qtb.transpose();
            let rebuilt = matmul(&matmul(&q, &Matrix::from_diag(&out.values)).unwrap(), &out.qtb).unwrap();
            prop_assert!(two_norm_bound(&h.to_dense().sub(&rebuilt).unwrap()) <= eps);
            prop_assert!(matmul(&out.qtb, &q).unwrap().minus_identity().norm_fro() <= 3.0 * eps / (n * n) as f64);
            all.push(out.values);
        }
        let agree = 2.0 * ArrowheadParams::full(&h, eps).eps_lambda.effective;
        for (a, b) in all[0].iter().zip(&all[1]) {
            prop_assert!((a - b).abs() <= agree);
        }
    }

    #[test]
    fn perturbed_roots_give_nearby_shaft(seed in any::<u64>(), n in 3usize..24) {
        let mut rng = common::rng(seed);
        let h = common::random_arrowhead(n, &mut rng);
        let tau = 1e-3;
        let out = deflate(&h, tau).unwrap();
        prop_assume!(out.core.n() >= 3);
        let core = &out.core;
        let m = core.n();
        let eig = jacobi_eig_real(&core.to_dense()).unwrap();
        let eps = 1e-4;
        let shift = eps * tau.powi(3) / (2.0 * (m as f64 + 1.0));
        let perturbed: Vec<Point> = eig.values.iter().enumerate()
            .map(|(i, &v)| Point::new(v + if i % 2 == 0 { shift } else { -shift }))
            .collect();
        prop_assume!(check_interlacing(&perturbed, &core.d).is_ok());
        let signs: Vec<f64> = core.z.iter().map(|z| z.signum()).collect();
        let rec = reconstruct(&perturbed, &core.d, &signs, Backend::Exact, 1e-14, &OpCounter::new()).unwrap();
        let dz: f64 = rec.z_hat.iter().zip(&core.z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let me = m as f64 * eps;
        prop_assert!(dz <= me / (1.0 - me), "{}", dz);
    }
}

#[test]
fn merged_pair_residual() {
    let h = Arrowhead::new(0.0, vec![0.5, 0.5], vec![0.2, 0.2 + 1e-9]).unwrap();
    let out = deflate(&h, 1e-6).unwrap();
    let g = out.g.to_dense();
    let rebuilt = matmul(&matmul(&g, &out.reduced_dense()).unwrap(), &g.transpose()).unwrap();
    assert!(h.to_dense().sub(&rebuilt).unwrap().norm_fro() <= 3e-6);
    assert!((out.core.z[0] - 0.5f64.hypot(0.5)).abs() < 1e-15);
}

#[test]
fn inner_products_of_zero_vector_vanish() {
    let h = common::random_arrowhead(32, &mut common::rng(3));
    let out = arrowhead_diagonalize(&h, &Matrix::zeros(32, 1), 1e-6, Backend::Fmm, &OpCounter::new()).unwrap();
    assert!(out.qtb.as_slice().iter().all(|&x| x == 0.0));
}

#[test]
fn exact_and_fast_shafts_agree() {
    let n = 128;
    let d: Vec<f64> = (0..n - 1).map(|i| -0.8 + 1.6 * i as f64 / (n - 1) as f64).collect();
    let z: Vec<f64> = (0..n - 1).map(|i| 0.05 * (1.0 + (i % 3) as f64) / (n as f64).sqrt()).collect();
    let core = Arrowhead::new(0.1, z, d).unwrap();
    let tol = SecularTolerances { tau: 1e-4, eps_lambda: 1e-14, eps_eval: 1e-14 };
    let roots = secular_eigenvalues(&core, tol, Backend::Exact, &OpCounter::new()).unwrap();
    let signs = vec![1.0; n - 1];
    let a = reconstruct(&roots.lambdas, &core.d, &signs, Backend::Exact, 1e-9, &OpCounter::new()).unwrap();
    let b = reconstruct(&roots.lambdas, &core.d, &signs, Backend::Fmm, 1e-9, &OpCounter::new()).unwrap();
    for (x, y) in a.z_hat.iter().zip(&b.z_hat) {
        assert!((x - y).abs() <= 1e-9 * x.abs(), "{x} {y}");
    }
}

#[test]
fn secular_backends_agree_at_64() {
    let h = common::random_arrowhead(64, &mut common::rng(11));
    let params = ArrowheadParams::full(&h, 1e-6);
    let out = deflate(&h, params.tau.effective).unwrap();
    let ops = OpCounter::new();
    let a = secular_eigenvalues(&out.core, params.secular(), Backend::Exact, &ops).unwrap().values();
    let b = secular_eigenvalues(&out.core, params.secular(), Backend::Fmm, &ops).unwrap().values();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 2.0 * params.eps_lambda.effective);
    }
}
