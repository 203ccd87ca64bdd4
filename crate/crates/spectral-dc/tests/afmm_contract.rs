mod common;

use proptest::prelude::*;
use spectral_dc::afmm::{eval_exact, eval_fmm, EvalRequest, Kernel, KernelSum};
use spectral_dc::OpCounter;

fn max_dev(ks: &KernelSum, req: &EvalRequest) -> f64 {
    let ops = OpCounter::new();
    let e = eval_exact(ks, req, &ops).unwrap();
    let f = eval_fmm(ks, req, &ops).unwrap();
    e.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn kernel() -> impl Strategy<Value = Kernel> {
    prop_oneof![Just(Kernel::Log), Just(Kernel::Inverse), Just(Kernel::InverseSquare)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fmm_meets_requested_accuracy(seed in any::<u64>(), n in 64usize..1500, k in kernel(), e in 4i32..12) {
        let eps = 10f64.powi(-e);
        let (ks, req) = common::random_kernel_sum(k, n, eps, &mut common::rng(seed));
        prop_assert!(max_dev(&ks, &req) <= eps);
    }

    #[test]
    fn fmm_is_linear_in_weights(seed in any::<u64>(), scale in -3.0f64..3.0) {
        let eps = 1e-9;
        let (ks, req) = common::random_kernel_sum(Kernel::Inverse, 700, eps, &mut common::rng(seed));
        let ops = OpCounter::new();
        let base = eval_fmm(&ks, &req, &ops).unwrap();
        let mut scaled = ks.clone();
        scaled.weights.iter_mut().for_each(|c| *c *= scale);
        let out = eval_fmm(&scaled, &req, &ops).unwrap();
        for (a, b) in base.iter().zip(&out) {
            prop_assert!((a * scale - b).abs() <= 2.0 * eps);
        }
    }
}

#[test]
#[ignore]
fn calibration_report() {
    for k in [Kernel::Log, Kernel::Inverse, Kernel::InverseSquare] {
        for eps in [1e-6, 1e-10, 1e-14] {
            let mut worst: f64 = 0.0;
            for seed in 0..5 {
                let (ks, req) = common::random_kernel_sum(k, 4096, eps, &mut common::rng(seed));
                worst = worst.max(max_dev(&ks, &req));
            }
            println!("{k:?} eps={eps:e} p={} worst={worst:e}", spectral_dc::afmm::chebyshev_order(4096, eps));
        }
    }
    for n in [1024usize, 2048, 4096, 8192, 16384] {
        let (ks, req) = common::random_kernel_sum(Kernel::Inverse, n, 1e-10, &mut common::rng(1));
        let (a, b) = (OpCounter::new(), OpCounter::new());
        eval_fmm(&ks, &req, &a).unwrap();
        eval_exact(&ks, &req, &b).unwrap();
        println!("n={n} fmm={} exact={}", a.get(), b.get());
    }
}
