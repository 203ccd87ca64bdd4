//! Diagonalizes a random complex Hermitian matrix and checks the result.
//!
//! cargo run --release -p spectral-dc --example hermitian_eig -- 256

use rand::{Rng, SeedableRng};
use spectral_dc::apps::hermitian_diagonalize;
use spectral_dc::{matmul, DenseHermitian, Matrix, C64};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(128);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let m = Matrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut a = DenseHermitian::from_nearly_hermitian(m).expect("square");
    a = DenseHermitian::new(a.matrix().scaled(1.0 / a.matrix().norm_fro())).expect("finite");

    let eps = 1e-8;
    let start = std::time::Instant::now();
    let e = hermitian_diagonalize(&a, eps).expect("eps above the precision floor");
    let secs = start.elapsed().as_secs_f64();

    let lam = Matrix::from_diag(&e.values).to_complex();
    let back = matmul(&matmul(&e.vectors, &lam).unwrap(), &e.vectors.adjoint()).unwrap();
    let residual = a.matrix().sub(&back).unwrap().norm_fro();
    let orth = matmul(&e.vectors.adjoint(), &e.vectors).unwrap().minus_identity().norm_fro();
    println!("n = {n}, {secs:.2} s");
    println!("λ_min = {:.6}, λ_max = {:.6}", e.values[0], e.values[n - 1]);
    println!("‖A − QΛQ*‖_F = {residual:.2e} (bound {:.2e})", e.backward_bound);
    println!("‖Q*Q − I‖_F  = {orth:.2e} (bound {:.2e})", e.orth_bound);
}
