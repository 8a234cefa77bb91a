//! Seeded random Hermitian matrices and metrics.
//!
//! `A = B + B*` with `B` uniform in the complex unit square, and metrics
//! `A + (|λ_min(A)| + 1) I`. Every consumer gets its own ChaCha stream so
//! results do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::form_algebra::{HermitianMatrix, Metric};
use crate::C64;

pub type SampleRng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    let b: Vec<C64> = (0..n * n)
        .map(|_| C64::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    HermitianMatrix::from_fn(n, |i, j| b[i * n + j] + b[j * n + i].conj()).expect("valid dimension")
}

pub fn random_metric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Metric {
    let a = random_hermitian(n, rng);
    let shift = a.min_eigenvalue().abs() + 1.0;
    Metric::new(&a + &HermitianMatrix::identity(n).scale(shift))
        .expect("shifted matrix is positive definite")
}

/// Vector of `len` values uniform in `[lo, hi)`.
pub fn uniform_vec<R: Rng + ?Sized>(len: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(lo..hi)).collect()
}
