use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Samples an `n×n` matrix with iid `Normal(0, σ²)` real and imaginary parts.
///
/// Generator: ChaCha8 (`rand_chacha` 0.9) seeded with `seed_from_u64(seed)`.
/// Unit normals are drawn row-major, real part before imaginary part, then
/// scaled by `sigma`, so a given seed yields the same pattern at every `sigma`.
pub fn sample_ginibre(n: usize, sigma: f64, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(sigma * re, sigma * im)
        })
        .collect();
    ComplexMatrix::from_row_major(n, data)
}

/// Ginibre matrix with `σ = 1/√(2N)`, whose eigenvalues fill the unit disc for large `N`.
pub fn ginibre_standard(n: usize, seed: u64) -> Result<ComplexMatrix> {
    sample_ginibre(n, 1.0 / (2.0 * n as f64).sqrt(), seed)
}

/// SplitMix64 finalizer, used to derive well-separated per-item seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
