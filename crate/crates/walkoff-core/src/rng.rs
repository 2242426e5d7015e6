//! Seeded randomness with stream derivation.
//!
//! Every stochastic routine in the crate draws from a ChaCha8 generator
//! derived from `(seed, stream)`. Independent work items (bootstrap
//! replicates, Monte Carlo trials, synthetic records) each get their own
//! stream, so results are identical no matter how the work is ordered or
//! parallelized.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` of the run seeded by `seed`.
pub fn derive_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard normal draw (Box–Muller).
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // gen::<f64>() is in [0,1); reflect to (0,1] so log never sees zero.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

/// Normal(mean, sd) truncated to be nonnegative, by rejection.
pub fn truncated_normal<R: Rng>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    loop {
        let x = mean + sd * standard_normal(rng);
        if x >= 0.0 {
            return x;
        }
    }
}

/// Exponential draw with the given mean (inverse CDF).
pub fn exponential<R: Rng>(rng: &mut R, mean: f64) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    -mean * libm::log(u)
}

/// First `k` elements of a seeded partial Fisher-Yates shuffle of `0..n`:
/// a uniform sample of `k` distinct indices.
pub fn sample_indices<R: Rng>(rng: &mut R, n: usize, k: usize) -> alloc::vec::Vec<usize> {
    let mut idx: alloc::vec::Vec<usize> = (0..n).collect();
    let k = k.min(n);
    for i in 0..k {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}
