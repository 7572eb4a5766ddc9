use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Draws `n` normal variates with a ChaCha8 stream keyed by `seed`.
pub fn gaussian_samples(mean: f64, stdev: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(stdev >= 0.0) || !stdev.is_finite() || !mean.is_finite() {
        return Err(Error::Domain(format!("invalid normal law N({mean}, {stdev}^2)")));
    }
    if n == 0 {
        return Err(Error::Argument("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            mean + stdev * z
        })
        .collect())
}
