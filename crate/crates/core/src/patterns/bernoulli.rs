use rand::Rng;

use crate::linalg::RngSeed;
use crate::pattern::{PatternError, SamplePattern};
use crate::weight::WeightMatrix;

/// Weights up to `1 + PROBABILITY_SLACK` are accepted as probability 1.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// `Ω ~ W`: each `(i, j)` is included independently with probability `W_ij`.
///
/// Draws one uniform per entry in row-major order, so the output depends only
/// on the seed and the weights.
pub fn sample_bernoulli(w: &WeightMatrix, seed: RngSeed) -> Result<SamplePattern, PatternError> {
    let max = w.max_entry();
    if max > 1.0 + PROBABILITY_SLACK {
        return Err(PatternError::Domain(format!(
            "largest weight {max} exceeds 1; clamp or rescale before sampling"
        )));
    }
    let (d1, d2) = w.shape();
    Ok(sample_with(d1, d2, |i, j| w.entry(i, j), seed))
}

pub(crate) fn sample_with(
    d1: usize,
    d2: usize,
    prob: impl Fn(usize, usize) -> f64,
    seed: RngSeed,
) -> SamplePattern {
    let mut rng = seed.rng();
    let mut pairs = Vec::new();
    for i in 0..d1 {
        for j in 0..d2 {
            let u: f64 = rng.random();
            if u < prob(i, j) {
                pairs.push((i, j));
            }
        }
    }
    SamplePattern::from_pairs(d1, d2, pairs).expect("row-major draws are unique and in range")
}
