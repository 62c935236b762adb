use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dense::DenseMatrix;
use super::LinalgError;

/// Seed for a ChaCha8 stream. Same seed, same stream, on every platform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        RngSeed(seed)
    }
}

/// `d1 × d2` matrix of i.i.d. `N(0, sigma²)` entries, filled row by row.
pub fn gaussian_matrix(
    d1: usize,
    d2: usize,
    sigma: f64,
    seed: RngSeed,
) -> Result<DenseMatrix, LinalgError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(LinalgError::InvalidArgument(format!(
            "noise level must be finite and nonnegative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(DenseMatrix::zeros(d1, d2));
    }
    let mut rng = seed.rng();
    let data = (0..d1 * d2)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect();
    DenseMatrix::from_row_major(d1, d2, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_gives_zeros() {
        let z = gaussian_matrix(3, 4, 0.0, RngSeed(1)).unwrap();
        assert_eq!(z, DenseMatrix::zeros(3, 4));
    }

    #[test]
    fn same_seed_same_bits() {
        let a = gaussian_matrix(5, 7, 1.3, RngSeed(42)).unwrap();
        let b = gaussian_matrix(5, 7, 1.3, RngSeed(42)).unwrap();
        let bits = |m: &DenseMatrix| m.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = gaussian_matrix(5, 7, 1.3, RngSeed(43)).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn moments_at_200() {
        let z = gaussian_matrix(200, 200, 1.0, RngSeed(7)).unwrap();
        let n = 40_000.0;
        let mean = z.as_slice().iter().sum::<f64>() / n;
        let var = z.as_slice().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn rejects_negative_sigma() {
        assert!(gaussian_matrix(2, 2, -1.0, RngSeed(0)).is_err());
        assert!(gaussian_matrix(2, 2, f64::NAN, RngSeed(0)).is_err());
    }
}
