use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use super::Image;
use crate::error::{Error, Result};

/// Adds i.i.d. `N(0, sigma²)` noise to every pixel. The seed fully determines
/// the draw.
pub fn add_gaussian_noise(x: &Image, sigma: f64, seed: u64) -> Result<Image> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("noise sigma must be non-negative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok(x.map(|v| v + normal.sample(&mut rng)))
}
