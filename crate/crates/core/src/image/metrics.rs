use super::Image;
use crate::error::Result;

/// Peak intensity used by [`psnr`].
pub const PEAK: f64 = 255.0;

/// Mean squared pixel difference.
pub fn mse(reference: &Image, test: &Image) -> Result<f64> {
    test.ensure_dims(reference.dims())?;
    let n = reference.data().len() as f64;
    let sse: f64 = reference.data().iter().zip(test.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sse / n)
}

/// Peak signal-to-noise ratio in dB with peak 255.
///
/// Returns `f64::INFINITY` when the images are identical.
pub fn psnr(reference: &Image, test: &Image) -> Result<f64> {
    let mse = mse(reference, test)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}
