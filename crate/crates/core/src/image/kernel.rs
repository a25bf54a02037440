use crate::error::{Error, Result};

/// Normalized square convolution kernel with odd support.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    taps: Vec<f64>,
}

const NORMALIZATION_TOL: f64 = 1e-12;

impl Kernel {
    /// Builds a kernel from row-major taps. The taps must already sum to one.
    pub fn from_taps(size: usize, taps: Vec<f64>) -> Result<Self> {
        check_size(size)?;
        if taps.len() != size * size {
            return Err(Error::invalid(format!("{size}x{size} kernel needs {} taps, got {}", size * size, taps.len())));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite);
        }
        let sum: f64 = taps.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!("kernel taps sum to {sum}, expected 1")));
        }
        Ok(Kernel { size, taps })
    }

    /// Sampled isotropic Gaussian, normalized to unit sum.
    pub fn gaussian(size: usize, std: f64) -> Result<Self> {
        check_size(size)?;
        if !(std > 0.0) || !std.is_finite() {
            return Err(Error::invalid(format!("gaussian std must be positive, got {std}")));
        }
        let c = (size / 2) as f64;
        let denom = 2.0 * std * std;
        let mut taps = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let (di, dj) = (i as f64 - c, j as f64 - c);
                taps.push((-(di * di + dj * dj) / denom).exp());
            }
        }
        Ok(Kernel { size, taps: normalize(taps) })
    }

    /// Box filter: every tap equals `1/size²`.
    pub fn uniform(size: usize) -> Result<Self> {
        check_size(size)?;
        let n = size * size;
        Ok(Kernel { size, taps: vec![1.0 / n as f64; n] })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Half-width of the support; the center tap sits at `(radius, radius)`.
    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn tap(&self, row: usize, col: usize) -> f64 {
        self.taps[row * self.size + col]
    }

    /// True when the kernel equals its 180° rotation.
    pub fn is_symmetric(&self) -> bool {
        let n = self.taps.len();
        (0..n).all(|i| self.taps[i] == self.taps[n - 1 - i])
    }
}

fn check_size(size: usize) -> Result<()> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::invalid(format!("kernel size must be odd and positive, got {size}")));
    }
    Ok(())
}

fn normalize(mut taps: Vec<f64>) -> Vec<f64> {
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}
