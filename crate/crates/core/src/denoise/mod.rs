//! Counted denoiser boundary, bundled linear smoothing denoisers and runtime
//! checks of local homogeneity and Jacobian passivity.

mod assumptions;
mod external;

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::image::{Image, Kernel};
use crate::ops::convolve_periodic;

pub use assumptions::{default_fd_step, homogeneity_residual, jacobian_spectral_radius_estimate};
pub use external::ExternalProcess;

/// A denoising procedure `f: image -> image` of the same shape.
///
/// Plugins do not count their own calls; wrap them in a [`Denoiser`].
pub trait DenoiserPlugin: Send + Sync {
    fn name(&self) -> &str;

    fn apply(&self, x: &Image, noise_level_hint: Option<f64>) -> Result<Image>;
}

/// Adapts a closure into a [`DenoiserPlugin`].
pub struct FnPlugin<F> {
    name: &'static str,
    f: F,
}

impl<F> FnPlugin<F>
where
    F: Fn(&Image) -> Image + Send + Sync,
{
    pub fn new(name: &'static str, f: F) -> Self {
        FnPlugin { name, f }
    }
}

impl<F> DenoiserPlugin for FnPlugin<F>
where
    F: Fn(&Image) -> Image + Send + Sync,
{
    fn name(&self) -> &str {
        self.name
    }

    fn apply(&self, x: &Image, _: Option<f64>) -> Result<Image> {
        Ok((self.f)(x))
    }
}

/// Counted wrapper around a [`DenoiserPlugin`].
///
/// Every successful or failed call to [`denoise`](Self::denoise) increments
/// the evaluation counter by exactly one.
pub struct Denoiser {
    plugin: Box<dyn DenoiserPlugin>,
    evals: AtomicU64,
    noise_level_hint: Option<f64>,
}

impl std::fmt::Debug for Denoiser {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Denoiser")
            .field("plugin", &self.plugin.name())
            .field("evals", &self.eval_count())
            .field("noise_level_hint", &self.noise_level_hint)
            .finish()
    }
}

impl Denoiser {
    pub fn new(plugin: impl DenoiserPlugin + 'static) -> Self {
        Denoiser { plugin: Box::new(plugin), evals: AtomicU64::new(0), noise_level_hint: None }
    }

    pub fn with_noise_level_hint(mut self, hint: f64) -> Result<Self> {
        if !(hint > 0.0) || !hint.is_finite() {
            return Err(Error::invalid(format!("noise level hint must be positive, got {hint}")));
        }
        self.noise_level_hint = Some(hint);
        Ok(self)
    }

    /// Wraps a closure, mostly useful for tests and experiments.
    pub fn from_fn(name: &'static str, f: impl Fn(&Image) -> Image + Send + Sync + 'static) -> Self {
        Denoiser::new(FnPlugin::new(name, f))
    }

    pub fn gaussian(size: usize, std: f64) -> Result<Self> {
        Ok(Denoiser::new(GaussianFilter::new(size, std)?))
    }

    pub fn name(&self) -> &str {
        self.plugin.name()
    }

    pub fn noise_level_hint(&self) -> Option<f64> {
        self.noise_level_hint
    }

    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn denoise(&self, x: &Image) -> Result<Image> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        let out = self.plugin.apply(x, self.noise_level_hint)?;
        if out.dims() != x.dims() {
            return Err(Error::Denoiser {
                name: self.name().to_owned(),
                reason: format!("returned {} output for {} input", out.dims(), x.dims()),
            });
        }
        if !out.is_finite() {
            return Err(Error::Denoiser { name: self.name().to_owned(), reason: "returned non-finite values".into() });
        }
        Ok(out)
    }
}

/// Linear smoothing with a normalized Gaussian kernel and periodic boundary.
///
/// The Jacobian is the symmetric circulant matrix of the kernel, so the
/// denoiser is exactly homogeneous and its spectral radius is at most one.
#[derive(Debug, Clone)]
pub struct GaussianFilter {
    kernel: Kernel,
}

impl GaussianFilter {
    pub fn new(size: usize, std: f64) -> Result<Self> {
        Ok(GaussianFilter { kernel: Kernel::gaussian(size, std)? })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
}

impl DenoiserPlugin for GaussianFilter {
    fn name(&self) -> &str {
        "gaussian"
    }

    fn apply(&self, x: &Image, _: Option<f64>) -> Result<Image> {
        convolve_periodic(x, &self.kernel)
    }
}

/// Linear box (moving-average) smoothing with periodic boundary.
#[derive(Debug, Clone)]
pub struct BoxFilter {
    kernel: Kernel,
}

impl BoxFilter {
    pub fn new(size: usize) -> Result<Self> {
        Ok(BoxFilter { kernel: Kernel::uniform(size)? })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
}

impl DenoiserPlugin for BoxFilter {
    fn name(&self) -> &str {
        "box"
    }

    fn apply(&self, x: &Image, _: Option<f64>) -> Result<Image> {
        convolve_periodic(x, &self.kernel)
    }
}
