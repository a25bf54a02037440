//! Grayscale images, convolution kernels, quality metrics and file I/O.

mod kernel;
mod metrics;
mod noise;
mod pgm;

use std::fmt;

use crate::error::{Error, Result};

pub use kernel::Kernel;
pub use metrics::{mse, psnr, PEAK};
pub use noise::add_gaussian_noise;
pub use pgm::{decode_pgm, encode_pgm, load_pgm, save_pgm};

/// Width and height of an image, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
}

impl Dims {
    pub const fn new(width: usize, height: usize) -> Self {
        Dims { width, height }
    }

    pub const fn len(&self) -> usize {
        self.width * self.height
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Row-major grid of real intensities.
///
/// Intensities follow the `[0, 255]` convention but iterates are free to leave
/// that range; clamping only happens when writing to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    dims: Dims,
    data: Vec<f64>,
}

impl Image {
    /// Builds an image from row-major samples.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let dims = Dims::new(width, height);
        if dims.is_empty() {
            return Err(Error::invalid(format!("image dimensions must be positive, got {dims}")));
        }
        if data.len() != dims.len() {
            return Err(Error::invalid(format!("{dims} image needs {} samples, got {}", dims.len(), data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Image { dims, data })
    }

    pub fn zeros(dims: Dims) -> Self {
        Self::filled(dims, 0.0)
    }

    pub fn filled(dims: Dims, value: f64) -> Self {
        assert!(!dims.is_empty(), "image dimensions must be positive");
        assert!(value.is_finite());
        Image { dims, data: vec![value; dims.len()] }
    }

    /// Builds an image by evaluating `f(col, row)` at every pixel.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.len());
        for row in 0..dims.height {
            for col in 0..dims.width {
                data.push(f(col, row));
            }
        }
        Image::new(dims.width, dims.height, data)
    }

    /// Internal constructor for buffers produced by arithmetic on valid images.
    pub(crate) fn from_raw(dims: Dims, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dims.len());
        Image { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.dims.width + col]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn ensure_dims(&self, expected: Dims) -> Result<()> {
        if self.dims != expected {
            return Err(Error::DimensionMismatch { expected, found: self.dims });
        }
        Ok(())
    }

    pub fn dot(&self, other: &Image) -> f64 {
        assert_eq!(self.dims, other.dims, "dot product of mismatched images");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        Image::from_raw(self.dims, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, s: f64) -> Image {
        self.map(|v| s * v)
    }

    /// `a·self + b·other`
    pub fn lin_comb(&self, a: f64, other: &Image, b: f64) -> Image {
        assert_eq!(self.dims, other.dims, "linear combination of mismatched images");
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        Image::from_raw(self.dims, data)
    }

    pub fn add(&self, other: &Image) -> Image {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Image) -> Image {
        self.lin_comb(1.0, other, -1.0)
    }

    /// `self += s·other`
    pub fn axpy(&mut self, s: f64, other: &Image) {
        assert_eq!(self.dims, other.dims, "axpy on mismatched images");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn distance(&self, other: &Image) -> f64 {
        assert_eq!(self.dims, other.dims);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// Pixel-replicating upscale by an integer factor.
    pub fn upscale_nearest(&self, factor: usize) -> Result<Image> {
        if factor == 0 {
            return Err(Error::invalid("upscale factor must be positive"));
        }
        let dims = Dims::new(self.dims.width * factor, self.dims.height * factor);
        Image::from_fn(dims, |c, r| self.get(c / factor, r / factor))
    }
}
