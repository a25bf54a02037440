//! 2D DFT helpers and Fourier symbols of block-circulant operators.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::image::{Dims, Image, Kernel};

/// Precomputed row/column plans for a fixed grid size.
#[derive(Clone)]
pub struct Fft2 {
    dims: Dims,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2").field("dims", &self.dims).finish()
    }
}

impl Fft2 {
    pub fn new(dims: Dims) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            dims,
            row_fwd: planner.plan_fft_forward(dims.width),
            row_inv: planner.plan_fft_inverse(dims.width),
            col_fwd: planner.plan_fft_forward(dims.height),
            col_inv: planner.plan_fft_inverse(dims.height),
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Unnormalized forward transform of a real image.
    pub fn forward(&self, x: &Image) -> Vec<Complex64> {
        debug_assert_eq!(x.dims(), self.dims);
        let mut buf: Vec<Complex64> = x.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &*self.row_fwd, &*self.col_fwd);
        buf
    }

    /// Inverse transform (normalized by `1/N`) keeping the real part.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Image {
        self.transform(&mut spectrum, &*self.row_inv, &*self.col_inv);
        let scale = 1.0 / self.dims.len() as f64;
        Image::from_raw(self.dims, spectrum.iter().map(|c| c.re * scale).collect())
    }

    fn transform(&self, buf: &mut [Complex64], rows: &dyn Fft<f64>, cols: &dyn Fft<f64>) {
        let Dims { width: w, height: h } = self.dims;
        rows.process(buf);
        let mut t = transpose(buf, w, h);
        cols.process(&mut t);
        buf.copy_from_slice(&transpose(&t, h, w));
    }
}

/// Transposes a row-major `rows x cols` buffer, where each row has `cols` entries.
fn transpose(buf: &[Complex64], cols: usize, rows: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); buf.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = buf[r * cols + c];
        }
    }
    out
}

/// Eigenvalues of a block-circulant operator: `H x = IDFT(symbol · DFT(x))`.
#[derive(Clone, Debug)]
pub struct Symbol {
    fft: Fft2,
    coeffs: Vec<Complex64>,
}

impl Symbol {
    /// DFT of the kernel zero-padded to `dims` with its center moved to the origin.
    pub fn of_kernel(kernel: &Kernel, dims: Dims) -> Self {
        let r = kernel.radius() as isize;
        let (w, h) = (dims.width as isize, dims.height as isize);
        let mut padded = vec![0.0; dims.len()];
        for a in 0..kernel.size() {
            for b in 0..kernel.size() {
                let row = (a as isize - r).rem_euclid(h) as usize;
                let col = (b as isize - r).rem_euclid(w) as usize;
                padded[row * dims.width + col] += kernel.tap(a, b);
            }
        }
        let fft = Fft2::new(dims);
        let coeffs = fft.forward(&Image::from_raw(dims, padded));
        Symbol { fft, coeffs }
    }

    pub fn dims(&self) -> Dims {
        self.fft.dims()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    /// Elementwise product, the symbol of the composed operator.
    pub fn product(&self, other: &Symbol) -> Option<Symbol> {
        if self.dims() != other.dims() {
            return None;
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).collect();
        Some(Symbol { fft: self.fft.clone(), coeffs })
    }

    pub fn apply(&self, x: &Image) -> Image {
        let mut spec = self.fft.forward(x);
        for (s, c) in spec.iter_mut().zip(&self.coeffs) {
            *s *= c;
        }
        self.fft.inverse_real(spec)
    }

    pub fn apply_adjoint(&self, x: &Image) -> Image {
        let mut spec = self.fft.forward(x);
        for (s, c) in spec.iter_mut().zip(&self.coeffs) {
            *s *= c.conj();
        }
        self.fft.inverse_real(spec)
    }

    /// Solves `(scale·HᵀH + shift·I) x = rhs` exactly.
    pub fn solve_gram(&self, rhs: &Image, scale: f64, shift: f64) -> Image {
        let mut spec = self.fft.forward(rhs);
        for (s, c) in spec.iter_mut().zip(&self.coeffs) {
            *s /= scale * c.norm_sqr() + shift;
        }
        self.fft.inverse_real(spec)
    }
}
