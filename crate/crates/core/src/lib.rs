//! Matrix-free solvers for regularization-by-denoising (RED) inverse problems.
//!
//! The crate is organised bottom-up:
//!
//! * [`image`] holds the pixel grid, convolution kernels, PSNR, noise and PGM I/O.
//! * [`ops`] provides forward models `H` (blur, decimation, composition) with
//!   exact adjoints and Fourier symbols for circulant operators.
//! * [`denoise`] defines the counted denoiser boundary and checks for local
//!   homogeneity and Jacobian passivity.
//! * [`red`] assembles the RED objective `E(x) = ‖Hx − y‖²/(2σ²) + (α/2)⟨x, x − f(x)⟩`
//!   and its gradient.
//! * [`solve`] contains the fixed-point, accelerated proximal gradient and
//!   weighted proximal (SR1) solvers, plus the conjugate-gradient inner solver.
//! * [`experiment`] drives degradations and solver comparisons for the CLI.

// `!(v > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod denoise;
pub mod error;
pub mod experiment;
pub mod image;
pub mod ops;
pub mod red;
pub mod solve;

pub use error::{Error, Result};
pub use image::{Dims, Image, Kernel};
