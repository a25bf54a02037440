use super::fourier::Symbol;
use super::LinearOperator;
use crate::error::{Error, Result};
use crate::image::{Dims, Image, Kernel};

/// `out[r][c] += weight · x[(r + dr) mod h][(c + dc) mod w]`
fn shift_accumulate(out: &mut [f64], x: &[f64], dims: Dims, dr: isize, dc: isize, weight: f64) {
    let Dims { width: w, height: h } = dims;
    let split = dc.rem_euclid(w as isize) as usize;
    for r in 0..h {
        let src_r = (r as isize + dr).rem_euclid(h as isize) as usize;
        let src = &x[src_r * w..(src_r + 1) * w];
        let dst = &mut out[r * w..(r + 1) * w];
        let (head, tail) = dst.split_at_mut(w - split);
        for (d, s) in head.iter_mut().zip(&src[split..]) {
            *d += weight * s;
        }
        for (d, s) in tail.iter_mut().zip(&src[..split]) {
            *d += weight * s;
        }
    }
}

fn check_fits(kernel: &Kernel, dims: Dims) -> Result<()> {
    if kernel.size() > dims.width.min(dims.height) {
        return Err(Error::invalid(format!("{0}x{0} kernel does not fit a {dims} image", kernel.size())));
    }
    Ok(())
}

fn convolve(x: &Image, kernel: &Kernel, adjoint: bool) -> Image {
    let dims = x.dims();
    let r = kernel.radius() as isize;
    let mut out = vec![0.0; dims.len()];
    for a in 0..kernel.size() {
        for b in 0..kernel.size() {
            let tap = kernel.tap(a, b);
            if tap == 0.0 {
                continue;
            }
            let (dr, dc) = (r - a as isize, r - b as isize);
            if adjoint {
                shift_accumulate(&mut out, x.data(), dims, -dr, -dc, tap);
            } else {
                shift_accumulate(&mut out, x.data(), dims, dr, dc, tap);
            }
        }
    }
    Image::from_raw(dims, out)
}

/// Circular 2D convolution of `x` with `kernel`, in the spatial domain.
pub fn convolve_periodic(x: &Image, kernel: &Kernel) -> Result<Image> {
    check_fits(kernel, x.dims())?;
    Ok(convolve(x, kernel, false))
}

/// Periodic-boundary blur `H x = k ⊛ x`.
#[derive(Debug, Clone)]
pub struct Blur {
    kernel: Kernel,
    dims: Dims,
    symbol: Symbol,
}

impl Blur {
    pub fn new(kernel: Kernel, dims: Dims) -> Result<Self> {
        check_fits(&kernel, dims)?;
        let symbol = Symbol::of_kernel(&kernel, dims);
        Ok(Blur { kernel, dims, symbol })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
}

pub fn make_blur(kernel: Kernel, dims: Dims) -> Result<Blur> {
    Blur::new(kernel, dims)
}

impl LinearOperator for Blur {
    fn input_dims(&self) -> Dims {
        self.dims
    }

    fn output_dims(&self) -> Dims {
        self.dims
    }

    fn forward(&self, x: &Image) -> Image {
        convolve(x, &self.kernel, false)
    }

    fn adjoint(&self, y: &Image) -> Image {
        convolve(y, &self.kernel, true)
    }

    fn circulant_symbol(&self) -> Option<&Symbol> {
        Some(&self.symbol)
    }
}
