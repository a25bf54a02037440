use super::LinearOperator;
use crate::error::{Error, Result};
use crate::image::{Dims, Image};

/// Keeps every `factor`-th pixel along both axes, starting at `offset`.
#[derive(Debug, Clone)]
pub struct Decimation {
    factor: usize,
    offset: usize,
    hi: Dims,
    lo: Dims,
}

impl Decimation {
    pub fn new(factor: usize, hi: Dims) -> Result<Self> {
        Self::with_offset(factor, 0, hi)
    }

    /// `offset` is the sampling phase, `0 <= offset < factor`.
    pub fn with_offset(factor: usize, offset: usize, hi: Dims) -> Result<Self> {
        if factor == 0 {
            return Err(Error::invalid("decimation factor must be positive"));
        }
        if offset >= factor {
            return Err(Error::invalid(format!("decimation offset {offset} must be below factor {factor}")));
        }
        if hi.is_empty() || !hi.width.is_multiple_of(factor) || !hi.height.is_multiple_of(factor) {
            return Err(Error::invalid(format!("{hi} image is not divisible by factor {factor}")));
        }
        let lo = Dims::new(hi.width / factor, hi.height / factor);
        Ok(Decimation { factor, offset, hi, lo })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }
}

pub fn make_decimation(factor: usize, hi_dims: Dims) -> Result<Decimation> {
    Decimation::new(factor, hi_dims)
}

impl LinearOperator for Decimation {
    fn input_dims(&self) -> Dims {
        self.hi
    }

    fn output_dims(&self) -> Dims {
        self.lo
    }

    fn forward(&self, x: &Image) -> Image {
        let (f, o) = (self.factor, self.offset);
        let mut out = Vec::with_capacity(self.lo.len());
        for r in 0..self.lo.height {
            for c in 0..self.lo.width {
                out.push(x.get(c * f + o, r * f + o));
            }
        }
        Image::from_raw(self.lo, out)
    }

    fn adjoint(&self, y: &Image) -> Image {
        let (f, o) = (self.factor, self.offset);
        let mut out = vec![0.0; self.hi.len()];
        for r in 0..self.lo.height {
            for c in 0..self.lo.width {
                out[(r * f + o) * self.hi.width + c * f + o] = y.get(c, r);
            }
        }
        Image::from_raw(self.hi, out)
    }
}
