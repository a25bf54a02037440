//! Matrix-free linear forward models with exact adjoints.

mod blur;
mod decimation;
pub mod fourier;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::image::{Dims, Image};

pub use blur::{convolve_periodic, make_blur, Blur};
pub use decimation::{make_decimation, Decimation};
pub use fourier::{Fft2, Symbol};

/// A linear map `H` between image spaces together with its adjoint `Hᵀ`.
///
/// Implementors provide [`forward`](Self::forward) and
/// [`adjoint`](Self::adjoint) assuming correctly shaped input; callers go
/// through [`apply`](Self::apply) / [`adjoint_apply`](Self::adjoint_apply),
/// which check shapes first.
pub trait LinearOperator: Send + Sync + fmt::Debug {
    fn input_dims(&self) -> Dims;
    fn output_dims(&self) -> Dims;

    fn forward(&self, x: &Image) -> Image;
    fn adjoint(&self, y: &Image) -> Image;

    /// Present iff the operator is block-circulant on a square system.
    fn circulant_symbol(&self) -> Option<&Symbol> {
        None
    }

    fn apply(&self, x: &Image) -> Result<Image> {
        x.ensure_dims(self.input_dims())?;
        Ok(self.forward(x))
    }

    fn adjoint_apply(&self, y: &Image) -> Result<Image> {
        y.ensure_dims(self.output_dims())?;
        Ok(self.adjoint(y))
    }
}

/// Shared handle to a forward model.
pub type Operator = Arc<dyn LinearOperator>;

#[derive(Debug, Clone)]
pub struct Identity {
    dims: Dims,
}

impl Identity {
    pub fn new(dims: Dims) -> Self {
        Identity { dims }
    }
}

impl LinearOperator for Identity {
    fn input_dims(&self) -> Dims {
        self.dims
    }

    fn output_dims(&self) -> Dims {
        self.dims
    }

    fn forward(&self, x: &Image) -> Image {
        x.clone()
    }

    fn adjoint(&self, y: &Image) -> Image {
        y.clone()
    }
}

/// `outer ∘ inner`
#[derive(Debug, Clone)]
pub struct Composition {
    outer: Operator,
    inner: Operator,
    symbol: Option<Symbol>,
}

pub fn compose(outer: Operator, inner: Operator) -> Result<Composition> {
    if inner.output_dims() != outer.input_dims() {
        return Err(Error::DimensionMismatch { expected: outer.input_dims(), found: inner.output_dims() });
    }
    let symbol = match (outer.circulant_symbol(), inner.circulant_symbol()) {
        (Some(a), Some(b)) => a.product(b),
        _ => None,
    };
    Ok(Composition { outer, inner, symbol })
}

impl LinearOperator for Composition {
    fn input_dims(&self) -> Dims {
        self.inner.input_dims()
    }

    fn output_dims(&self) -> Dims {
        self.outer.output_dims()
    }

    fn forward(&self, x: &Image) -> Image {
        self.outer.forward(&self.inner.forward(x))
    }

    fn adjoint(&self, y: &Image) -> Image {
        self.inner.adjoint(&self.outer.adjoint(y))
    }

    fn circulant_symbol(&self) -> Option<&Symbol> {
        self.symbol.as_ref()
    }
}

/// `scale·Hᵀ(H x) + extra_diagonal·x`
pub fn gram_apply(h: &dyn LinearOperator, extra_diagonal: f64, scale: f64, x: &Image) -> Result<Image> {
    let hx = h.apply(x)?;
    let mut out = h.adjoint(&hx).scaled(scale);
    if extra_diagonal != 0.0 {
        out.axpy(extra_diagonal, x);
    }
    Ok(out)
}
