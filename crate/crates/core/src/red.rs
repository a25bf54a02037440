//! The RED objective `E(x) = ‖Hx − y‖²/(2σ²) + (α/2)⟨x, x − f(x)⟩` and its
//! residual-based gradient.
//!
//! Every method that touches the prior calls the denoiser exactly once. The
//! fused [`RedProblem::evaluate`] shares that single call between the value
//! and the gradient at the same point.

use std::sync::Arc;

use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::image::{Dims, Image};
use crate::ops::Operator;

#[derive(Debug, Clone)]
pub struct RedProblem {
    op: Operator,
    y: Image,
    sigma: f64,
    alpha: f64,
    denoiser: Arc<Denoiser>,
    hty: Image,
}

/// Value and prior gradient at one point, from a single denoiser call.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub denoised: Image,
    pub objective: f64,
    /// `α(x − f(x))`
    pub prior_gradient: Image,
}

impl RedProblem {
    pub fn new(op: Operator, y: Image, sigma: f64, alpha: f64, denoiser: Arc<Denoiser>) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        let hty = op.adjoint_apply(&y)?;
        Ok(RedProblem { op, y, sigma, alpha, denoiser, hty })
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn measurement(&self) -> &Image {
        &self.y
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn denoiser(&self) -> &Arc<Denoiser> {
        &self.denoiser
    }

    /// Shape of the unknown `x`.
    pub fn dims(&self) -> Dims {
        self.op.input_dims()
    }

    /// `1/σ²`
    pub fn data_weight(&self) -> f64 {
        1.0 / (self.sigma * self.sigma)
    }

    /// `Hᵀy`, precomputed.
    pub fn adjoint_measurement(&self) -> &Image {
        &self.hty
    }

    /// `‖Hx − y‖²/(2σ²)`; no denoiser call.
    pub fn data_misfit(&self, x: &Image) -> Result<f64> {
        let r = self.op.apply(x)?.sub(&self.y);
        Ok(0.5 * self.data_weight() * r.norm_sq())
    }

    /// `Hᵀ(Hx − y)/σ²`; no denoiser call.
    pub fn data_gradient(&self, x: &Image) -> Result<Image> {
        let hx = self.op.apply(x)?;
        Ok(self.op.adjoint(&hx.sub(&self.y)).scaled(self.data_weight()))
    }

    fn denoise_at(&self, x: &Image) -> Result<Image> {
        x.ensure_dims(self.dims())?;
        self.denoiser.denoise(x)
    }

    /// `½⟨x, x − f(x)⟩`
    pub fn prior_value(&self, x: &Image) -> Result<f64> {
        let fx = self.denoise_at(x)?;
        Ok(prior_from(x, &fx))
    }

    pub fn objective(&self, x: &Image) -> Result<f64> {
        let fx = self.denoise_at(x)?;
        self.objective_with(x, &fx)
    }

    /// `α(x − f(x))`, the gradient of the weighted prior.
    pub fn prior_gradient(&self, x: &Image) -> Result<Image> {
        let fx = self.denoise_at(x)?;
        Ok(self.prior_gradient_with(x, &fx))
    }

    /// `Hᵀ(Hx − y)/σ² + α(x − f(x))`
    pub fn gradient(&self, x: &Image) -> Result<Image> {
        let fx = self.denoise_at(x)?;
        Ok(self.data_gradient(x)?.add(&self.prior_gradient_with(x, &fx)))
    }

    /// Objective and prior gradient at `x` from one denoiser call.
    pub fn evaluate(&self, x: &Image) -> Result<Evaluation> {
        let denoised = self.denoise_at(x)?;
        let objective = self.objective_with(x, &denoised)?;
        let prior_gradient = self.prior_gradient_with(x, &denoised);
        Ok(Evaluation { denoised, objective, prior_gradient })
    }

    /// `(E(x), ∇E(x))` from one denoiser call.
    pub fn value_and_gradient(&self, x: &Image) -> Result<(f64, Image)> {
        let eval = self.evaluate(x)?;
        let grad = self.data_gradient(x)?.add(&eval.prior_gradient);
        Ok((eval.objective, grad))
    }

    pub(crate) fn objective_with(&self, x: &Image, fx: &Image) -> Result<f64> {
        Ok(self.data_misfit(x)? + self.alpha * prior_from(x, fx))
    }

    pub(crate) fn prior_gradient_with(&self, x: &Image, fx: &Image) -> Image {
        x.lin_comb(self.alpha, fx, -self.alpha)
    }
}

fn prior_from(x: &Image, fx: &Image) -> f64 {
    0.5 * x.dot(&x.sub(fx))
}
