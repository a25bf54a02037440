use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Image,
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` from the recursive residual.
    pub relative_residual: f64,
}

/// Conjugate gradients for a symmetric positive-definite operator given as a
/// procedure. Stops once `‖b − Ax‖ ≤ tol·‖b‖` or after `max_iters` steps.
pub fn cg_solve(
    a: impl Fn(&Image) -> Result<Image>,
    b: &Image,
    x0: &Image,
    tol: f64,
    max_iters: usize,
) -> Result<CgOutcome> {
    x0.ensure_dims(b.dims())?;
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(CgOutcome { x: Image::zeros(b.dims()), iterations: 0, relative_residual: 0.0 });
    }
    let mut x = x0.clone();
    let mut r = b.sub(&a(&x)?);
    let mut rr = r.norm_sq();
    if !rr.is_finite() {
        return Err(Error::CgBreakdown { iterations: 0, reason: "non-finite initial residual" });
    }
    let threshold = tol * b_norm;
    if rr.sqrt() <= threshold {
        return Ok(CgOutcome { x, iterations: 0, relative_residual: rr.sqrt() / b_norm });
    }

    let mut p = r.clone();
    for it in 1..=max_iters {
        let ap = a(&p)?;
        ap.ensure_dims(b.dims())?;
        let curvature = p.dot(&ap);
        if !curvature.is_finite() {
            return Err(Error::CgBreakdown { iterations: it, reason: "non-finite curvature" });
        }
        if curvature <= 0.0 {
            return Err(Error::CgBreakdown { iterations: it, reason: "operator is not positive definite" });
        }
        let step = rr / curvature;
        x.axpy(step, &p);
        r.axpy(-step, &ap);
        let rr_next = r.norm_sq();
        if !rr_next.is_finite() {
            return Err(Error::CgBreakdown { iterations: it, reason: "non-finite residual" });
        }
        if rr_next.sqrt() <= threshold {
            return Ok(CgOutcome { x, iterations: it, relative_residual: rr_next.sqrt() / b_norm });
        }
        p = r.lin_comb(1.0, &p, rr_next / rr);
        rr = rr_next;
    }
    Ok(CgOutcome { x, iterations: max_iters, relative_residual: rr.sqrt() / b_norm })
}
