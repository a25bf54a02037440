//! Weightings `B = τI ± uuᵀ` and the SR1 update that builds them.
//!
//! The SR1 update seeds with `H₀ = τI`, `τ = γ‖m‖²/⟨s, m⟩`, and adds the
//! rank-one correction `(m − H₀s)(m − H₀s)ᵀ / ⟨m − H₀s, s⟩`. For `γ > 1` the
//! denominator is negative whenever `⟨s, m⟩ > 0`, so the correction is
//! subtracted. We store it as `u = (m − H₀s)/√|⟨m − H₀s, s⟩|` with an explicit
//! sign. The result satisfies the secant condition `B s = m` and stays
//! positive definite, with smallest eigenvalue
//! `(γ − 1)‖m‖² / (τ‖s‖² − ⟨s, m⟩)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankOneSign {
    Positive,
    Negative,
}

impl RankOneSign {
    pub fn factor(self) -> f64 {
        match self {
            RankOneSign::Positive => 1.0,
            RankOneSign::Negative => -1.0,
        }
    }
}

/// Symmetric positive-definite weighting `τI + sign·uuᵀ`, applied matrix-free.
#[derive(Debug, Clone, PartialEq)]
pub struct Weighting {
    tau: f64,
    rank_one: Option<(Image, RankOneSign)>,
}

impl Weighting {
    pub fn scaled_identity(tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::invalid(format!("weighting scale must be positive, got {tau}")));
        }
        Ok(Weighting { tau, rank_one: None })
    }

    /// `τI + sign·uuᵀ`; rejects weightings that are not positive definite.
    pub fn with_rank_one(tau: f64, u: Image, sign: RankOneSign) -> Result<Self> {
        let w = Weighting { rank_one: Some((u, sign)), ..Self::scaled_identity(tau)? };
        if !w.rank_one.as_ref().is_some_and(|(u, _)| u.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(w.min_eigenvalue() > 0.0) {
            return Err(Error::invalid("weighting is not positive definite"));
        }
        Ok(w)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn rank_one(&self) -> Option<(&Image, RankOneSign)> {
        self.rank_one.as_ref().map(|(u, s)| (u, *s))
    }

    /// `B v`
    pub fn apply(&self, v: &Image) -> Image {
        match &self.rank_one {
            None => v.scaled(self.tau),
            Some((u, sign)) => v.lin_comb(self.tau, u, sign.factor() * u.dot(v)),
        }
    }

    /// Smallest eigenvalue of `B`.
    pub fn min_eigenvalue(&self) -> f64 {
        match &self.rank_one {
            Some((u, RankOneSign::Negative)) => self.tau - u.norm_sq(),
            _ => self.tau,
        }
    }

    pub fn max_eigenvalue(&self) -> f64 {
        match &self.rank_one {
            Some((u, RankOneSign::Positive)) => self.tau + u.norm_sq(),
            _ => self.tau,
        }
    }
}

/// Why an SR1 update fell back to `αI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sr1Fallback {
    /// `⟨s, m⟩ < 0`, so the seed scale `τ` is negative.
    NegativeCurvature,
    /// `⟨s, m⟩` is zero or not finite (e.g. a stalled iterate).
    DegenerateCurvature,
    /// Rounding destroyed positive definiteness of the corrected weighting.
    NotPositiveDefinite,
}

impl fmt::Display for Sr1Fallback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sr1Fallback::NegativeCurvature => "negative curvature",
            Sr1Fallback::DegenerateCurvature => "degenerate curvature",
            Sr1Fallback::NotPositiveDefinite => "not positive definite",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Sr1Update {
    pub weighting: Weighting,
    pub fallback: Option<Sr1Fallback>,
}

/// SR1 weighting for outer iteration `k` (1-based) from the last two iterates
/// and their prior gradients.
#[allow(clippy::too_many_arguments)]
pub fn sr1_weighting(
    k: usize,
    x_k: &Image,
    x_km1: &Image,
    grad_k: &Image,
    grad_km1: &Image,
    alpha: f64,
    gamma: f64,
    delta: f64,
) -> Result<Sr1Update> {
    if k == 0 {
        return Err(Error::invalid("SR1 iteration index is 1-based"));
    }
    if !(gamma > 1.0) {
        return Err(Error::invalid(format!("gamma must exceed 1, got {gamma}")));
    }
    let identity = Weighting::scaled_identity(alpha)?;
    let fallback = |reason| Ok(Sr1Update { weighting: identity.clone(), fallback: Some(reason) });
    if k == 1 {
        return Ok(Sr1Update { weighting: identity, fallback: None });
    }

    let s = x_k.sub(x_km1);
    let m = grad_k.sub(grad_km1);
    let sm = s.dot(&m);
    if sm == 0.0 || !sm.is_finite() {
        return fallback(Sr1Fallback::DegenerateCurvature);
    }
    let tau = gamma * m.norm_sq() / sm;
    if tau < 0.0 {
        return fallback(Sr1Fallback::NegativeCurvature);
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return fallback(Sr1Fallback::DegenerateCurvature);
    }

    // v = m − H₀s
    let v = m.lin_comb(1.0, &s, -tau);
    let vs = v.dot(&s);
    if vs.abs() <= delta * s.norm() * v.norm() {
        return Ok(Sr1Update { weighting: Weighting::scaled_identity(tau)?, fallback: None });
    }
    let sign = if vs > 0.0 { RankOneSign::Positive } else { RankOneSign::Negative };
    let u = v.scaled(1.0 / vs.abs().sqrt());
    match Weighting::with_rank_one(tau, u, sign) {
        Ok(weighting) => Ok(Sr1Update { weighting, fallback: None }),
        Err(_) => fallback(Sr1Fallback::NotPositiveDefinite),
    }
}
