//! Solvers for the RED objective.
//!
//! * [`run_fp`]: the fixed-point iteration that lags the denoiser.
//! * [`run_apg`]: FP steps with Nesterov momentum.
//! * [`run_wpm`]: weighted proximal steps with an SR1 weighting and a
//!   step-size safeguard.
//!
//! All three count cost in denoiser evaluations. The per-iteration charge is
//! one evaluation for FP and APG. WPM charges one evaluation at `x₀`
//! and one per trial step, because the evaluation at the new iterate also
//! supplies `f(x_{k+1})` to the next step. FP and APG need an extra,
//! uncharged evaluation per iteration to log the objective. It is reported in
//! [`SolverTrace::monitor_evals`] and excluded from the elapsed time.

mod cg;
mod fixed_point;
mod trace;
mod weighting;
mod wpm;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

pub use cg::{cg_solve, CgOutcome};
pub use fixed_point::{apg_next_t, fp_step, fp_step_using, run_apg, run_fp, LinearSolve};
pub use trace::{SolverEvent, SolverTrace, TerminationStatus, TraceRecord};
pub use weighting::{sr1_weighting, RankOneSign, Sr1Fallback, Sr1Update, Weighting};
pub use wpm::{run_wpm, wpm_step, wpm_step_with_denoised};

/// How WPM chooses `B_k` at each outer iteration.
#[derive(Debug, Clone, Default)]
pub enum WeightingRule {
    /// SR1 approximation of the prior Hessian.
    #[default]
    Sr1,
    /// `B_k = αI` for every `k`, which reproduces FP when `a_k = 1`.
    ScaledIdentity,
    /// The same weighting at every iteration.
    Fixed(Weighting),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_outer_iters: usize,
    pub max_denoiser_evals: u64,
    /// Initial WPM step size `a₀`.
    pub step_size_init: f64,
    /// Relative objective growth that triggers a step-size halving.
    pub safeguard_epsilon: f64,
    pub cg_tol: f64,
    pub cg_max_iters: usize,
    /// Scaling of the SR1 seed matrix, must exceed one.
    pub gamma: f64,
    /// Skip threshold of the SR1 update.
    pub delta: f64,
    /// Consecutive halvings tolerated before giving up.
    pub max_halvings: usize,
    /// Stop once `‖x_{k+1} − x_k‖ ≤ step_tol·‖x_k‖`; zero disables the test.
    pub step_tol: f64,
    #[serde(skip)]
    pub weighting: WeightingRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_outer_iters: 10_000,
            max_denoiser_evals: 200,
            step_size_init: 1.0,
            safeguard_epsilon: 1e-2,
            cg_tol: 1e-6,
            cg_max_iters: 50,
            gamma: 1.25,
            delta: 1e-8,
            max_halvings: 30,
            step_tol: 0.0,
            weighting: WeightingRule::Sr1,
        }
    }
}

impl SolverConfig {
    pub fn with_budget(max_denoiser_evals: u64) -> Self {
        SolverConfig { max_denoiser_evals, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("step_size_init", self.step_size_init),
            ("safeguard_epsilon", self.safeguard_epsilon),
            ("cg_tol", self.cg_tol),
            ("delta", self.delta),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gamma > 1.0) || !self.gamma.is_finite() {
            return Err(Error::invalid(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        if !(self.step_tol >= 0.0) {
            return Err(Error::invalid(format!("step_tol must be non-negative, got {}", self.step_tol)));
        }
        if self.max_outer_iters == 0 || self.max_denoiser_evals == 0 || self.cg_max_iters == 0 {
            return Err(Error::invalid("iteration and evaluation limits must be positive"));
        }
        Ok(())
    }
}

/// Final iterate and history of a solver run.
#[derive(Debug, Clone)]
pub struct SolverOutput {
    pub x: Image,
    pub trace: SolverTrace,
}

/// Wall clock that can be paused while monitoring work runs.
#[derive(Debug)]
pub(crate) struct Stopwatch {
    accumulated: Duration,
    running_since: Option<Instant>,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Stopwatch { accumulated: Duration::ZERO, running_since: Some(Instant::now()) }
    }

    pub(crate) fn pause(&mut self) {
        if let Some(t) = self.running_since.take() {
            self.accumulated += t.elapsed();
        }
    }

    pub(crate) fn resume(&mut self) {
        if self.running_since.is_none() {
            self.running_since = Some(Instant::now());
        }
    }

    pub(crate) fn seconds(&self) -> f64 {
        let running = self.running_since.map_or(Duration::ZERO, |t| t.elapsed());
        (self.accumulated + running).as_secs_f64()
    }
}

pub(crate) fn psnr_against(reference: Option<&Image>, x: &Image) -> Result<Option<f64>> {
    reference.map(|r| crate::image::psnr(r, x)).transpose()
}

pub(crate) fn stalled(cfg: &SolverConfig, prev: &Image, next: &Image) -> bool {
    let step = prev.distance(next);
    step == 0.0 || (cfg.step_tol > 0.0 && step <= cfg.step_tol * prev.norm())
}
