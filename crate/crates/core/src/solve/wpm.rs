//! Weighted proximal method: each step solves
//! `(a/σ² HᵀH + B) x⁺ = a/σ² Hᵀy + B x − a α (x − f(x))` by conjugate gradients.

use super::{cg_solve, psnr_against, sr1_weighting, stalled, SolverConfig, SolverEvent, SolverOutput, SolverTrace};
use super::{Stopwatch, TerminationStatus, TraceRecord, Weighting, WeightingRule};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::red::{Evaluation, RedProblem};

/// One weighted proximal step from `x_k`; costs one denoiser evaluation.
pub fn wpm_step(
    problem: &RedProblem,
    x_k: &Image,
    weighting: &Weighting,
    step_size: f64,
    cfg: &SolverConfig,
) -> Result<Image> {
    x_k.ensure_dims(problem.dims())?;
    let denoised = problem.denoiser().denoise(x_k)?;
    wpm_step_with_denoised(problem, x_k, &denoised, weighting, step_size, cfg)
}

/// As [`wpm_step`], reusing a known `f(x_k)`; no denoiser evaluation.
pub fn wpm_step_with_denoised(
    problem: &RedProblem,
    x_k: &Image,
    denoised: &Image,
    weighting: &Weighting,
    step_size: f64,
    cfg: &SolverConfig,
) -> Result<Image> {
    x_k.ensure_dims(problem.dims())?;
    denoised.ensure_dims(problem.dims())?;
    if !(step_size > 0.0) {
        return Err(Error::invalid(format!("step size must be positive, got {step_size}")));
    }
    let scale = step_size * problem.data_weight();
    let prior_grad = problem.prior_gradient_with(x_k, denoised);
    let mut rhs = problem.adjoint_measurement().scaled(scale);
    rhs.axpy(1.0, &weighting.apply(x_k));
    rhs.axpy(-step_size, &prior_grad);

    let op = problem.operator();
    let system = |v: &Image| {
        let mut out = crate::ops::gram_apply(op.as_ref(), 0.0, scale, v)?;
        out.axpy(1.0, &weighting.apply(v));
        Ok(out)
    };
    Ok(cg_solve(system, &rhs, x_k, cfg.cg_tol, cfg.cg_max_iters)?.x)
}

pub fn run_wpm(
    problem: &RedProblem,
    x0: &Image,
    cfg: &SolverConfig,
    reference: Option<&Image>,
) -> Result<SolverOutput> {
    cfg.validate()?;
    x0.ensure_dims(problem.dims())?;
    if let Some(r) = reference {
        r.ensure_dims(problem.dims())?;
    }

    let mut trace = SolverTrace::new("wpm");
    let clock = Stopwatch::start();
    let alpha = problem.alpha();
    let mut step_size = cfg.step_size_init;

    let mut x = x0.clone();
    let mut current: Evaluation = problem.evaluate(&x)?;
    let mut evals = 1u64;
    // (x_{k−1}, ∇g(x_{k−1}))
    let mut previous: Option<(Image, Image)> = None;

    let status = 'outer: loop {
        let k = trace.records.len() + 1;
        if k > cfg.max_outer_iters {
            break TerminationStatus::MaxIters;
        }
        if evals + 1 > cfg.max_denoiser_evals {
            break TerminationStatus::BudgetExhausted;
        }

        let weighting = match (&cfg.weighting, &previous) {
            (WeightingRule::ScaledIdentity, _) | (WeightingRule::Sr1, None) => Weighting::scaled_identity(alpha)?,
            (WeightingRule::Fixed(w), _) => w.clone(),
            (WeightingRule::Sr1, Some((x_prev, g_prev))) => {
                let update =
                    sr1_weighting(k, &x, x_prev, &current.prior_gradient, g_prev, alpha, cfg.gamma, cfg.delta)?;
                if let Some(reason) = update.fallback {
                    trace.events.push(SolverEvent::WeightingFallback { iteration: k, reason });
                }
                update.weighting
            }
        };

        let mut halvings = 0;
        let (x_next, next) = loop {
            let candidate = wpm_step_with_denoised(problem, &x, &current.denoised, &weighting, step_size, cfg)?;
            let eval = problem.evaluate(&candidate)?;
            evals += 1;
            let growth = eval.objective - current.objective;
            if growth <= cfg.safeguard_epsilon * eval.objective {
                break (candidate, eval);
            }
            halvings += 1;
            if halvings > cfg.max_halvings {
                return Err(Error::StepSizeCollapse(halvings));
            }
            step_size *= 0.5;
            trace.events.push(SolverEvent::StepHalved {
                iteration: k,
                objective_before: current.objective,
                rejected_objective: eval.objective,
                new_step_size: step_size,
            });
            if evals + 1 > cfg.max_denoiser_evals {
                break 'outer TerminationStatus::BudgetExhausted;
            }
        };

        let done = stalled(cfg, &x, &x_next);
        let prev_x = std::mem::replace(&mut x, x_next);
        let prev_eval = std::mem::replace(&mut current, next);
        previous = Some((prev_x, prev_eval.prior_gradient));

        let psnr = psnr_against(reference, &x)?;
        trace.records.push(TraceRecord {
            iteration: k,
            denoiser_evals: evals,
            objective: current.objective,
            psnr,
            elapsed_seconds: clock.seconds(),
        });
        if done {
            break TerminationStatus::Converged;
        }
    };
    trace.status = Some(status);
    Ok(SolverOutput { x, trace })
}
