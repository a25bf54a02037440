//! Fixed-point iteration and its accelerated (APG) variant.

use super::{cg_solve, psnr_against, stalled, SolverConfig, SolverOutput, SolverTrace, Stopwatch};
use super::{TerminationStatus, TraceRecord};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::red::RedProblem;

/// How the FP linear system `(HᵀH/σ² + αI) x = Hᵀy/σ² + α f(x_in)` is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolve {
    /// Exact division by the operator symbol when `H` is block-circulant,
    /// conjugate gradients otherwise.
    Auto,
    /// Exact solve in the Fourier domain; errors if `H` has no symbol.
    Fourier,
    ConjugateGradient,
}

/// One FP step from `x_in`; costs one denoiser evaluation.
pub fn fp_step(problem: &RedProblem, x_in: &Image, cfg: &SolverConfig) -> Result<Image> {
    fp_step_using(problem, x_in, cfg, LinearSolve::Auto)
}

pub fn fp_step_using(problem: &RedProblem, x_in: &Image, cfg: &SolverConfig, how: LinearSolve) -> Result<Image> {
    x_in.ensure_dims(problem.dims())?;
    let denoised = problem.denoiser().denoise(x_in)?;
    solve_fp_system(problem, &denoised, x_in, cfg, how)
}

/// Solves the FP system for a given `f(x_in)`, warm-starting CG at `warm`.
pub(crate) fn solve_fp_system(
    problem: &RedProblem,
    denoised: &Image,
    warm: &Image,
    cfg: &SolverConfig,
    how: LinearSolve,
) -> Result<Image> {
    let weight = problem.data_weight();
    let alpha = problem.alpha();
    let rhs = problem.adjoint_measurement().lin_comb(weight, denoised, alpha);
    let op = problem.operator();

    let symbol = op.circulant_symbol().filter(|s| s.dims() == op.input_dims() && s.dims() == op.output_dims());
    match (how, symbol) {
        (LinearSolve::Auto | LinearSolve::Fourier, Some(symbol)) => Ok(symbol.solve_gram(&rhs, weight, alpha)),
        (LinearSolve::Fourier, None) => Err(Error::invalid("operator has no circulant symbol")),
        _ => {
            let gram = |v: &Image| crate::ops::gram_apply(op.as_ref(), alpha, weight, v);
            Ok(cg_solve(gram, &rhs, warm, cfg.cg_tol, cfg.cg_max_iters)?.x)
        }
    }
}

/// `t_{k+1} = (1 + √(1 + 4t_k²)) / 2`
pub fn apg_next_t(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

pub fn run_fp(problem: &RedProblem, x0: &Image, cfg: &SolverConfig, reference: Option<&Image>) -> Result<SolverOutput> {
    run_lagged(problem, x0, cfg, reference, false)
}

pub fn run_apg(
    problem: &RedProblem,
    x0: &Image,
    cfg: &SolverConfig,
    reference: Option<&Image>,
) -> Result<SolverOutput> {
    run_lagged(problem, x0, cfg, reference, true)
}

fn run_lagged(
    problem: &RedProblem,
    x0: &Image,
    cfg: &SolverConfig,
    reference: Option<&Image>,
    accelerate: bool,
) -> Result<SolverOutput> {
    cfg.validate()?;
    x0.ensure_dims(problem.dims())?;
    if let Some(r) = reference {
        r.ensure_dims(problem.dims())?;
    }

    let mut trace = SolverTrace::new(if accelerate { "apg" } else { "fp" });
    let mut clock = Stopwatch::start();
    let mut x = x0.clone();
    let mut z = x0.clone();
    let mut t = 1.0;
    let mut evals = 0u64;

    let status = loop {
        if trace.records.len() >= cfg.max_outer_iters {
            break TerminationStatus::MaxIters;
        }
        if evals + 1 > cfg.max_denoiser_evals {
            break TerminationStatus::BudgetExhausted;
        }
        let x_next = fp_step(problem, &z, cfg)?;
        evals += 1;
        if accelerate {
            let t_next = apg_next_t(t);
            z = x_next.lin_comb(1.0, &x_next.sub(&x), (t - 1.0) / t_next);
            t = t_next;
        } else {
            z = x_next.clone();
        }
        let done = stalled(cfg, &x, &x_next);
        x = x_next;

        clock.pause();
        let objective = problem.objective(&x)?;
        trace.monitor_evals += 1;
        let psnr = psnr_against(reference, &x)?;
        trace.records.push(TraceRecord {
            iteration: trace.records.len() + 1,
            denoiser_evals: evals,
            objective,
            psnr,
            elapsed_seconds: clock.seconds(),
        });
        clock.resume();

        if done {
            break TerminationStatus::Converged;
        }
    };
    trace.status = Some(status);
    Ok(SolverOutput { x, trace })
}
