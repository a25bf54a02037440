use std::fmt;

use super::weighting::Sr1Fallback;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Evaluations charged to the solver so far.
    pub denoiser_evals: u64,
    pub objective: f64,
    pub psnr: Option<f64>,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationStatus {
    Converged,
    BudgetExhausted,
    MaxIters,
}

impl fmt::Display for TerminationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminationStatus::Converged => "converged",
            TerminationStatus::BudgetExhausted => "budget_exhausted",
            TerminationStatus::MaxIters => "max_iters",
        })
    }
}

/// Noteworthy decisions taken during a run.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverEvent {
    /// The step at `iteration` was rejected and retaken with `new_step_size`.
    StepHalved { iteration: usize, objective_before: f64, rejected_objective: f64, new_step_size: f64 },
    /// SR1 could not produce a positive-definite weighting and fell back to `αI`.
    WeightingFallback { iteration: usize, reason: Sr1Fallback },
}

#[derive(Debug, Clone, Default)]
pub struct SolverTrace {
    pub solver: &'static str,
    pub records: Vec<TraceRecord>,
    pub status: Option<TerminationStatus>,
    pub events: Vec<SolverEvent>,
    /// Evaluations spent on logging only, not charged to the solver.
    pub monitor_evals: u64,
}

impl SolverTrace {
    pub(crate) fn new(solver: &'static str) -> Self {
        SolverTrace { solver, ..Self::default() }
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn final_evals(&self) -> u64 {
        self.last().map_or(0, |r| r.denoiser_evals)
    }

    pub fn step_halvings(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, SolverEvent::StepHalved { .. })).count()
    }

    pub fn weighting_fallbacks(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, SolverEvent::WeightingFallback { .. })).count()
    }

    pub fn has_psnr(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.psnr.is_some())
    }
}
