//! Degradation protocols, solver runs and evaluation-count comparisons.

mod csv;
mod settings;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::denoise::{BoxFilter, Denoiser, ExternalProcess, GaussianFilter};
use crate::error::{Error, Result};
use crate::image::{add_gaussian_noise, load_pgm, save_pgm, Dims, Image, Kernel};
use crate::ops::{compose, make_blur, Decimation, Operator};
use crate::red::RedProblem;
use crate::solve::{run_apg, run_fp, run_wpm, SolverConfig, SolverOutput, SolverTrace};

pub use csv::{emit_csv, parse_csv, write_csv, CSV_HEADER};
pub use settings::Settings;

/// Slack in dB under which two PSNR values count as similar.
pub const DEFAULT_SLACK_DB: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    DeblurUniform,
    DeblurGaussian,
    SuperResolution,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [TaskKind::DeblurUniform, TaskKind::DeblurGaussian, TaskKind::SuperResolution];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::DeblurUniform => "deblur-uniform",
            TaskKind::DeblurGaussian => "deblur-gaussian",
            TaskKind::SuperResolution => "super-resolution",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            Error::invalid(format!("unknown task `{s}` (expected deblur-uniform, deblur-gaussian or super-resolution)"))
        })
    }
}

/// A degradation protocol: blur, optional decimation, additive Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub kernel_size: usize,
    /// Ignored by the uniform kernel.
    pub kernel_std: f64,
    /// Decimation factor, 1 for deblurring.
    pub factor: usize,
    /// Row/column of each block kept by the decimation.
    pub decimation_offset: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl TaskSpec {
    /// The standard protocol for `kind` with seed 0.
    pub fn protocol(kind: TaskKind) -> Self {
        let base = TaskSpec {
            kind,
            kernel_size: 9,
            kernel_std: 1.6,
            factor: 1,
            decimation_offset: 0,
            noise_sigma: std::f64::consts::SQRT_2,
            seed: 0,
        };
        match kind {
            TaskKind::DeblurUniform | TaskKind::DeblurGaussian => base,
            TaskKind::SuperResolution => TaskSpec { kernel_size: 7, factor: 3, noise_sigma: 5.0, ..base },
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        TaskSpec { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel_size == 0 || self.kernel_size.is_multiple_of(2) {
            return Err(Error::invalid(format!("kernel size must be odd, got {}", self.kernel_size)));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::invalid(format!("noise sigma must be non-negative, got {}", self.noise_sigma)));
        }
        match self.kind {
            TaskKind::SuperResolution if self.factor < 1 || self.decimation_offset >= self.factor => Err(
                Error::invalid(format!("decimation offset {} outside factor {}", self.decimation_offset, self.factor)),
            ),
            TaskKind::DeblurUniform | TaskKind::DeblurGaussian if self.factor != 1 => {
                Err(Error::invalid("deblurring tasks use factor 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn kernel(&self) -> Result<Kernel> {
        match self.kind {
            TaskKind::DeblurUniform => Kernel::uniform(self.kernel_size),
            TaskKind::DeblurGaussian | TaskKind::SuperResolution => Kernel::gaussian(self.kernel_size, self.kernel_std),
        }
    }

    /// Forward model acting on images of size `hi`.
    pub fn forward_model(&self, hi: Dims) -> Result<Operator> {
        self.validate()?;
        let blur: Operator = Arc::new(make_blur(self.kernel()?, hi)?);
        if self.factor == 1 {
            return Ok(blur);
        }
        let decimate: Operator = Arc::new(Decimation::with_offset(self.factor, self.decimation_offset, hi)?);
        Ok(Arc::new(compose(decimate, blur)?))
    }

    /// Size of the unknown image for a measurement of size `lo`.
    pub fn high_res_dims(&self, lo: Dims) -> Dims {
        Dims::new(lo.width * self.factor, lo.height * self.factor)
    }
}

/// A noisy measurement together with the operator that produced it.
#[derive(Debug, Clone)]
pub struct Degraded {
    pub measurement: Image,
    pub operator: Operator,
}

/// `y = H(clean) + n`, with `n` drawn from the task seed.
pub fn degrade(task: &TaskSpec, clean: &Image) -> Result<Degraded> {
    task.validate()?;
    let dims = clean.dims();
    if !dims.width.is_multiple_of(task.factor) || !dims.height.is_multiple_of(task.factor) {
        return Err(Error::invalid(format!("{dims} is not divisible by factor {}", task.factor)));
    }
    let operator = task.forward_model(dims)?;
    let measurement = add_gaussian_noise(&operator.apply(clean)?, task.noise_sigma, task.seed)?;
    Ok(Degraded { measurement, operator })
}

/// Starting point shared by all solvers: `y` itself, or its pixel-replicated
/// upscale for super-resolution.
pub fn initial_estimate(task: &TaskSpec, measurement: &Image) -> Result<Image> {
    if task.factor == 1 {
        Ok(measurement.clone())
    } else {
        measurement.upscale_nearest(task.factor)
    }
}

/// Textual denoiser selector: `gaussian:SIZE:STD`, `box:SIZE` or
/// `external:PROGRAM [ARGS...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DenoiserSpec {
    Gaussian { size: usize, std: f64 },
    Box { size: usize },
    External { program: PathBuf, args: Vec<String> },
}

impl DenoiserSpec {
    pub fn build(&self, noise_level_hint: Option<f64>) -> Result<Denoiser> {
        let d = match self {
            DenoiserSpec::Gaussian { size, std } => Denoiser::new(GaussianFilter::new(*size, *std)?),
            DenoiserSpec::Box { size } => Denoiser::new(BoxFilter::new(*size)?),
            DenoiserSpec::External { program, args } => Denoiser::new(ExternalProcess::new(program, args.clone())),
        };
        match noise_level_hint {
            Some(h) => d.with_noise_level_hint(h),
            None => Ok(d),
        }
    }
}

impl Default for DenoiserSpec {
    fn default() -> Self {
        DenoiserSpec::Gaussian { size: 5, std: 1.0 }
    }
}

impl fmt::Display for DenoiserSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DenoiserSpec::Gaussian { size, std } => write!(f, "gaussian:{size}:{std}"),
            DenoiserSpec::Box { size } => write!(f, "box:{size}"),
            DenoiserSpec::External { program, args } => {
                write!(f, "external:{}", program.display())?;
                args.iter().try_for_each(|a| write!(f, " {a}"))
            }
        }
    }
}

impl FromStr for DenoiserSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("bad denoiser spec `{s}`"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "gaussian" => {
                let (size, std) = rest.split_once(':').ok_or_else(bad)?;
                Ok(DenoiserSpec::Gaussian {
                    size: size.parse().map_err(|_| bad())?,
                    std: std.parse().map_err(|_| bad())?,
                })
            }
            "box" => Ok(DenoiserSpec::Box { size: rest.parse().map_err(|_| bad())? }),
            "external" => {
                let mut words = rest.split_whitespace();
                let program = words.next().ok_or_else(bad)?.into();
                Ok(DenoiserSpec::External { program, args: words.map(String::from).collect() })
            }
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for DenoiserSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DenoiserSpec> for String {
    fn from(d: DenoiserSpec) -> String {
        d.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Fp,
    Apg,
    Wpm,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Fp, SolverKind::Apg, SolverKind::Wpm];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Fp => "fp",
            SolverKind::Apg => "apg",
            SolverKind::Wpm => "wpm",
        }
    }

    pub fn run(
        self,
        problem: &RedProblem,
        x0: &Image,
        cfg: &SolverConfig,
        reference: Option<&Image>,
    ) -> Result<SolverOutput> {
        match self {
            SolverKind::Fp => run_fp(problem, x0, cfg, reference),
            SolverKind::Apg => run_apg(problem, x0, cfg, reference),
            SolverKind::Wpm => run_wpm(problem, x0, cfg, reference),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown solver `{s}` (expected fp, apg or wpm)")))
    }
}

/// Everything needed for one solver run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: TaskSpec,
    pub solver: SolverKind,
    pub alpha: f64,
    /// Noise level `σ` in the data term.
    pub sigma_model: f64,
    pub denoiser: DenoiserSpec,
    pub solver_config: SolverConfig,
    /// Clean image to degrade, or the measurement itself when
    /// `input_is_measurement` is set.
    pub input: Option<PathBuf>,
    pub input_is_measurement: bool,
    pub output_image: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(task: TaskSpec, solver: SolverKind, alpha: f64, denoiser: DenoiserSpec) -> Self {
        RunConfig {
            sigma_model: task.noise_sigma,
            task,
            solver,
            alpha,
            denoiser,
            solver_config: SolverConfig::default(),
            input: None,
            input_is_measurement: false,
            output_image: None,
            trace: None,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.solver_config.max_denoiser_evals = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        self.solver_config.validate()?;
        for (name, v) in [("alpha", self.alpha), ("sigma_model", self.sigma_model)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub x: Image,
    pub trace: SolverTrace,
    pub measurement: Image,
}

/// Degrades, solves and writes the requested artifacts.
///
/// With `clean_reference` the configured input is ignored and the PSNR column
/// is filled against the reference. Without it the input file is loaded; a
/// measurement input yields a trace without PSNR.
pub fn run_experiment(cfg: &RunConfig, clean_reference: Option<&Image>) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let loaded;
    let (clean, degraded) = match clean_reference {
        Some(clean) => (Some(clean), degrade(&cfg.task, clean)?),
        None => {
            let path = cfg.input.as_ref().ok_or_else(|| Error::Config("no input image given".into()))?;
            loaded = load_pgm(path)?;
            if cfg.input_is_measurement {
                let operator = cfg.task.forward_model(cfg.task.high_res_dims(loaded.dims()))?;
                (None, Degraded { measurement: loaded.clone(), operator })
            } else {
                (Some(&loaded), degrade(&cfg.task, &loaded)?)
            }
        }
    };

    let denoiser = Arc::new(cfg.denoiser.build(Some(cfg.sigma_model))?);
    let problem =
        RedProblem::new(degraded.operator, degraded.measurement.clone(), cfg.sigma_model, cfg.alpha, denoiser)?;
    let x0 = initial_estimate(&cfg.task, &degraded.measurement)?;
    let SolverOutput { x, trace } = cfg.solver.run(&problem, &x0, &cfg.solver_config, clean)?;

    if let Some(path) = &cfg.output_image {
        save_pgm(path, &x)?;
    }
    if let Some(path) = &cfg.trace {
        write_csv(&trace, path)?;
    }
    Ok(ExperimentOutput { x, trace, measurement: degraded.measurement })
}

/// Runs each config on its own thread. Results come back in input order.
pub fn run_parallel(cfgs: &[RunConfig], clean_reference: Option<&Image>) -> Vec<Result<ExperimentOutput>> {
    thread::scope(|s| {
        let handles: Vec<_> = cfgs.iter().map(|c| s.spawn(move || run_experiment(c, clean_reference))).collect();
        handles.into_iter().map(|h| h.join().expect("experiment thread panicked")).collect()
    })
}

/// Smallest charged evaluation count at which the trace reaches
/// `target_psnr − slack`, or `None` if it never does.
pub fn evals_to_match(candidate: &SolverTrace, target_psnr: f64, slack: f64) -> Result<Option<u64>> {
    if !(slack >= 0.0) {
        return Err(Error::invalid(format!("slack must be non-negative, got {slack}")));
    }
    let threshold = target_psnr - slack;
    for r in &candidate.records {
        if r.psnr.ok_or(Error::MissingPsnr)? >= threshold {
            return Ok(Some(r.denoiser_evals));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchRow {
    pub solver: String,
    pub evals_to_match: Option<u64>,
    pub final_evals: u64,
    pub final_psnr: f64,
    pub step_halvings: usize,
}

/// Evaluations each solver needs to reach the baseline's final PSNR.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub target_psnr: f64,
    pub slack: f64,
    pub rows: Vec<MatchRow>,
}

impl Comparison {
    pub fn new(traces: &[&SolverTrace], baseline: usize, slack: f64) -> Result<Self> {
        let base = traces.get(baseline).ok_or_else(|| Error::invalid("baseline index out of range"))?;
        let target_psnr = base.last().and_then(|r| r.psnr).ok_or(Error::MissingPsnr)?;
        let rows = traces
            .iter()
            .map(|t| {
                Ok(MatchRow {
                    solver: t.solver.to_string(),
                    evals_to_match: evals_to_match(t, target_psnr, slack)?,
                    final_evals: t.final_evals(),
                    final_psnr: t.last().and_then(|r| r.psnr).ok_or(Error::MissingPsnr)?,
                    step_halvings: t.step_halvings(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Comparison { target_psnr, slack, rows })
    }

    pub fn row(&self, solver: &str) -> Option<&MatchRow> {
        self.rows.iter().find(|r| r.solver == solver)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "target PSNR {:.3} dB (slack {} dB)", self.target_psnr, self.slack)?;
        writeln!(f, "{:<6} {:>8} {:>8} {:>10} {:>9}", "solver", "match", "evals", "psnr", "halvings")?;
        for r in &self.rows {
            let m = r.evals_to_match.map_or_else(|| "-".to_string(), |e| e.to_string());
            writeln!(f, "{:<6} {:>8} {:>8} {:>10.3} {:>9}", r.solver, m, r.final_evals, r.final_psnr, r.step_halvings)?;
        }
        Ok(())
    }
}
