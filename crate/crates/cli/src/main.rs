use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use red_core::experiment::{
    degrade, run_experiment, run_parallel, Comparison, DenoiserSpec, Settings, SolverKind, TaskKind, DEFAULT_SLACK_DB,
};
use red_core::image::{load_pgm, save_pgm};

/// Regularization-by-denoising benchmark harness.
#[derive(Parser, Debug)]
#[command(name = "redbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Degrade an image and restore it with one solver.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        solver: Option<SolverKind>,
        /// Recovered image (PGM).
        #[arg(long)]
        output_image: Option<PathBuf>,
        /// Convergence trace (CSV).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run several solvers in parallel on the same degradation and report
    /// the evaluations each needs to reach the baseline's final PSNR.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated list, default fp,apg,wpm. The first is the baseline.
        #[arg(long, value_delimiter = ',')]
        solvers: Option<Vec<SolverKind>>,
        #[arg(long)]
        slack: Option<f64>,
        /// Directory for `<solver>.csv` and `<solver>.pgm`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write the noisy measurement only.
    Degrade {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        output_image: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML file with the same keys as the long flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<TaskKind>,
    /// Prior weight. Defaults to 0.02 for deblurring and 0.01 for super-resolution.
    #[arg(long)]
    alpha: Option<f64>,
    /// Noise level in the data term. Defaults to the task noise level.
    #[arg(long)]
    sigma_model: Option<f64>,
    /// gaussian:SIZE:STD, box:SIZE or "external:PROGRAM ARGS".
    #[arg(long)]
    denoiser: Option<DenoiserSpec>,
    /// Denoiser evaluations charged to each solver.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Clean image to degrade (PGM), or a measurement with --measured.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    measured: bool,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    kernel_size: Option<usize>,
    #[arg(long)]
    kernel_std: Option<f64>,
    #[arg(long)]
    factor: Option<usize>,
}

fn default_alpha(task: TaskKind) -> f64 {
    match task {
        TaskKind::DeblurUniform | TaskKind::DeblurGaussian => 0.02,
        TaskKind::SuperResolution => 0.01,
    }
}

impl Common {
    fn settings(self, extra: Settings) -> Result<Settings> {
        let file = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        let flags = Settings {
            task: self.task,
            alpha: self.alpha,
            sigma_model: self.sigma_model,
            denoiser: self.denoiser,
            budget: self.budget,
            seed: self.seed,
            input: self.input,
            measured: self.measured.then_some(true),
            noise_sigma: self.noise_sigma,
            kernel_size: self.kernel_size,
            kernel_std: self.kernel_std,
            factor: self.factor,
            ..extra
        };
        let mut s = file.overlay(flags);
        let task = s.task.context("--task is required (or `task` in the config file)")?;
        s.alpha.get_or_insert(default_alpha(task));
        Ok(s)
    }
}

fn run(
    common: Common,
    solver: Option<SolverKind>,
    output_image: Option<PathBuf>,
    trace: Option<PathBuf>,
) -> Result<()> {
    let s = common.settings(Settings { solver, output_image, trace, ..Settings::default() })?;
    let solver = s.solver.context("--solver is required")?;
    let cfg = s.run_config(solver)?;
    let out = run_experiment(&cfg, None).with_context(|| format!("{solver} run failed"))?;
    let last = out.trace.last().context("solver produced no iterations")?;
    print!(
        "solver={} status={} evals={} iters={} objective={:.6e}",
        solver,
        out.trace.status.map_or_else(|| "unknown".to_string(), |st| st.to_string()),
        last.denoiser_evals,
        out.trace.records.len(),
        last.objective
    );
    if let Some(p) = last.psnr {
        print!(" psnr={p:.3}");
    }
    println!(" halvings={}", out.trace.step_halvings());
    Ok(())
}

fn compare(
    common: Common,
    solvers: Option<Vec<SolverKind>>,
    slack: Option<f64>,
    out_dir: Option<PathBuf>,
) -> Result<()> {
    let s = common.settings(Settings { solvers, slack, out_dir, ..Settings::default() })?;
    ensure!(!s.measured.unwrap_or(false), "compare needs a clean input to measure PSNR");
    let solvers = s.solvers.clone().unwrap_or_else(|| SolverKind::ALL.to_vec());
    ensure!(!solvers.is_empty(), "no solvers selected");
    let input = s.input.clone().context("--input is required")?;
    let clean = load_pgm(&input)?;
    if let Some(dir) = &s.out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let cfgs = solvers
        .iter()
        .map(|&k| {
            let mut cfg = s.run_config(k)?;
            if let Some(dir) = &s.out_dir {
                cfg.trace = Some(dir.join(format!("{k}.csv")));
                cfg.output_image = Some(dir.join(format!("{k}.pgm")));
            }
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut traces = Vec::new();
    for (k, r) in solvers.iter().zip(run_parallel(&cfgs, Some(&clean))) {
        traces.push(r.with_context(|| format!("{k} run failed"))?.trace);
    }
    let refs: Vec<_> = traces.iter().collect();
    let table = Comparison::new(&refs, 0, s.slack.unwrap_or(DEFAULT_SLACK_DB))?;
    print!("{table}");
    Ok(())
}

fn degrade_only(common: Common, output_image: PathBuf) -> Result<()> {
    let s = common.settings(Settings::default())?;
    if s.measured.unwrap_or(false) {
        bail!("--measured makes no sense for degrade");
    }
    let input = s.input.clone().context("--input is required")?;
    let y = degrade(&s.task_spec()?, &load_pgm(&input)?)?.measurement;
    save_pgm(&output_image, &y)?;
    println!("wrote {} ({})", output_image.display(), y.dims());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { common, solver, output_image, trace } => run(common, solver, output_image, trace),
        Command::Compare { common, solvers, slack, out_dir } => compare(common, solvers, slack, out_dir),
        Command::Degrade { common, output_image } => degrade_only(common, output_image),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
