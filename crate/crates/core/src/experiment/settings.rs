use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{DenoiserSpec, RunConfig, SolverKind, TaskKind, TaskSpec};
use crate::error::{Error, Result};
use crate::solve::SolverConfig;

/// Run parameters as given on the command line or in a TOML file.
///
/// Keys mirror the long flag names. Every field is optional so a file and
/// the flags can be layered with [`Settings::overlay`]. Solver tuning beyond
/// the budget goes in a `[tuning]` table.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    pub task: Option<TaskKind>,
    pub solver: Option<SolverKind>,
    pub solvers: Option<Vec<SolverKind>>,
    pub alpha: Option<f64>,
    pub sigma_model: Option<f64>,
    pub denoiser: Option<DenoiserSpec>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub measured: Option<bool>,
    pub output_image: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub slack: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub kernel_size: Option<usize>,
    pub kernel_std: Option<f64>,
    pub factor: Option<usize>,
    pub decimation_offset: Option<usize>,
    pub tuning: Option<SolverConfig>,
}

macro_rules! overlay_fields {
    ($base:ident, $over:ident; $($f:ident),*) => {
        Settings { $($f: $over.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: Settings) -> Settings {
        let base = self;
        overlay_fields!(base, over; task, solver, solvers, alpha, sigma_model, denoiser, budget, seed, input,
            measured, output_image, trace, out_dir, slack, noise_sigma, kernel_size, kernel_std, factor,
            decimation_offset, tuning)
    }

    pub fn task_spec(&self) -> Result<TaskSpec> {
        let kind = self.task.ok_or_else(|| Error::Config("task is required".into()))?;
        let mut t = TaskSpec::protocol(kind);
        t.seed = self.seed.unwrap_or(t.seed);
        t.noise_sigma = self.noise_sigma.unwrap_or(t.noise_sigma);
        t.kernel_size = self.kernel_size.unwrap_or(t.kernel_size);
        t.kernel_std = self.kernel_std.unwrap_or(t.kernel_std);
        t.factor = self.factor.unwrap_or(t.factor);
        t.decimation_offset = self.decimation_offset.unwrap_or(t.decimation_offset);
        t.validate()?;
        Ok(t)
    }

    /// Builds the config for `solver`. `alpha` must be set; `sigma_model`
    /// defaults to the task noise level.
    pub fn run_config(&self, solver: SolverKind) -> Result<RunConfig> {
        let task = self.task_spec()?;
        let alpha = self.alpha.ok_or_else(|| Error::Config("alpha is required".into()))?;
        let mut cfg = RunConfig::new(task, solver, alpha, self.denoiser.clone().unwrap_or_default());
        if let Some(s) = self.sigma_model {
            cfg.sigma_model = s;
        }
        if let Some(t) = &self.tuning {
            cfg.solver_config = t.clone();
        }
        if let Some(b) = self.budget {
            cfg.solver_config.max_denoiser_evals = b;
        }
        cfg.input = self.input.clone();
        cfg.input_is_measurement = self.measured.unwrap_or(false);
        cfg.output_image = self.output_image.clone();
        cfg.trace = self.trace.clone();
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FILE: &str = r#"
task = "super-resolution"
solvers = ["fp", "apg", "wpm"]
alpha = 0.01
denoiser = "gaussian:5:1.0"
budget = 200
seed = 7
input = "data/camera48.pgm"

[tuning]
cg_tol = 1e-7
"#;

    #[test]
    fn parses_and_resolves() {
        let s = Settings::from_toml_str(FILE).unwrap();
        assert_eq!(s.solvers.as_deref(), Some(&SolverKind::ALL[..]));
        let cfg = s.run_config(SolverKind::Wpm).unwrap();
        assert_eq!(cfg.task.factor, 3);
        assert_eq!(cfg.task.seed, 7);
        assert_eq!(cfg.sigma_model, 5.0);
        assert_eq!(cfg.solver_config.max_denoiser_evals, 200);
        assert_eq!(cfg.solver_config.cg_tol, 1e-7);
        assert_eq!(cfg.denoiser, DenoiserSpec::Gaussian { size: 5, std: 1.0 });
    }

    #[test]
    fn flags_override_file() {
        let file = Settings::from_toml_str(FILE).unwrap();
        let flags = Settings { alpha: Some(0.5), seed: Some(1), ..Settings::default() };
        let s = file.overlay(flags);
        assert_eq!(s.alpha, Some(0.5));
        assert_eq!(s.seed, Some(1));
        assert_eq!(s.budget, Some(200));
    }

    #[test]
    fn rejects_unknown_keys_and_missing_fields() {
        assert!(Settings::from_toml_str("colour = true").is_err());
        assert!(Settings::from_toml_str("denoiser = \"median:3\"").is_err());
        let no_alpha = Settings { task: Some(TaskKind::DeblurUniform), ..Settings::default() };
        assert!(matches!(no_alpha.run_config(SolverKind::Fp), Err(Error::Config(_))));
        assert!(Settings::default().task_spec().is_err());
    }
}
