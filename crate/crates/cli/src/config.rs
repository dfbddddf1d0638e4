//! Run configuration: flags override the config file, which overrides defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use lrdspde::{FrbeParams, SpectralGrid, SpectralModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Density,
    Covariance,
    Simulate,
    Converge,
    Diverge,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Which covariance surface to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CovMode {
    /// Heat limit over (δ, t + t').
    Heat,
    /// FRBE limit over (δ, t) at fixed t' and α.
    Frbe,
    /// FRBE limit over (δ, α) at μ = t = t' = 1.
    AlphaDelta,
    /// FRBE limit over (t, α) at δ = 0 and fixed t'.
    AlphaTime,
}

/// Which field `simulate` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FieldChoice {
    Eta,
    Solution,
    Rescaled,
    LimitHeat,
    LimitFrbe,
}

/// Every setting that can come from a flag or the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Long-memory exponent κ ∈ (0, 1).
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Cycle frequency w ≠ 0.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long = "gamma-exp", global = true)]
    pub gamma_exp: Option<f64>,
    #[arg(long, global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    pub t2: Option<f64>,
    #[arg(long = "x-min", global = true, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long = "x-max", global = true, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long = "x-steps", global = true)]
    pub x_steps: Option<usize>,
    /// Explicit time values (comma separated); replaces the command's default sweep.
    #[arg(long = "t-values", global = true, value_delimiter = ',')]
    pub t_values: Option<Vec<f64>>,
    /// α values for the alpha-delta and alpha-time sweeps (comma separated).
    #[arg(long = "alpha-values", global = true, value_delimiter = ',')]
    pub alpha_values: Option<Vec<f64>>,
    #[arg(long = "delta-lambda", global = true)]
    pub delta_lambda: Option<f64>,
    #[arg(long = "n-grid", global = true)]
    pub n_grid: Option<usize>,
    #[arg(long = "eps-list", global = true, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    /// Rescaling factor for the rescaled field.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<CovMode>,
    /// Normalize the model-dependent constant of the limit covariance to one.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub unit: Option<bool>,
    #[arg(long, global = true, value_enum)]
    pub field: Option<FieldChoice>,
    /// Hermite rank for `diverge`.
    #[arg(long, global = true)]
    pub m: Option<u32>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl Overrides {
    /// Fills every unset field of `self` from `lower`.
    fn or(self, lower: Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: self.$f.or(lower.$f)),* } };
        }
        pick!(
            kappa,
            omega,
            mu,
            alpha,
            beta,
            gamma_exp,
            t,
            t2,
            x_min,
            x_max,
            x_steps,
            t_values,
            alpha_values,
            delta_lambda,
            n_grid,
            eps_list,
            eps,
            realizations,
            seed,
            out,
            format,
            mode,
            unit,
            field,
            m,
            radii,
            threads
        )
    }

    pub fn from_file(path: &Path) -> Result<Overrides> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// The fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub model: SpectralModel,
    pub params: FrbeParams,
    pub grid: SpectralGrid,
    pub t: f64,
    pub t2: f64,
    pub t_values: Vec<f64>,
    pub x_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub eps: f64,
    pub realizations: usize,
    pub seed: u64,
    pub output_path: PathBuf,
    pub format: Format,
    pub mode: CovMode,
    pub unit: bool,
    pub field: FieldChoice,
    pub m: u32,
    pub radii: Vec<f64>,
}

pub const DEFAULT_SEED: u64 = 20_190_401;

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl RunConfig {
    pub fn resolve(command: Command, flags: Overrides, file: Option<Overrides>) -> Result<RunConfig> {
        let o = flags.or(file.unwrap_or_default());
        let mode = o.mode.unwrap_or(CovMode::Heat);
        let field = o.field.unwrap_or(FieldChoice::LimitHeat);
        let frbe = (command == Command::Covariance && mode != CovMode::Heat)
            || (command == Command::Simulate && field == FieldChoice::LimitFrbe);

        let model = SpectralModel { kappa: o.kappa.unwrap_or(0.8), omega: o.omega.unwrap_or(1.0) };
        // heat by default; FRBE limit runs default to the β = 1/2 example
        let params = FrbeParams {
            alpha: o.alpha.unwrap_or(if frbe { 1.5 } else { 2.0 }),
            beta: o.beta.unwrap_or(if frbe { 0.5 } else { 1.0 }),
            gamma_exp: o.gamma_exp.unwrap_or(0.0),
            mu: o.mu.unwrap_or(1.0),
        };
        let grid = SpectralGrid { delta: o.delta_lambda.unwrap_or(0.05), n: o.n_grid.unwrap_or(100) };

        let (x_min, x_max, x_steps, t_default) = match command {
            Command::Density => (-5.0, 5.0, 201, vec![]),
            Command::Covariance => match mode {
                CovMode::Heat => (0.0, 5.0, 51, linspace(0.5, 5.0, 10)),
                CovMode::Frbe | CovMode::AlphaTime => (0.0, 5.0, 51, linspace(1.0, 2.0, 11)),
                CovMode::AlphaDelta => (0.0, 5.0, 51, vec![]),
            },
            Command::Simulate => (0.0, 10.0, 101, linspace(0.25, 2.5, 10)),
            _ => (0.0, 0.0, 1, vec![]),
        };
        let (x_min, x_max) = (o.x_min.unwrap_or(x_min), o.x_max.unwrap_or(x_max));
        let x_steps = o.x_steps.unwrap_or(x_steps);
        if x_steps == 0 {
            bail!("--x-steps must be at least 1");
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max < x_min {
            bail!("need finite x-min <= x-max, got [{x_min}, {x_max}]");
        }
        let x_values = if mode == CovMode::AlphaTime && command == Command::Covariance {
            vec![0.0]
        } else {
            linspace(x_min, x_max, x_steps)
        };

        let t = o.t.unwrap_or(1.0);
        let t_values = match o.t_values {
            Some(v) => v,
            None if command == Command::Simulate && o.t.is_some() => vec![t],
            None => t_default,
        };
        let alpha_values = o.alpha_values.unwrap_or_else(|| (1..=10).map(|i| 1.0 + 0.1 * i as f64).collect());

        let default_out = match command {
            Command::Density => "density.csv",
            Command::Covariance => "covariance.csv",
            Command::Simulate => "simulate",
            Command::Converge => "converge.json",
            Command::Diverge => "diverge.json",
            Command::Verify => "verify.json",
        };
        let default_format = match command {
            Command::Density | Command::Covariance | Command::Simulate => Format::Csv,
            _ => Format::Json,
        };
        let default_realizations = match command {
            Command::Verify => 20_000,
            _ => 2,
        };

        let cfg = RunConfig {
            command,
            model,
            params,
            grid,
            t,
            t2: o.t2.unwrap_or(1.0),
            t_values,
            x_values,
            alpha_values,
            eps_list: o.eps_list.unwrap_or_else(|| lrdspde::limits::DEFAULT_EPS_LIST.to_vec()),
            eps: o.eps.unwrap_or(0.01),
            realizations: o.realizations.unwrap_or(default_realizations),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            output_path: o.out.unwrap_or_else(|| PathBuf::from(default_out)),
            format: o.format.unwrap_or(default_format),
            mode,
            // covariance surfaces default to the normalized constant
            unit: o.unit.unwrap_or(command == Command::Covariance),
            field,
            m: o.m.unwrap_or(2),
            radii: o.radii.unwrap_or_else(|| vec![10.0, 20.0, 40.0, 80.0]),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.params.validate()?;
        self.grid.validate()?;
        if self.command == Command::Simulate && self.realizations == 0 {
            bail!("--realizations must be at least 1");
        }
        if self.command == Command::Verify && self.realizations < 2 {
            bail!("verify needs at least 2 realizations");
        }
        if matches!(self.command, Command::Covariance | Command::Simulate)
            && self.t_values.is_empty()
            && self.mode != CovMode::AlphaDelta
        {
            bail!("no time values given");
        }
        if self.t_values.iter().chain([&self.t, &self.t2]).any(|v| !v.is_finite() || *v < 0.0) {
            bail!("times must be finite and non-negative");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, for provenance lines. The output
    /// path is left out so that the same run written elsewhere hashes alike.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut canonical = self.clone();
        canonical.output_path = PathBuf::new();
        let json = serde_json::to_vec(&canonical).expect("RunConfig serializes");
        hex::encode(Sha256::digest(&json))
    }
}
