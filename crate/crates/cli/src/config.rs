use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use statwintgen::wintgen::CorollaryVariant;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "STATWINTGEN_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    #[value(name = "example-r2")]
    R2,
    #[value(name = "example-h3")]
    H3,
}

/// Numerical checks for statistical manifolds, warped products and the
/// Wintgen inequality of Legendrian submanifolds.
#[derive(Debug, Parser)]
#[command(name = "statwintgen", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON file with default values for any flag (flags take precedence).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report destination; defaults to $STATWINTGEN_OUT_DIR/<command>.<ext> or stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Residual tolerance for identity checks.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Slack below `−slack_tolerance` counts as a violation.
    #[arg(long, global = true)]
    pub slack_tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Dualistic axiom residuals of a built-in chart.
    Axioms {
        /// flat, flat4, r2, h3 or space-form.
        #[arg(long)]
        chart: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        /// Adds this amount to one Christoffel symbol of ∇ only.
        #[arg(long, allow_negative_numbers = true)]
        corrupt_gamma: Option<f64>,
    },
    /// Coordinate-plane sectional curvatures of ∇, ∇* and the Levi-Civita connection.
    Curvature {
        #[arg(long)]
        chart: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Almost contact classification of a warped product ℝ ×_f N.
    Classify {
        /// flat, flat4, r2 or space-form.
        #[arg(long)]
        fiber: Option<String>,
        /// exp, cosh or constant.
        #[arg(long)]
        warp: Option<String>,
        /// Perturbs the fiber's J (twisted on flat4, non-complex otherwise).
        #[arg(long, allow_negative_numbers = true)]
        j_perturbation: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Recomputes one of the worked examples.
    Reproduce {
        #[arg(value_enum)]
        example: Example,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// The generalized Wintgen inequality.
    Wintgen {
        #[command(subcommand)]
        command: WintgenArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum WintgenArgs {
    /// Evaluates the inequality on one instance file.
    Verify {
        instance: PathBuf,
        /// kenmotsu or cosymplectic.
        #[arg(long)]
        variant: Option<String>,
    },
    /// Evaluates every step of the proof chain on one instance file.
    Chain { instance: PathBuf },
    /// Seeded random sweep; emits one row per instance.
    Sweep {
        #[command(flatten)]
        ranges: RangeArgs,
        /// Dimensions, cycled over instances (comma separated).
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        total_symmetry: bool,
    },
    /// Hill climb minimizing the slack at fixed c, f, f′.
    Sharpness {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        c: Option<f64>,
        #[arg(long)]
        f: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        f_prime: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
    },
}

#[derive(Debug, Default, Args)]
pub struct RangeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub c_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c_max: Option<f64>,
    #[arg(long)]
    pub f_min: Option<f64>,
    #[arg(long)]
    pub f_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub fprime_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub fprime_max: Option<f64>,
    #[arg(long)]
    pub magnitude: Option<f64>,
}

/// Every configurable value; the config file uses the flag names with `_`.
#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub count: Option<usize>,
    pub iterations: Option<usize>,
    pub restarts: Option<usize>,
    pub n: Option<Vec<usize>>,
    pub c: Option<f64>,
    pub f: Option<f64>,
    pub f_prime: Option<f64>,
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub f_min: Option<f64>,
    pub f_max: Option<f64>,
    pub fprime_min: Option<f64>,
    pub fprime_max: Option<f64>,
    pub magnitude: Option<f64>,
    pub total_symmetry: Option<bool>,
    pub tolerance: Option<f64>,
    pub slack_tolerance: Option<f64>,
    pub chart: Option<String>,
    pub fiber: Option<String>,
    pub warp: Option<String>,
    pub j_perturbation: Option<f64>,
    pub corrupt_gamma: Option<f64>,
    pub variant: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

macro_rules! prefer {
    ($flags:expr, $file:expr, $($field:ident),*) => {
        Settings { $($field: $flags.$field.or($file.$field),)* }
    };
}

impl Settings {
    /// Values from `self` win; gaps are filled from `fallback`.
    pub fn or(self, fallback: Settings) -> Settings {
        prefer!(
            self, fallback, seed, samples, count, iterations, restarts, n, c, f, f_prime, c_min,
            c_max, f_min, f_max, fprime_min, fprime_max, magnitude, total_symmetry, tolerance,
            slack_tolerance, chart, fiber, warp, j_perturbation, corrupt_gamma, variant, output,
            format
        )
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Axioms,
    Curvature,
    Classify,
    Reproduce(Example),
    WintgenVerify(PathBuf),
    WintgenChain(PathBuf),
    WintgenSweep,
    WintgenSharpness,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Axioms => "axioms",
            Command::Curvature => "curvature",
            Command::Classify => "classify",
            Command::Reproduce(Example::R2) => "reproduce-example-r2",
            Command::Reproduce(Example::H3) => "reproduce-example-h3",
            Command::WintgenVerify(_) => "wintgen-verify",
            Command::WintgenChain(_) => "wintgen-chain",
            Command::WintgenSweep => "wintgen-sweep",
            Command::WintgenSharpness => "wintgen-sharpness",
        }
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub samples: usize,
    pub count: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub n: Vec<usize>,
    pub c: f64,
    pub f: f64,
    pub f_prime: f64,
    pub c_range: (f64, f64),
    pub f_range: (f64, f64),
    pub fprime_range: (f64, f64),
    pub magnitude: f64,
    pub total_symmetry: bool,
    pub tolerance: f64,
    pub slack_tolerance: f64,
    pub chart: String,
    pub fiber: String,
    pub warp: String,
    pub j_perturbation: f64,
    pub corrupt_gamma: Option<f64>,
    pub variant: Option<CorollaryVariant>,
    pub output: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Merges flags over the optional config file and applies defaults.
    /// `out_dir` is the value of [`OUT_DIR_ENV`], if set.
    pub fn resolve(cli: Cli, out_dir: Option<PathBuf>) -> Result<Self, CliError> {
        let common = cli.common;
        let mut flags = Settings {
            seed: common.seed,
            tolerance: common.tolerance,
            slack_tolerance: common.slack_tolerance,
            output: common.output,
            format: common.format,
            ..Settings::default()
        };
        let command = match cli.command {
            CommandArgs::Axioms { chart, samples, corrupt_gamma } => {
                flags.chart = chart;
                flags.samples = samples;
                flags.corrupt_gamma = corrupt_gamma;
                Command::Axioms
            }
            CommandArgs::Curvature { chart, samples } => {
                flags.chart = chart;
                flags.samples = samples;
                Command::Curvature
            }
            CommandArgs::Classify { fiber, warp, j_perturbation, samples } => {
                flags.fiber = fiber;
                flags.warp = warp;
                flags.j_perturbation = j_perturbation;
                flags.samples = samples;
                Command::Classify
            }
            CommandArgs::Reproduce { example, samples } => {
                flags.samples = samples;
                Command::Reproduce(example)
            }
            CommandArgs::Wintgen { command } => match command {
                WintgenArgs::Verify { instance, variant } => {
                    flags.variant = variant;
                    Command::WintgenVerify(instance)
                }
                WintgenArgs::Chain { instance } => Command::WintgenChain(instance),
                WintgenArgs::Sweep { ranges, n, count, total_symmetry } => {
                    flags.c_min = ranges.c_min;
                    flags.c_max = ranges.c_max;
                    flags.f_min = ranges.f_min;
                    flags.f_max = ranges.f_max;
                    flags.fprime_min = ranges.fprime_min;
                    flags.fprime_max = ranges.fprime_max;
                    flags.magnitude = ranges.magnitude;
                    flags.n = n;
                    flags.count = count;
                    flags.total_symmetry = total_symmetry.then_some(true);
                    Command::WintgenSweep
                }
                WintgenArgs::Sharpness { n, c, f, f_prime, iterations, restarts } => {
                    flags.n = n.map(|v| vec![v]);
                    flags.c = c;
                    flags.f = f;
                    flags.f_prime = f_prime;
                    flags.iterations = iterations;
                    flags.restarts = restarts;
                    Command::WintgenSharpness
                }
            },
        };
        let file = match &common.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        Self::from_settings(command, flags.or(file), out_dir)
    }

    pub fn from_settings(command: Command, s: Settings, out_dir: Option<PathBuf>) -> Result<Self, CliError> {
        let variant = s
            .variant
            .as_deref()
            .map(str::parse::<CorollaryVariant>)
            .transpose()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let config = RunConfig {
            command,
            seed: s.seed.unwrap_or(0),
            samples: s.samples.unwrap_or(50),
            count: s.count.unwrap_or(1000),
            iterations: s.iterations.unwrap_or(2000),
            restarts: s.restarts.unwrap_or(4),
            n: s.n.unwrap_or_else(|| vec![3]),
            c: s.c.unwrap_or(0.0),
            f: s.f.unwrap_or(1.0),
            f_prime: s.f_prime.unwrap_or(1.0),
            c_range: (s.c_min.unwrap_or(-4.0), s.c_max.unwrap_or(4.0)),
            f_range: (s.f_min.unwrap_or(0.5), s.f_max.unwrap_or(2.0)),
            fprime_range: (s.fprime_min.unwrap_or(-1.0), s.fprime_max.unwrap_or(1.0)),
            magnitude: s.magnitude.unwrap_or(1.0),
            total_symmetry: s.total_symmetry.unwrap_or(false),
            tolerance: s.tolerance.unwrap_or(1e-8),
            slack_tolerance: s.slack_tolerance.unwrap_or(1e-9),
            chart: s.chart.unwrap_or_else(|| "r2".into()),
            fiber: s.fiber.unwrap_or_else(|| "r2".into()),
            warp: s.warp.unwrap_or_else(|| "exp".into()),
            j_perturbation: s.j_perturbation.unwrap_or(0.0),
            corrupt_gamma: s.corrupt_gamma,
            variant,
            output: s.output,
            out_dir,
            format: s.format.unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !(self.tolerance > 0.0) || !(self.slack_tolerance > 0.0) {
            return usage("tolerances must be positive".into());
        }
        if self.samples == 0 || self.count == 0 || self.iterations == 0 || self.restarts == 0 {
            return usage("counts must be at least 1".into());
        }
        if self.n.is_empty() || self.n.iter().any(|&n| n < 2) {
            return usage(format!("dimensions must be at least 2, got {:?}", self.n));
        }
        if self.format == Format::Csv && self.command != Command::WintgenSweep {
            return usage(format!("{} has no CSV form", self.command.name()));
        }
        Ok(())
    }

    /// Where the report goes; `None` means stdout.
    pub fn destination(&self) -> Option<PathBuf> {
        let ext = match self.format {
            Format::Json => "json",
            Format::Csv => "csv",
        };
        self.output.clone().or_else(|| {
            self.out_dir
                .as_ref()
                .map(|d| d.join(format!("{}.{ext}", self.command.name())))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        let cli = Cli::try_parse_from(std::iter::once("statwintgen").chain(args.iter().copied())).unwrap();
        RunConfig::resolve(cli, None).unwrap()
    }

    #[test]
    fn flags_win_over_file_values() {
        let flags = Settings { seed: Some(1), ..Settings::default() };
        let file = Settings { seed: Some(2), count: Some(9), ..Settings::default() };
        let merged = flags.or(file);
        assert_eq!(merged.seed, Some(1));
        assert_eq!(merged.count, Some(9));
    }

    #[test]
    fn sweep_flags_parse() {
        let c = parse(&["wintgen", "sweep", "--n", "2,4", "--c-min", "-2", "--count", "10", "--total-symmetry"]);
        assert_eq!(c.command, Command::WintgenSweep);
        assert_eq!(c.n, vec![2, 4]);
        assert_eq!(c.c_range, (-2.0, 4.0));
        assert!(c.total_symmetry);
    }

    #[test]
    fn destination_prefers_output_then_env_dir() {
        let mut c = parse(&["reproduce", "example-h3"]);
        assert_eq!(c.destination(), None);
        c.out_dir = Some(PathBuf::from("/tmp/out"));
        assert_eq!(c.destination(), Some(PathBuf::from("/tmp/out/reproduce-example-h3.json")));
        c.output = Some(PathBuf::from("r.json"));
        assert_eq!(c.destination(), Some(PathBuf::from("r.json")));
    }

    #[test]
    fn validation_rejects_bad_values() {
        let base = || Settings::default();
        assert!(RunConfig::from_settings(Command::Axioms, Settings { tolerance: Some(-1.0), ..base() }, None).is_err());
        assert!(RunConfig::from_settings(Command::WintgenSweep, Settings { n: Some(vec![1]), ..base() }, None).is_err());
        assert!(RunConfig::from_settings(Command::Axioms, Settings { variant: Some("sasakian".into()), ..base() }, None).is_err());
        assert!(RunConfig::from_settings(Command::WintgenSweep, Settings { format: Some(Format::Csv), ..base() }, None).is_ok());
    }
}
