//! The `fracalc` command-line front end.
//!
//! Exit codes: 0 on success, 2 when the input is invalid (bad flags, bad
//! files, violated preconditions), 1 when a numerical method fails. Errors
//! are reported as one JSON line on stderr.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub mod commands;
pub mod config;
pub mod output;

pub use config::RunConfig;
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "fracalc", version, about = "One-sided fractional calculus toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Random seed (used by ctrw)
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Upper bound on worker threads; FRACALC_THREADS also applies
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write results into this directory instead of stdout
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Output format [default: json for ml, fracop and fit; csv otherwise]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file whose values override the flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mittag-Leffler function E_{alpha,beta}(t)
    Ml(MlArgs),
    /// Fractional derivative or integral of a built-in or JSON operand at one time
    Fracop(FracopArgs),
    /// Fractional relaxation D^alpha u = lambda u on [0, t_end]
    Relax(RelaxArgs),
    /// Fit exponential and fractional growth models to a `t,value` CSV
    Fit(FitArgs),
    /// Stress of a power-law viscoelastic material under a strain program
    Visco(ViscoArgs),
    /// Continuous-time random walk ensemble with Pareto waiting times
    Ctrw(CtrwArgs),
    /// Fundamental solution of the time-fractional diffusion equation
    Diffusion(DiffusionArgs),
    /// Weighted Neumann trace of the extension problem
    Extension(ExtensionArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ml(_) => "ml",
            Command::Fracop(_) => "fracop",
            Command::Relax(_) => "relax",
            Command::Fit(_) => "fit",
            Command::Visco(_) => "visco",
            Command::Ctrw(_) => "ctrw",
            Command::Diffusion(_) => "diffusion",
            Command::Extension(_) => "extension",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Ml(_) | Command::Fracop(_) | Command::Fit(_) => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct MlArgs {
    /// Order alpha > 0
    #[arg(long)]
    pub alpha: f64,
    /// Second parameter beta > 0
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Argument (dimensionless)
    #[arg(long)]
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperandKind {
    /// c
    Constant,
    /// (t_+)^beta
    Power,
    /// t^beta for t > 0, 1 before
    ModifiedPower,
    /// exp(lambda t)
    Exponential,
    /// E_{alpha,1}(lambda (t_+)^alpha), with the operator's alpha
    MlPower,
}

/// Built-in operand or a JSON operand file.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct OperandArgs {
    /// Operand family
    #[arg(long, value_enum)]
    pub kind: Option<OperandKind>,
    /// Exponent for power and modified-power
    #[arg(long)]
    pub beta: Option<f64>,
    /// Rate for exponential and ml-power (1/time)
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Value for constant
    #[arg(long)]
    pub c: Option<f64>,
    /// JSON operand file, e.g. {"kind": "power_plus", "beta": 1.5}
    #[arg(long, conflicts_with = "kind")]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FracOp {
    /// Marchaud derivative, composed with --n classical derivatives
    Derivative,
    /// Weyl integral
    Integral,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct FracopArgs {
    #[command(flatten)]
    pub operand: OperandArgs,
    /// Fractional order in (0, 1)
    #[arg(long)]
    pub alpha: f64,
    /// Evaluation time
    #[arg(long)]
    pub t: f64,
    /// Classical derivatives applied first (total order n + alpha)
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = FracOp::Derivative)]
    pub op: FracOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxMethod {
    /// c E_alpha(lambda t^alpha); constant history only
    ClosedForm,
    /// Time marching; any history
    Marching,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct RelaxArgs {
    /// Order in (0, 1]; 1 only with the closed form
    #[arg(long)]
    pub alpha: f64,
    /// Rate (1/time^alpha)
    #[arg(long)]
    pub lambda: f64,
    /// Constant history value
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// JSON history file (values on t <= 0 are used); implies marching
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// End time
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Time step; must divide t_end
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// [default: closed-form, or marching when --history is given]
    #[arg(long, value_enum)]
    pub method: Option<RelaxMethod>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    Exponential,
    Fractional,
    Both,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct FitArgs {
    /// CSV with header `t,value`, increasing times, positive values
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FitModel::Both)]
    pub model: FitModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViscoMethod {
    /// Boltzmann superposition integral
    Integral,
    /// Discrete superposition sum with --n increments
    Sum,
    /// Fractional-derivative form; constant past only
    Fractional,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct ViscoArgs {
    /// JSON file {"material": {"k", "alpha"}, "strain": {"breakpoints", "past_rule"}}
    #[arg(long)]
    pub input: PathBuf,
    /// Last output time (same time unit as the breakpoints)
    #[arg(long)]
    pub t_end: f64,
    /// Number of output times after the loading origin
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = ViscoMethod::Integral)]
    pub method: ViscoMethod,
    /// Increments for the discrete sum
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct CtrwArgs {
    /// Waiting-time tail exponent in (0, 1), or 1 for unit waits
    #[arg(long)]
    pub alpha: f64,
    /// Number of walkers
    #[arg(long, default_value_t = 10_000)]
    pub walkers: u64,
    /// Observation horizon (time units)
    #[arg(long, default_value_t = 1e4)]
    pub t_end: f64,
    /// Lattice spacing (length units)
    #[arg(long, default_value_t = 1.0)]
    pub dx: f64,
    /// Waiting-time quantum (time units)
    #[arg(long, default_value_t = 1.0)]
    pub dtau: f64,
    /// Number of log-spaced observation times
    #[arg(long, default_value_t = 40)]
    pub n_times: usize,
    /// Histogram bin width in lattice sites (even) [default: from the spread]
    #[arg(long)]
    pub bin_sites: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct DiffusionArgs {
    /// Time order in (0, 1]
    #[arg(long)]
    pub alpha: f64,
    /// Generalized diffusion coefficient (length^2 / time^alpha)
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    /// Time
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Half-width of the x grid [default: where the solution is below 1e-13]
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Number of x points
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Report normalization and mean square displacement instead of the profile
    #[arg(long, default_value_t = false)]
    pub moments: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct ExtensionArgs {
    #[command(flatten)]
    pub operand: OperandArgs,
    /// Fractional order in (0, 1)
    #[arg(long)]
    pub alpha: f64,
    /// Start of the output window
    #[arg(long, default_value_t = 1.0)]
    pub t_lo: f64,
    /// End of the output window
    #[arg(long, default_value_t = 3.0)]
    pub t_hi: f64,
    /// Time step
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Report every n-th step
    #[arg(long, default_value_t = 100)]
    pub out_every: usize,
    /// Number of y levels
    #[arg(long, default_value_t = 400)]
    pub n_y: usize,
    /// Grading exponent of the y mesh, in [2, 8]
    #[arg(long, default_value_t = 3.0)]
    pub grading: f64,
    /// Height of the strip [default: from the operand's decay]
    #[arg(long)]
    pub y_max: Option<f64>,
}

/// An error with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn invalid(m: impl Into<String>) -> Self {
        CliError {
            code: 2,
            kind: "invalid_input",
            message: m.into(),
        }
    }

    pub fn numeric(m: impl Into<String>) -> Self {
        CliError {
            code: 1,
            kind: "numerical_failure",
            message: m.into(),
        }
    }

    pub(crate) fn internal(e: impl std::fmt::Display) -> Self {
        CliError::numeric(format!("internal: {e}"))
    }

    pub fn to_json_line(&self) -> String {
        json!({"error": self.kind, "message": self.message}).to_string()
    }
}

impl From<fracalc_core::Error> for CliError {
    fn from(e: fracalc_core::Error) -> Self {
        if e.is_invalid_input() {
            CliError::invalid(e.to_string())
        } else {
            CliError::numeric(e.to_string())
        }
    }
}

pub(crate) fn read_file(p: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(p).map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))
}

/// Runs one invocation and returns the exit code.
pub fn run<I, T, W, E>(argv: I, stdout: &mut W, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let err = CliError::invalid(e.render().to_string().trim().to_string());
            let _ = writeln!(stderr, "{}", err.to_json_line());
            return err.code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json_line());
            e.code
        }
    }
}

fn dispatch<W: Write>(cli: Cli, stdout: &mut W) -> Result<(), CliError> {
    let mut g = cli.global;
    let cfg = match &g.config {
        Some(p) => RunConfig::from_json(&read_file(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cfg.seed {
        g.seed = s;
    }
    if cfg.threads.is_some() {
        g.threads = cfg.threads;
    }
    if cfg.out_dir.is_some() {
        g.out_dir = cfg.out_dir.clone();
    }
    if cfg.format.is_some() {
        g.format = cfg.format;
    }
    if g.threads == Some(0) {
        return Err(CliError::invalid("--threads must be positive"));
    }
    let name = cli.command.name();
    let format = g.format.unwrap_or_else(|| cli.command.default_format());
    let section = cfg.section(name);
    let pool = fracalc_core::parallel::pool(g.threads)?;
    let outcome = pool.install(|| commands::execute(&cli.command, section, &g))?;
    output::emit(&outcome, format, g.out_dir.as_deref(), stdout)
}
