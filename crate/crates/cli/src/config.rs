//! Run configuration: command-line flags layered over an optional JSON
//! config file. Flags win.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Energy-density and Wick-square bounds for a test function
    Bound,
    /// Sampling function of a kernel as CSV
    Sampling,
    /// Wigner function of a test function as CSV
    Wigner,
    /// Randomized state scan against the Wick-square bound
    VerifyQei,
    /// Riemann-sum convergence table over a λ grid
    Mesoscopic,
    /// Positivity certificate for a homogeneous kernel
    Certify,
    /// Positivity and square root of a formal power series
    Fps,
}

/// Quantum-inequality bounds from operator-product-expansion data.
///
/// Test functions and kernels are JSON specs, given inline or as a path.
#[derive(Debug, Parser)]
#[command(name = "qiope", version)]
pub struct Cli {
    /// Command to run; may instead come from the config file
    pub command: Option<Command>,

    /// JSON config file whose keys mirror the long flags
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Test function spec
    #[arg(short = 'g', long = "g")]
    pub g: Option<String>,

    /// Kernel spec
    #[arg(long)]
    pub kernel: Option<String>,

    /// Averaging function for `mesoscopic` (default: the standard bump)
    #[arg(long)]
    pub chi: Option<String>,

    /// Target function for `mesoscopic`
    #[arg(long)]
    pub f: Option<String>,

    /// Masses, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub mass: Option<Vec<f64>>,

    /// Degree of the homogeneous kernel (i(s' - i0))^β
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,

    /// Decreasing λ values, comma separated
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,

    /// Support half-width d for `mesoscopic`
    #[arg(long)]
    pub d: Option<f64>,

    /// Series coefficients for `fps`: a JSON array, inline or as a path
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,

    /// Number of states for `verify-qei`
    #[arg(long)]
    pub states: Option<usize>,

    /// Grid points in s for `sampling` and `wigner`
    #[arg(long)]
    pub points: Option<usize>,

    /// Seed for the `verify-qei` state draws
    #[arg(long)]
    pub seed: Option<u64>,

    /// Tolerance override: relative quadrature tolerance for `sampling`,
    /// violation tolerance for `verify-qei`
    #[arg(long)]
    pub tol: Option<f64>,

    /// Write the result here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Keys accepted in the config file. Specs may be JSON values or strings
/// (paths or inline JSON).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    g: Option<Value>,
    kernel: Option<Value>,
    chi: Option<Value>,
    f: Option<Value>,
    mass: Option<OneOrMany>,
    beta: Option<f64>,
    lambda_grid: Option<Vec<f64>>,
    d: Option<f64>,
    coeffs: Option<Value>,
    states: Option<usize>,
    points: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
    out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

/// A fully merged configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub command: Command,
    pub g: Option<Value>,
    pub kernel: Option<Value>,
    pub chi: Option<Value>,
    pub f: Option<Value>,
    pub mass: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub lambda_grid: Option<Vec<f64>>,
    pub d: Option<f64>,
    pub coeffs: Option<Value>,
    pub states: Option<usize>,
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Inline JSON when the text looks like JSON, otherwise a path to a JSON file.
pub fn spec_value(text: &str, what: &str) -> Result<Value, CliError> {
    let trimmed = text.trim_start();
    let (source, body) = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        ("inline".to_string(), text.to_string())
    } else {
        let body = std::fs::read_to_string(text).map_err(|e| CliError::Io(format!("{what}: cannot read {text}: {e}")))?;
        (text.to_string(), body)
    };
    serde_json::from_str(&body).map_err(|e| CliError::Usage(format!("{what} ({source}): {e}")))
}

/// File specs given as strings are resolved relative to the config file.
fn file_spec(v: Value, base: &Path, what: &str) -> Result<Value, CliError> {
    match v {
        Value::String(s) => {
            let trimmed = s.trim_start();
            if trimmed.starts_with('{') || trimmed.starts_with('[') {
                spec_value(&s, what)
            } else {
                spec_value(&base.join(&s).to_string_lossy(), what)
            }
        }
        other => Ok(other),
    }
}

fn flag_spec(v: Option<String>, what: &str) -> Result<Option<Value>, CliError> {
    v.map(|s| spec_value(&s, what)).transpose()
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (file, base) = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("config: cannot read {}: {e}", path.display())))?;
                let cfg: FileConfig = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (cfg, base)
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        let merge = |flag: Option<Value>, from_file: Option<Value>, what: &str| -> Result<Option<Value>, CliError> {
            match flag {
                Some(v) => Ok(Some(v)),
                None => from_file.map(|v| file_spec(v, &base, what)).transpose(),
            }
        };
        let command = cli
            .command
            .or(file.command)
            .ok_or_else(|| CliError::Usage("no command given on the command line or in the config file".into()))?;
        Ok(RunConfig {
            command,
            g: merge(flag_spec(cli.g, "g")?, file.g, "g")?,
            kernel: merge(flag_spec(cli.kernel, "kernel")?, file.kernel, "kernel")?,
            chi: merge(flag_spec(cli.chi, "chi")?, file.chi, "chi")?,
            f: merge(flag_spec(cli.f, "f")?, file.f, "f")?,
            coeffs: merge(flag_spec(cli.coeffs, "coeffs")?, file.coeffs, "coeffs")?,
            mass: cli.mass.or(file.mass.map(|m| match m {
                OneOrMany::One(x) => vec![x],
                OneOrMany::Many(v) => v,
            })),
            beta: cli.beta.or(file.beta),
            lambda_grid: cli.lambda_grid.or(file.lambda_grid),
            d: cli.d.or(file.d),
            states: cli.states.or(file.states),
            points: cli.points.or(file.points),
            seed: cli.seed.or(file.seed),
            tol: cli.tol.or(file.tol),
            out: cli.out.or(file.out.map(|p| base.join(p))),
        })
    }
}
