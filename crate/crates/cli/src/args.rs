use std::ffi::OsString;
use std::path::PathBuf;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use kendall_renewal::grid::Spacing;
use kendall_renewal::verify::DEFAULT_SEED;
use kendall_renewal::CATALOG;

use crate::error::CliError;
use crate::table::Format;

#[derive(Debug, Parser)]
#[command(
    name = "kendall-renewal",
    version,
    about = "Renewal theory for Kendall random walks: simulation, closed forms, asymptotics and checks",
    after_help = HELP_TAIL,
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Config-file format and the exit-code table, shown by `--help`.
pub const HELP_TAIL: &str = "Config files: any subcommand accepts --config FILE, a flat text file of
`key = value` lines (blank lines and `#` comments ignored). Keys are flag
names without the leading dashes; `_` and `-` are interchangeable. Flags
given on the command line win over the file.

Exit codes:
   0  success (and every requested check within tolerance)
   1  a requested check failed
   2  usage or config-file error
   3  i/o error
  10  invalid-parameter      11  invalid-input         12  unknown-distribution
  13  integration-failure    14  divergence            15  domain
  16  degenerate-state       17  cap-exceeded          18  runaway
  19  out-of-scope

Errors are reported on stderr as one line: error kind=<kind> msg=<message>";

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample walk trajectories, or counts N(t) with --t.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// R(t), E N(t)^2 and Var N(t) on a t-grid.
    #[command(args_override_self = true)]
    Renewal(RenewalArgs),
    /// P{N(t) = n} for n = 0..=nmax.
    #[command(args_override_self = true)]
    Pmf(PmfArgs),
    /// Finite-x ratios next to their limits.
    #[command(args_override_self = true)]
    Asymptotics(AsymptoticsArgs),
    /// Monte Carlo check of the limit law of N(t), or of S_n with --n.
    #[command(name = "limit-law", args_override_self = true)]
    LimitLaw(LimitLawArgs),
    /// Run a named check suite, or all of them.
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
    /// List the step distributions and their parameters.
    #[command(args_override_self = true)]
    Catalog(OutputArgs),
}

fn dist_names() -> PossibleValuesParser {
    PossibleValuesParser::new(CATALOG.iter().map(|e| e.name))
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// Step distribution, see `catalog`.
    #[arg(long, value_parser = dist_names())]
    pub dist: String,
    /// Order of the Kendall convolution.
    #[arg(long, value_parser = positive)]
    pub alpha: f64,
    /// Tail index, for `pareto` and `student_like`.
    #[arg(long, value_parser = positive)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Read `key = value` defaults from this file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Steps per path.
    #[arg(long, required_unless_present = "t", conflicts_with = "t", value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    /// Record N(t) per path instead of the trajectory.
    #[arg(long, value_parser = positive)]
    pub t: Option<f64>,
    /// Number of independent paths.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub paths: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_steps: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RenewalArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, value_parser = positive)]
    pub tmin: f64,
    #[arg(long, value_parser = positive)]
    pub tmax: f64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(2..))]
    pub points: u64,
    #[arg(long, value_enum, default_value = "linear")]
    pub spacing: SpacingArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum SpacingArg {
    Linear,
    Geometric,
}

impl From<SpacingArg> for Spacing {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Geometric => Spacing::Geometric,
        }
    }
}

#[derive(Debug, Args)]
pub struct PmfArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, value_parser = positive)]
    pub t: f64,
    #[arg(long, default_value_t = 20)]
    pub nmax: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Evaluation point, e.g. 1e6.
    #[arg(long, value_parser = positive)]
    pub x: f64,
    /// Increment for the Blackwell forms.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub h: f64,
    /// Exit 1 unless every rel_error is at most this.
    #[arg(long, value_parser = positive)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LimitLawArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Level t for the law of Ḡ(t) N(t).
    #[arg(long, required_unless_present = "n", conflicts_with = "n", value_parser = positive)]
    pub t: Option<f64>,
    /// Step count n for the law of S_n/U(n) (pareto only).
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub sims: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite name or `all`. With --dist, `all` runs only the suites that
    /// sweep step laws.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, value_parser = dist_names(), requires = "alpha")]
    pub dist: Option<String>,
    #[arg(long, value_parser = positive, requires = "dist")]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = positive, requires = "dist")]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Splices `key = value` lines of a `--config` file into the argument list
/// right after the subcommand, so that later command-line flags override
/// them.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    let mut iter = args.iter().skip(2);
    while let Some(a) = iter.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            path = iter.next().map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let flags = parse_config(&text)?;
    let mut out: Vec<OsString> = args[..2].to_vec();
    out.extend(flags.into_iter().map(OsString::from));
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

pub fn parse_config(text: &str) -> Result<Vec<String>, CliError> {
    let mut flags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key or value", i + 1)));
        }
        if key == "config" {
            return Err(CliError::Config(format!("line {}: config files do not nest", i + 1)));
        }
        flags.push(format!("--{key}={value}"));
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let f = parse_config("# run\ndist = uniform01\n\nn_sims=10\n").unwrap();
        assert_eq!(f, ["--dist=uniform01", "--n-sims=10"]);
        assert!(parse_config("dist\n").is_err());
        assert!(parse_config("config = x\n").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
