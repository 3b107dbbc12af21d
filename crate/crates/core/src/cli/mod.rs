//! Command-line front end: argument parsing, config merging and exit codes.
//!
//! Every subcommand writes into an output directory. A JSON config file
//! given with `--config` supplies defaults for any long flag of the chosen
//! subcommand (keys are flag names without the dashes); flags given on the
//! command line win.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{input, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "trendcast", version, about = "Penetration bounds and simulation for trends on scale-free networks")]
pub struct Cli {
    /// JSON object of flag defaults, e.g. {"n": 5000, "gamma": 2.5}
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a scale-free network (network.csv, degrees.csv)
    Generate(GenerateArgs),
    /// Sweep the analytic penetration bound (sweep.csv, horizon_ordering.csv)
    Bound(BoundArgs),
    /// Monte Carlo estimate of the penetration probability (empirical.csv)
    Simulate(SimulateArgs),
    /// Fit adoption parameters from cascade event logs (params.json)
    Estimate(EstimateArgs),
    /// Compare a bound sweep with an empirical curve (compare.csv)
    Compare(CompareArgs),
    /// generate -> bound -> simulate -> compare in one output directory
    Pipeline(PipelineArgs),
}

const FORMATS: &str = "\
File formats:
  network.csv    u,v,w_uv,w_vu   one undirected edge per row; w_uv is the weight of v on u
  degrees.csv    node,degree
  params.json    {\"s\": {node: s_v}, \"w\": [{\"u\", \"v\", \"w_uv\"}], \"beta_hat\", \"log_likelihood\", \"converged\", \"iterations\"}
  seeds file     one node id per line, '#' comments allowed
  events CSV     time,kind,subject,source   kind is exposure|adoption, source empty for adoptions
  sweep.csv      delta_t,epsilon,bound,rho,sigma_minus,p_tilde,valid
  empirical.csv  epsilon,p_hat,ci_low,ci_high,runs
  compare.csv    epsilon,bound,p_hat,ci_high,violation
Lists accept `a,b,c` or the inclusive range `start:stop:step`.
Exit codes: 0 success, 2 usage or input error, 3 numeric validity failure under --strict.";

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory (created if missing)
    #[arg(long, default_value = "out", value_name = "DIR")]
    pub out: PathBuf,

    /// Master seed; stage seeds are derived from it
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Exit with code 3 when a numeric validity condition fails
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args)]
pub struct NetworkArgs {
    /// Edge-list CSV to load instead of generating
    #[arg(long, value_name = "PATH", conflicts_with_all = ["n"])]
    pub network: Option<PathBuf>,

    /// Node count when loading (defaults to the largest id + 1)
    #[arg(long, value_name = "N", requires = "network")]
    pub nodes: Option<usize>,

    /// Number of nodes to generate
    #[arg(long)]
    pub n: Option<usize>,

    /// Power-law exponent (> 1); also used for the analytic degree-ratio term
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Minimum degree
    #[arg(long, default_value_t = 1)]
    pub dmin: usize,

    /// Maximum degree (defaults to n - 1)
    #[arg(long)]
    pub dmax: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ParamsArgs {
    /// Adoption parameters JSON (e.g. from `estimate`)
    #[arg(long, value_name = "PATH")]
    pub params: Option<PathBuf>,

    /// Synthetic susceptibilities s_v ~ U[0, s_max] when no --params
    #[arg(long, default_value_t = 0.5)]
    pub s_max: f64,

    /// Synthetic weights w(v,u) ~ U[0, w_max] when no --params
    #[arg(long, default_value_t = 0.3)]
    pub w_max: f64,

    /// Diffusion factor (defaults to beta_hat of --params, else 2)
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArgs {
    /// Seed set file (one node id per line)
    #[arg(long, value_name = "PATH")]
    pub seeds: Option<PathBuf>,

    /// Fraction of nodes drawn uniformly as seeds when no --seeds
    #[arg(long, default_value_t = 0.05)]
    pub seed_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RhoModeArg {
    /// Largest bound over the rho grid
    Tightest,
    /// Smallest bound over the rho grid, as the optimizer is printed
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExposureArg {
    Printed,
    Conservative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PDeltaArg {
    /// Closed-form power-law bound
    Analytic,
    /// Sampled from the network's degrees
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BetaModelArg {
    Poisson,
    Deterministic,
}

#[derive(Debug, Clone, Args)]
pub struct BoundSettings {
    /// 1: generic local adoption; 2: adoption and influence factors
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub theorem: u8,

    /// Penetration targets
    #[arg(long, default_value = "0.1:1:0.1")]
    pub eps_grid: String,

    /// Horizons
    #[arg(long, default_value = "14:42:7")]
    pub dt_list: String,

    #[arg(long, value_enum, default_value_t = RhoModeArg::Tightest)]
    pub rho_mode: RhoModeArg,

    /// rho grid: relative:K (K divisions of the budget), integer, or step:H
    #[arg(long, default_value = "relative:1000")]
    pub rho_grid: String,

    /// Largest degree ratio searched inside the temporal resistance
    #[arg(long, default_value_t = 64.0)]
    pub delta_max: f64,

    #[arg(long, value_enum, default_value_t = ExposureArg::Printed)]
    pub exposure: ExposureArg,

    #[arg(long, value_enum, default_value_t = PDeltaArg::Analytic)]
    pub p_delta: PDeltaArg,

    /// Pairs sampled per ratio when --p-delta empirical
    #[arg(long, default_value_t = 100_000)]
    pub p_delta_samples: u64,

    /// Constant local adoption probability instead of the network curve
    #[arg(long)]
    pub p_local: Option<f64>,

    /// Override the adoption factor
    #[arg(long)]
    pub xi_g: Option<f64>,

    /// Override the influence factor
    #[arg(long)]
    pub xi_n: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimSettings {
    /// Independent runs
    #[arg(long, default_value_t = 10_000)]
    pub runs: u64,

    #[arg(long, value_enum, default_value_t = BetaModelArg::Poisson)]
    pub beta_model: BetaModelArg,

    /// Adopt after every step instead of once at the horizon
    #[arg(long)]
    pub per_step_adoption: bool,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, after_help = FORMATS)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, after_help = FORMATS)]
pub struct BoundArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    #[command(flatten)]
    pub params: ParamsArgs,
    #[command(flatten)]
    pub bound: BoundSettings,
    /// Fraction of nodes advocating at the start
    #[arg(long, default_value_t = 0.05)]
    pub seed_fraction: f64,
    /// Also write sweep.svg
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, after_help = FORMATS)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    #[command(flatten)]
    pub params: ParamsArgs,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[command(flatten)]
    pub sim: SimSettings,
    /// Steps per run
    #[arg(long, default_value_t = 14)]
    pub horizon: u32,
    /// Penetration targets
    #[arg(long, default_value = "0.1:1:0.1")]
    pub eps_grid: String,
    /// Also enumerate the exact probabilities (tiny networks, deterministic beta)
    #[arg(long)]
    pub exact: bool,
    /// Write event logs of the first K runs to DIR/cascades/
    #[arg(long, default_value_t = 0, value_name = "K")]
    pub log_cascades: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, after_help = FORMATS)]
pub struct EstimateArgs {
    /// Edge-list CSV the events refer to
    #[arg(long, value_name = "PATH")]
    pub network: PathBuf,
    /// Node count (defaults to the largest id + 1)
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Event-log CSV, one cascade per file; repeat or comma-separate
    #[arg(long, required = true, value_delimiter = ',', value_name = "PATH")]
    pub events: Vec<PathBuf>,
    /// Ridge coefficient
    #[arg(long, default_value_t = 1e-3)]
    pub reg: f64,
    /// Tolerance on the projected-gradient norm
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Horizon used for the empirical temporal resistance
    #[arg(long)]
    pub horizon: Option<u32>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, after_help = FORMATS)]
pub struct CompareArgs {
    /// sweep.csv from `bound`
    #[arg(long, value_name = "PATH")]
    pub sweep: PathBuf,
    /// empirical.csv from `simulate`
    #[arg(long, value_name = "PATH")]
    pub empirical: PathBuf,
    /// Horizon to compare (required when the sweep has several)
    #[arg(long)]
    pub delta_t: Option<u32>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, after_help = FORMATS)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    #[command(flatten)]
    pub params: ParamsArgs,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[command(flatten)]
    pub bound: BoundSettings,
    #[command(flatten)]
    pub sim: SimSettings,
    /// Simulated horizon (defaults to the smallest of --dt-list)
    #[arg(long)]
    pub horizon: Option<u32>,
    /// Also write sweep.svg
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Messages go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let strict = match &cli.command {
        Command::Generate(a) => a.out.strict,
        Command::Bound(a) => a.out.strict,
        Command::Simulate(a) => a.out.strict,
        Command::Estimate(a) => a.out.strict,
        Command::Compare(a) => a.out.strict,
        Command::Pipeline(a) => a.out.strict,
    };
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match commands::dispatch(&cli.command, &argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e, strict)
        }
    }
}

fn exit_code_for(e: &Error, strict: bool) -> i32 {
    if strict && e.is_numeric_validity() {
        EXIT_NUMERIC
    } else {
        EXIT_USAGE
    }
}

/// Removes `--config PATH` from `args` and splices the file's entries in
/// as flags right after the subcommand, ahead of the user's own flags.
fn merge_config(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(pos) = args
        .iter()
        .position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="))
    else {
        return Ok(args);
    };
    let flag = args.remove(pos).to_string_lossy().into_owned();
    let path = match flag.strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => {
            if pos >= args.len() {
                return Err(input("--config needs a path"));
            }
            PathBuf::from(args.remove(pos))
        }
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| input(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| input("config must be a JSON object"))?;
    let mut extra: Vec<OsString> = Vec::new();
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            serde_json::Value::Bool(true) => extra.push(flag.into()),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Array(items) => {
                let joined: Vec<String> = items.iter().map(scalar).collect::<Result<_>>()?;
                extra.push(flag.into());
                extra.push(joined.join(",").into());
            }
            other => {
                extra.push(flag.into());
                extra.push(scalar(other)?.into());
            }
        }
    }
    let sub = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 2)
        .unwrap_or(args.len());
    args.splice(sub..sub, extra);
    Ok(args)
}

fn scalar(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::Bool(b) => Ok(b.to_string()),
        _ => Err(input(format!("config value {v} is not a scalar"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_flags_precede_user_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"n": 50, "gamma": 2.5, "strict": true, "eps-grid": [0.1, 0.2]}"#).unwrap();
        let args = os(&["trendcast", "generate", "--config", cfg.to_str().unwrap(), "--n", "10"]);
        let merged = merge_config(args).unwrap();
        let text: Vec<String> = merged.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(text[1], "generate");
        let last_n = text.iter().rposition(|a| a == "--n").unwrap();
        assert_eq!(text[last_n + 1], "10");
        assert!(text.contains(&"0.1,0.2".to_string()));
        assert!(text.contains(&"--strict".to_string()));
        assert!(!text.contains(&"--config".to_string()));
    }

    #[test]
    fn later_flag_wins() {
        let cli = Cli::try_parse_from(["trendcast", "generate", "--n", "50", "--gamma", "2.5", "--n", "10"]).unwrap();
        match cli.command {
            Command::Generate(a) => assert_eq!(a.net.n, Some(10)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&Error::NoValidRho("x".into()), true), EXIT_NUMERIC);
        assert_eq!(exit_code_for(&Error::NoValidRho("x".into()), false), EXIT_USAGE);
        assert_eq!(exit_code_for(&Error::Input("x".into()), true), EXIT_USAGE);
        assert_eq!(run(["trendcast", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["trendcast", "generate", "--help"]), EXIT_OK);
    }

    #[test]
    fn help_documents_formats() {
        use clap::CommandFactory;
        let mut cmd = Cli::command();
        for sub in ["generate", "bound", "simulate", "estimate", "compare", "pipeline"] {
            let help = cmd.find_subcommand_mut(sub).unwrap().render_long_help().to_string();
            assert!(help.contains("Exit codes"), "{sub}");
            assert!(help.contains("--out"), "{sub}");
        }
    }
}
