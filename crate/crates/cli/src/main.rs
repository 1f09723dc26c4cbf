//! `mcftn`: capacity and BER sweeps and Gram diagnostics for MC-FTN-OTFS.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure.

mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcftn_core::{build_gram, run_sweep, Metric, RrcPulse, Scheme};
use serde_json::{Map, Value};

use config::RunConfig;

/// Environment variable that overrides the output directory from the config.
pub const OUT_DIR_ENV: &str = "MCFTN_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<mcftn_core::Error> for CliError {
    fn from(e: mcftn_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "mcftn", version, about = "MC-FTN-OTFS capacity, BER and Gram diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized capacity versus SNR; writes capacity.csv and capacity.gp.
    Capacity(RunArgs),
    /// Uncoded BER versus SNR; writes ber.csv and ber.gp.
    Ber(RunArgs),
    /// Dumps the Gram matrix and its spectrum; writes gram.csv and gram_eigs.csv.
    Gram(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    config: PathBuf,
    /// Output directory; takes precedence over the environment and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_t: Option<usize>,
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    /// Comma-separated SNR points in dB.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr_db: Option<Vec<f64>>,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
}

impl RunArgs {
    fn overrides(&self) -> Map<String, Value> {
        let mut map = Map::new();
        let mut put = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                map.insert(key.to_string(), v);
            }
        };
        put("alpha", self.alpha.map(Value::from));
        put("beta", self.beta.map(Value::from));
        put("theta", self.theta.map(Value::from));
        put("m", self.m.map(Value::from));
        put("n", self.n.map(Value::from));
        put("n_t", self.n_t.map(Value::from));
        put("n_r", self.n_r.map(Value::from));
        put("paths", self.paths.map(Value::from));
        put("seed", self.seed.map(Value::from));
        put("realizations", self.realizations.map(Value::from));
        put("frames", self.frames.map(Value::from));
        put("snr_db", self.snr_db.clone().map(Value::from));
        put(
            "schemes",
            self.schemes
                .as_ref()
                .map(|s| Value::from(s.iter().map(|x| x.to_string()).collect::<Vec<_>>())),
        );
        map
    }

    fn load(&self) -> Result<(RunConfig, PathBuf), CliError> {
        let cfg = RunConfig::load(&self.config, self.overrides())?;
        let dir = self
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .or_else(|| cfg.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok((cfg, dir))
    }
}

fn sweep(args: &RunArgs, metric: Metric) -> Result<(), CliError> {
    let (cfg, dir) = args.load()?;
    let specs = cfg.sweeps(metric)?;
    let mut results = Vec::with_capacity(specs.len());
    for spec in &specs {
        log::info!("alpha={} beta={}", spec.base.alpha, spec.base.beta);
        results.push(run_sweep(spec)?);
    }
    let path = match metric {
        Metric::Capacity => output::write_capacity(&dir, &results)?,
        Metric::Ber => output::write_ber(&dir, &results)?,
    };
    println!("wrote {}", path.display());
    Ok(())
}

fn gram(args: &RunArgs) -> Result<(), CliError> {
    let (cfg, dir) = args.load()?;
    let system = &cfg.system;
    system.validate()?;
    let pulse = RrcPulse::new(system.theta, system.t0)?;
    let g = build_gram(system, &pulse)?;
    let (gram_path, eig_path) = output::write_gram(&dir, &g)?;
    let eigs = g.eigenvalues();
    println!(
        "dim {} eigenvalues [{:.6e}, {:.6e}] condition {:.6e} active {}",
        g.dim(),
        eigs.iter().cloned().fold(f64::INFINITY, f64::min),
        eigs.iter().cloned().fold(0.0, f64::max),
        g.condition_number(),
        g.active_modes()
    );
    println!("wrote {} and {}", gram_path.display(), eig_path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Capacity(args) => sweep(args, Metric::Capacity),
        Command::Ber(args) => sweep(args, Metric::Ber),
        Command::Gram(args) => gram(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mcftn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
