mod commands;
mod config;
mod output;

use clap::{Parser, ValueEnum};
use config::Config;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Probabilities,
    Equivalence,
    PolicyTargeted,
    PolicyLumpsum,
    Simulate,
    Identify,
    Discern,
    NashDemo,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

/// Two-player entry games: outcome probabilities, equivalence, policy
/// counterfactuals, simulation and identification.
///
/// Settings come from an optional JSON config; any flag below overrides the
/// matching field. Results are written as CSV to the output directory.
#[derive(Debug, Parser)]
#[command(name = "discern-lab", version, allow_negative_numbers = true)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// α as a10,a11,a20,a21 (player i's intercept with the opponent out, in).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
    #[arg(long)]
    rho: Option<f64>,

    /// saa, nash, rationalizable, maxmin, collusion (policy-targeted: saa or pne).
    #[arg(long)]
    concept: Option<String>,
    /// equal-weight, most-profitable, never-enter, mixed-only, fixed, outcome.
    #[arg(long)]
    selection: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    averaged: Option<bool>,

    /// Market covariates z1,z2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z: Option<Vec<f64>>,
    /// fixed or uniform.
    #[arg(long)]
    design: Option<String>,
    #[arg(long)]
    z_lo: Option<f64>,
    #[arg(long)]
    z_hi: Option<f64>,

    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stream: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    /// exact or mc.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,

    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    base_alpha: Option<f64>,
    #[arg(long)]
    tau_hat_lo: Option<f64>,
    #[arg(long)]
    tau_hat_hi: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,

    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Dataset CSV with header z1,z2,y1,y2.
    #[arg(long)]
    input: Option<PathBuf>,
}

/// A failed run and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<discern_lab::Error> for Failure {
    fn from(e: discern_lab::Error) -> Self {
        if e.is_numeric() {
            Failure::numeric(e.to_string())
        } else {
            Failure::config(e.to_string())
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn arity<const N: usize>(field: &str, v: &[f64]) -> Result<[f64; N], Failure> {
    v.try_into().map_err(|_| Failure::config(format!("invalid `{field}`: expected {N} comma-separated values, got {}", v.len())))
}

fn resolve(cli: Cli) -> Result<Config, Failure> {
    let mut c = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::config(format!("invalid `config`: {}: {e}", p.display())))?;
            serde_json::from_str::<Config>(&text).map_err(|e| Failure::config(format!("invalid `config`: {e}")))?
        }
        None => Config::default(),
    };
    let cmd = cli.command.name();
    if let Some(other) = c.command.as_deref().filter(|&o| o != cmd) {
        eprintln!("note: config command `{other}` replaced by `{cmd}`");
    }
    c.command = Some(cmd);
    if let Some(a) = cli.alpha {
        let a = arity::<4>("theta.alpha", &a)?;
        c.theta.alpha = [[a[0], a[1]], [a[2], a[3]]];
    }
    if let Some(b) = cli.beta {
        c.theta.beta = arity::<2>("theta.beta", &b)?;
    }
    set(&mut c.theta.rho, cli.rho);
    set(&mut c.dop.concept, cli.concept);
    set(&mut c.dop.selection, cli.selection);
    set(&mut c.dop.weights, cli.weights);
    set(&mut c.dop.averaged, cli.averaged);
    if let Some(z) = cli.z {
        c.market.z = arity::<2>("market.z", &z)?;
    }
    set(&mut c.market.design, cli.design);
    set(&mut c.market.z_lo, cli.z_lo);
    set(&mut c.market.z_hi, cli.z_hi);
    set(&mut c.numeric.tol, cli.tol);
    set(&mut c.numeric.l, cli.l);
    set(&mut c.numeric.seed, cli.seed);
    set(&mut c.numeric.stream, cli.stream);
    set(&mut c.numeric.n, cli.n);
    set(&mut c.numeric.method, cli.method);
    set(&mut c.numeric.bandwidth, cli.bandwidth);
    set(&mut c.numeric.bootstrap, cli.bootstrap);
    set(&mut c.numeric.grid, cli.grid);
    set(&mut c.policy.eta, cli.eta);
    set(&mut c.policy.tau, cli.tau);
    set(&mut c.policy.base_alpha, cli.base_alpha);
    set(&mut c.policy.tau_hat_lo, cli.tau_hat_lo);
    set(&mut c.policy.tau_hat_hi, cli.tau_hat_hi);
    set(&mut c.policy.steps, cli.steps);
    set(&mut c.io.output_dir, cli.output_dir);
    if cli.input.is_some() {
        c.io.input = cli.input;
    }
    Ok(c)
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("DISCERN_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config(format!("invalid `DISCERN_LAB_THREADS`: expected a positive integer, got `{raw}`")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(format!("invalid `DISCERN_LAB_THREADS`: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run() -> Result<Vec<PathBuf>, Failure> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            let msg = e.to_string();
            return Err(Failure::config(msg.trim_start_matches("error: ").trim_end()));
        }
    };
    init_threads()?;
    let command = cli.command;
    let cfg = resolve(cli)?;
    let files = match command {
        Command::Probabilities => commands::probabilities(&cfg)?,
        Command::Equivalence => commands::equivalence(&cfg)?,
        Command::PolicyTargeted => commands::policy_targeted(&cfg)?,
        Command::PolicyLumpsum => commands::policy_lumpsum(&cfg)?,
        Command::Simulate => commands::simulate(&cfg)?,
        Command::Identify => commands::identify(&cfg)?,
        Command::Discern => commands::discern(&cfg)?,
        Command::NashDemo => commands::nash_demo(&cfg)?,
    };
    output::write_all(&cfg, files)
}

fn main() -> ExitCode {
    match run() {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
