//! `pam-kit`: command-line front end of pam-core.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toml::Value;

use crate::config::Settings;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pam-kit", version, about = "Annealed moments of the parabolic Anderson model with a moving catalyst or trap")]
struct Cli {
    /// Configuration file (`key = value`, dotted sections); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// csv | json | bin
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output file; stdout when absent (required for bin).
    #[arg(short = 'o', long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long)]
    d: Option<i64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long)]
    p: Option<i64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transition probability, resolvent kernel or Green's function of one walk.
    Kernel {
        #[command(flatten)]
        model: ModelArgs,
        /// transition | resolvent | green
        #[arg(long)]
        kind: Option<String>,
        /// Times (comma separated).
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        /// Laplace variables (comma separated).
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
        /// Lattice site, one integer per coordinate.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z: Option<Vec<i64>>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        quadrature_nodes: Option<i64>,
        #[arg(long)]
        series_cutoff: Option<i64>,
    },
    /// Trap-regime asymptotes and limits.
    Trap {
        #[command(flatten)]
        model: ModelArgs,
        /// decay_d1 | decay_d2 | limit_transient | limit_homog_d1 | limit_homog_high_d
        #[arg(long)]
        regime: Option<String>,
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z: Option<Vec<i64>>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Long-time limit of the homogeneous trap moment against a = kappa / rho.
    Homog {
        #[command(flatten)]
        model: ModelArgs,
        /// Ratios kappa / rho (comma separated).
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Feynman-Kac Monte Carlo estimate of an annealed moment.
    Mc {
        #[command(flatten)]
        model: ModelArgs,
        /// localized | homogeneous | catalyst
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        /// Start site; p d integers for the catalyst moment.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<i64>>,
        #[arg(long)]
        n: Option<i64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Deterministic integration of the moment equations.
    Evolve {
        #[command(flatten)]
        model: ModelArgs,
        /// localized | homogeneous | catalyst | field
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<i64>>,
        #[arg(long)]
        tol: Option<f64>,
        /// Box radius for `field` (default grows with t).
        #[arg(long)]
        radius: Option<i64>,
    },
    /// Lyapunov exponent and principal eigenfunction.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// power | root | duality
        #[arg(long)]
        route: Option<String>,
        #[arg(long)]
        radius: Option<i64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        maxiter: Option<i64>,
    },
    /// Runs the acceptance criteria and writes their table.
    Verify {
        /// `all` or a comma list of criterion ids.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn set_f64(s: &mut Settings, key: &str, v: Option<f64>) {
    if let Some(v) = v {
        s.set(key, Value::Float(v));
    }
}

fn set_int(s: &mut Settings, key: &str, v: Option<i64>) {
    if let Some(v) = v {
        s.set(key, Value::Integer(v));
    }
}

fn set_str(s: &mut Settings, key: &str, v: Option<String>) {
    if let Some(v) = v {
        s.set(key, Value::String(v));
    }
}

fn set_f64s(s: &mut Settings, key: &str, v: Option<Vec<f64>>) {
    if let Some(v) = v {
        s.set(key, Value::Array(v.into_iter().map(Value::Float).collect()));
    }
}

fn set_ints(s: &mut Settings, key: &str, v: Option<Vec<i64>>) {
    if let Some(v) = v {
        s.set(key, Value::Array(v.into_iter().map(Value::Integer).collect()));
    }
}

fn set_model(s: &mut Settings, m: ModelArgs) {
    set_int(s, "model.d", m.d);
    set_f64(s, "model.kappa", m.kappa);
    set_f64(s, "model.rho", m.rho);
    set_f64(s, "model.gamma", m.gamma);
    set_int(s, "model.p", m.p);
}

/// Folds the command-line flags over the configuration file.
fn settings(cli: Cli) -> Result<(commands::Name, Settings), CliError> {
    let mut s = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    set_str(&mut s, "output.format", cli.format);
    if let Some(p) = cli.output {
        s.set("output.path", Value::String(p.to_string_lossy().into_owned()));
    }
    let name = match cli.command {
        Command::Kernel { model, kind, t, lambda, z, tol, quadrature_nodes, series_cutoff } => {
            set_model(&mut s, model);
            set_str(&mut s, "kernel.kind", kind);
            set_f64s(&mut s, "grid.t", t);
            set_f64s(&mut s, "grid.lambda", lambda);
            set_ints(&mut s, "site.x", z);
            set_f64(&mut s, "accuracy.tol", tol);
            set_int(&mut s, "accuracy.quadrature_nodes", quadrature_nodes);
            set_int(&mut s, "accuracy.series_cutoff", series_cutoff);
            commands::Name::Kernel
        }
        Command::Trap { model, regime, t, z, tol } => {
            set_model(&mut s, model);
            set_str(&mut s, "trap.regime", regime);
            set_f64s(&mut s, "grid.t", t);
            set_ints(&mut s, "site.x", z);
            set_f64(&mut s, "accuracy.tol", tol);
            commands::Name::Trap
        }
        Command::Homog { model, a, tol } => {
            set_model(&mut s, model);
            set_f64s(&mut s, "grid.a", a);
            set_f64(&mut s, "accuracy.tol", tol);
            commands::Name::Homog
        }
        Command::Mc { model, kind, t, x, n, seed } => {
            set_model(&mut s, model);
            set_str(&mut s, "mc.kind", kind);
            set_f64s(&mut s, "grid.t", t);
            set_ints(&mut s, "site.x", x);
            set_int(&mut s, "mc.n", n);
            if let Some(seed) = seed {
                s.set("run.seed", Value::Integer(seed_value(seed)?));
            }
            commands::Name::Mc
        }
        Command::Evolve { model, kind, t, x, tol, radius } => {
            set_model(&mut s, model);
            set_str(&mut s, "evolve.kind", kind);
            set_f64s(&mut s, "grid.t", t);
            set_ints(&mut s, "site.x", x);
            set_f64(&mut s, "accuracy.tol", tol);
            set_int(&mut s, "box.radius", radius);
            commands::Name::Evolve
        }
        Command::Spectrum { model, route, radius, tol, maxiter } => {
            set_model(&mut s, model);
            set_str(&mut s, "spectrum.route", route);
            set_int(&mut s, "box.radius", radius);
            set_f64(&mut s, "accuracy.tol", tol);
            set_int(&mut s, "accuracy.maxiter", maxiter);
            commands::Name::Spectrum
        }
        Command::Verify { suite, seed } => {
            set_str(&mut s, "verify.suite", suite);
            if let Some(seed) = seed {
                s.set("run.seed", Value::Integer(seed_value(seed)?));
            }
            commands::Name::Verify
        }
    };
    Ok((name, s))
}

/// Seeds are stored as TOML integers, which are signed.
fn seed_value(seed: u64) -> Result<i64, CliError> {
    i64::try_from(seed).map_err(|_| CliError::Usage(format!("seed must be below 2^63, got {seed}")))
}

/// Sizes the global worker pool from `PAM_KIT_THREADS`.
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PAM_KIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("PAM_KIT_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let (name, s) = settings(cli)?;
    commands::dispatch(name, &s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pam-kit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
